#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <span>

#include "epchain/greens.hpp"
#include "epchain/spectra.hpp"

using namespace epchain;
using namespace epchain::spectra;
using Catch::Approx;

namespace {

// Closed-form E eigenvalues of the qubit model, all four sign combinations.
std::vector<Complex> qubit_energies_closed(double g, double V) {
    const Complex disc = std::sqrt(Complex(std::pow(g, 4.0) + 2.0*(g*g - 2.0)*V*V +
                                           std::pow(V, 4.0)));
    std::vector<Complex> out;
    for (double s1 : {1.0, -1.0})
        for (double s2 : {1.0, -1.0}) {
            const Complex E2 = ((2.0 - g*g)*V*V - std::pow(g, 4.0) + s2*g*g*disc)/
                               (2.0*(1.0 - g*g));
            out.push_back(s1*std::sqrt(E2));
        }
    return out;
}

// Closed-form lambda eigenvalues of the qubit model.
std::vector<Complex> qubit_lambdas_closed(double g, double V) {
    const Complex disc = std::sqrt(Complex(std::pow(g, 4.0) + 2.0*(g*g - 2.0)*V*V +
                                           std::pow(V, 4.0)));
    std::vector<Complex> out;
    for (double s1 : {1.0, -1.0})
        for (double s2 : {1.0, -1.0}) {
            const Complex L2 = (V*V + g*g - 2.0 + s2*disc)/(2.0*(1.0 - g*g));
            out.push_back(s1*std::sqrt(L2));
        }
    return out;
}

double multiset_distance(std::vector<Complex> a, std::vector<Complex> b) {
    double worst = 0.0;
    for (const Complex& w : b) {
        double best = 1e300;
        std::size_t bi = 0;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (std::abs(a[i] - w) < best) {
                best = std::abs(a[i] - w);
                bi = i;
            }
        a.erase(a.begin() + bi);
        worst = std::max(worst, best);
    }
    return worst;
}

// Paper octic for the n = 4 side dot (ascending in E), with the printed stray
// "z" in the linear term read as E.
std::vector<double> n4_octic(double g, double eps) {
    const double g2 = g*g;
    return {-eps*eps,          2.0*eps*(1.0 + 2.0*g2), -(1.0 + 2.0*g2)*(1.0 + 2.0*g2),
            -10.0*eps*g2,      2.0*g2*(5.0 + 2.0*g2),  6.0*eps*g2,
            -g2*(6.0 + g2),    -eps*g2,                g2};
}

}  // namespace

TEST_CASE("dispersion polynomial closed coefficients") {
    const auto d = dispersion_polynomial(ModelSpec::qubit(0.75, 1.0));
    REQUIRE(d.energy_coeffs.size() == 5);
    CHECK(d.energy_coeffs[4] == Approx(0.4375).epsilon(1e-14));
    CHECK(d.energy_coeffs[2] == Approx(-1.12109375).epsilon(1e-14));
    CHECK(d.energy_coeffs[0] == Approx(1.0).epsilon(1e-14));
    CHECK(d.lambda_coeffs.size() == 5);  // lambda degree 4 = 2 x qubit levels
}

TEST_CASE("dispersion polynomial degrees per family") {
    CHECK(dispersion_polynomial(ModelSpec::end_dot(0.3, -1.0)).energy_coeffs.size() == 3);
    CHECK(dispersion_polynomial(ModelSpec::end_dot(0.3, -1.0)).lambda_coeffs.size() == 3);
    CHECK(dispersion_polynomial(ModelSpec::side_dot(0.06, -2.0, 4)).energy_coeffs.size() == 9);
    CHECK(dispersion_polynomial(ModelSpec::side_dot(0.05, -2.0, 6)).energy_coeffs.size() == 13);
}

TEST_CASE("n=4 energy representation reproduces the printed octic") {
    const double g = 0.06, eps = -2.03;
    const auto d = dispersion_polynomial(ModelSpec::side_dot(g, eps, 4));
    const auto want = n4_octic(g, eps);
    REQUIRE(d.energy_coeffs.size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i)
        CHECK(d.energy_coeffs[i] == Approx(want[i]).margin(1e-10));
}

TEST_CASE("decoupled dot limit returns the bare level") {
    const auto states = discrete_states(ModelSpec::end_dot(1e-8, -2.5));
    double best = 1e300;
    for (const auto& s : states) best = std::min(best, std::abs(s.energy - Complex(-2.5)));
    CHECK(best < 1e-12);
}

TEST_CASE("qubit spectrum near the EP2B matches the closed form") {
    const double g = 0.75, V = 0.33856;
    auto states = discrete_states(ModelSpec::qubit(g, V));
    REQUIRE(states.size() == 4);
    std::vector<Complex> got;
    for (const auto& s : states) got.push_back(s.energy);
    CHECK(multiset_distance(got, qubit_energies_closed(g, V)) < 1e-10);
    // two resonance/anti-resonance pairs on the imaginary axis, near -+ i GammaB/2
    const double gb2 = std::sqrt((2.0 - g*g)/std::sqrt(1.0 - g*g) - 2.0);
    for (const auto& s : states) {
        CHECK(std::abs(s.energy.real()) < 1e-10);
        CHECK(std::abs(s.energy.imag()) == Approx(gb2).margin(2e-3));
    }
}

TEST_CASE("end dot at its EP2A has a flagged double root") {
    const double g = 0.1;
    const auto states = discrete_states(ModelSpec::end_dot(g, -2.0*std::sqrt(1.0 - g*g)));
    REQUIRE(states.size() == 2);
    CHECK(states[0].near_coalescent);
    CHECK(states[1].near_coalescent);
    CHECK(states[0].energy.real() == Approx(-2.0000253).margin(5e-7));
    CHECK_THROWS_AS(eigenstate_norm(ModelSpec::end_dot(g, -2.0*std::sqrt(1.0 - g*g)), states[0]),
                    ep_degeneracy_error);
}

TEST_CASE("side dot n=4 generic spectrum composition") {
    const auto states = discrete_states(ModelSpec::side_dot(0.06, -1.0, 4));
    REQUIRE(states.size() == 8);
    int res = 0, anti = 0, real_virtual = 0;
    for (const auto& s : states) {
        if (s.cls == StateClass::Resonance) ++res;
        if (s.cls == StateClass::AntiResonance) ++anti;
        if (s.cls == StateClass::Virtual) ++real_virtual;
    }
    CHECK(res == 3);
    CHECK(anti == 3);
    CHECK(real_virtual == 2);
}

TEST_CASE("pencil matrices as printed") {
    const auto pd = build_pencil(ModelSpec::end_dot(0.1, -1.99));
    CHECK(pd.G(0, 0) == 1.0);
    CHECK(pd.G(1, 1) == Approx(-1.0 + 0.01).epsilon(1e-15));
    CHECK(pd.F(0, 1) == 1.0);
    CHECK(pd.F(1, 1) == Approx(-1.99));

    const auto pq = build_pencil(ModelSpec::qubit(0.75, 0.3385622));
    CHECK(pq.F(2, 3) == Approx(-0.3385622));
    CHECK(pq.F(3, 2) == Approx(-0.3385622));
    CHECK(pq.G(2, 2) == -1.0);
    CHECK(pq.G(3, 3) == Approx(0.75*0.75 - 1.0));
    CHECK_THROWS_AS(build_pencil(ModelSpec::side_dot(0.06, -2.0, 4)), std::invalid_argument);
}

TEST_CASE("pencil eigenvalues equal the closed-form lambdas") {
    const double g = 0.75, V = 0.3385622;
    const auto evs = pencil_eigenvalues(build_pencil(ModelSpec::qubit(g, V)));
    CHECK(multiset_distance(evs, qubit_lambdas_closed(g, V)) < 1e-10);
}

TEST_CASE("pencil and lambda-polynomial roots coincide on random models") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> gd(0.1, 0.9), Vd(0.2, 1.5), ed(-2.5, -0.3);
    for (int k = 0; k < 25; ++k) {
        const auto mq = ModelSpec::qubit(gd(rng), Vd(rng));
        std::vector<Complex> lam_roots;
        for (const auto& s : discrete_states(mq)) lam_roots.push_back(s.lambda);
        CHECK(multiset_distance(pencil_eigenvalues(build_pencil(mq)), lam_roots) < 1e-10);

        const auto md = ModelSpec::end_dot(gd(rng), ed(rng));
        lam_roots.clear();
        for (const auto& s : discrete_states(md)) lam_roots.push_back(s.lambda);
        CHECK(multiset_distance(pencil_eigenvalues(build_pencil(md)), lam_roots) < 1e-10);
    }
}

TEST_CASE("end-dot norms follow the printed closed form and its EP expansion") {
    const double g = 0.1, b = 1.0 - g*g;
    const double eps_bar = -2.0*std::sqrt(b), lam_bar = 1.0/std::sqrt(b);

    // exact closed form 1/(1 - (1-g^2) lambda^2)
    const auto m = ModelSpec::end_dot(g, -1.5);
    for (const auto& s : discrete_states(m)) {
        const Complex want = 1.0/(1.0 - b*s.lambda*s.lambda);
        CHECK(std::abs(eigenstate_norm(m, s) - want) < 1e-12);
    }

    // near the EP: 1/2 (1 +- i / sqrt(lambda_bar delta)), divergent parts opposite
    const double delta = 1e-6;
    const auto md = ModelSpec::end_dot(g, eps_bar + delta);
    const auto states = discrete_states(md);
    REQUIRE(states.size() == 2);
    const Complex n0 = eigenstate_norm(md, states[0]);
    const Complex n1 = eigenstate_norm(md, states[1]);
    const Complex div = Complex(0.0, 1.0)/std::sqrt(Complex(lam_bar*delta));
    const double err0 = std::min(std::abs(n0 - 0.5*(1.0 + div)), std::abs(n0 - 0.5*(1.0 - div)));
    const double err1 = std::min(std::abs(n1 - 0.5*(1.0 + div)), std::abs(n1 - 0.5*(1.0 - div)));
    CHECK(err0 < 1e-3*std::abs(div));
    CHECK(err1 < 1e-3*std::abs(div));
    CHECK(std::abs(n0.imag() + n1.imag()) < 1e-6*std::abs(div));  // divergences cancel

    // pair sum equals 1 up to O(sqrt(delta))
    for (double d : {1e-3, 1e-4, 1e-5}) {
        const auto ms = ModelSpec::end_dot(g, eps_bar + d);
        Complex sum = 0.0;
        for (const auto& s : discrete_states(ms)) sum += eigenstate_norm(ms, s);
        CHECK(std::abs(sum - 1.0) < std::sqrt(d));
        CHECK(std::abs(sum - 1.0) < 1e-9);  // in fact exact up to roundoff
    }

    // decoupled limit: the isolated level carries unit spectral weight (the
    // Green's-function residue; the pencil norms of the two lambda images of
    // the lone level sum to 1 instead)
    const auto m0 = ModelSpec::end_dot(1e-8, -2.5);
    Complex norm_sum = 0.0;
    for (const auto& s : discrete_states(m0)) {
        norm_sum += eigenstate_norm(m0, s);
        if (s.cls == StateClass::Bound)
            CHECK(std::abs(greens::residue_weight(m0, s.lambda) - 1.0) < 1e-8);
    }
    CHECK(std::abs(norm_sum - 1.0) < 1e-12);
}

TEST_CASE("qubit norms match the printed denominator") {
    const double g = 0.75, V = 0.45, g2 = g*g, V2 = V*V;
    const auto m = ModelSpec::qubit(g, V);
    for (const auto& s : discrete_states(m)) {
        const Complex l2 = s.lambda*s.lambda;
        const Complex den = 1.0 + (1.0 + g2 + V2)*l2 - (1.0 - 2.0*g2 + V2)*l2*l2 -
                            (1.0 - g2)*l2*l2*l2;
        const Complex want = V2*l2/den;
        CHECK(std::abs(eigenstate_norm(m, s) - want) < 1e-12);
    }
}

TEST_CASE("Vieta identities for the end dot") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> gd(0.05, 0.95), ed(-3.0, 3.0);
    for (int k = 0; k < 200; ++k) {
        const double g = gd(rng), eps = ed(rng);
        const auto states = discrete_states(ModelSpec::end_dot(g, eps));
        REQUIRE(states.size() == 2);
        const Complex prod = states[0].lambda*states[1].lambda;
        const Complex sum = states[0].lambda + states[1].lambda;
        CHECK(std::abs(prod - 1.0/(1.0 - g*g)) < 1e-12*std::abs(prod));
        CHECK(std::abs(sum + eps/(1.0 - g*g)) < 1e-11*(1.0 + std::abs(sum)));
    }
}

TEST_CASE("conjugate symmetry and classification invariants") {
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> gd(0.05, 0.6), ed(-2.4, -0.4);
    for (int k = 0; k < 20; ++k) {
        const auto m = ModelSpec::side_dot(gd(rng), ed(rng), 4);
        const auto states = discrete_states(m);
        for (const auto& s : states) {
            CHECK(std::abs(s.energy - energy_of_lambda(s.lambda)) < 1e-12*(1.0 + std::abs(s.energy)));
            if (s.cls == StateClass::Resonance) CHECK(s.energy.imag() < 0.0);
            if (s.cls == StateClass::AntiResonance) CHECK(s.energy.imag() > 0.0);
            if (s.cls == StateClass::Bound) CHECK(std::abs(s.lambda) < 1.0);
            if (s.cls == StateClass::Virtual) CHECK(std::abs(s.lambda) > 1.0);
            if (std::abs(s.energy.imag()) > 1e-8) {
                double best = 1e300;
                for (const auto& s2 : states)
                    best = std::min(best, std::abs(s2.energy - std::conj(s.energy)));
                CHECK(best < 1e-9);
            }
        }
    }
}

TEST_CASE("root residuals on the energy representation") {
    for (const ModelSpec& m :
         {ModelSpec::qubit(0.6, 0.8), ModelSpec::end_dot(0.3, -1.7),
          ModelSpec::side_dot(0.07, -1.95, 4), ModelSpec::side_dot(0.05, -2.01, 6)}) {
        const auto d = dispersion_polynomial(m);
        const double scale = roots::coeff_scale(d.energy_coeffs);
        for (const auto& s : discrete_states(m)) {
            const Complex p = roots::polyval(std::span<const double>(d.energy_coeffs), s.energy);
            CHECK(std::abs(p)/scale < 1e-10*std::max(1.0, std::pow(std::abs(s.energy),
                                                                   double(d.energy_coeffs.size() - 1))));
        }
    }
}

TEST_CASE("closed-form lambdas map onto closed-form energies") {
    const double g = 0.6, V = 0.9;
    std::vector<Complex> via_lambda;
    for (const Complex& l : qubit_lambdas_closed(g, V)) via_lambda.push_back(energy_of_lambda(l));
    CHECK(multiset_distance(via_lambda, qubit_energies_closed(g, V)) < 1e-12);
}
