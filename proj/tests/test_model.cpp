#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "epchain/model.hpp"
#include "epchain/quadrature.hpp"
#include "epchain/spectra.hpp"

using namespace epchain;
using Catch::Approx;

namespace {

// Independent oracle: the defining k-integral g^2 int_0^pi |V_k|^2/(E - E_k) dk
// evaluated by adaptive quadrature (first sheet, real E outside the band).
double self_energy_k_integral(const ModelSpec& m, double E) {
    auto f = [&](double k) -> quad::Complex {
        const double vk = -std::sqrt(2.0/std::numbers::pi)*std::sin(m.site()*k);
        return vk*vk/(E + 2.0*std::cos(k));
    };
    return m.g*m.g*quad::adaptive_gk(f, 0.0, std::numbers::pi, 1e-12, 8).real();
}

}  // namespace

TEST_CASE("continuum dispersion at band landmarks") {
    CHECK(continuum_dispersion(0.0).real() == Approx(-2.0));
    CHECK(std::abs(continuum_dispersion(std::numbers::pi/2.0)) < 1e-15);
    // coalesced EP2A energy for g = 0.1 through lambda = 1/sqrt(1-g^2)
    const double lam = 1.0/std::sqrt(1.0 - 0.01);
    const Complex E = energy_of_lambda(lam);
    CHECK(E.real() == Approx(-2.0000253).margin(5e-7));
    CHECK(E.real() == Approx(-(2.0 - 0.01)/std::sqrt(0.99)).epsilon(1e-14));
}

TEST_CASE("form factor of the side-coupled dot") {
    const auto m4 = ModelSpec::side_dot(0.06, -2.0, 4);
    CHECK(form_factor(m4, std::numbers::pi/4.0) == Approx(0.0).margin(1e-15));
    CHECK(form_factor(m4, std::numbers::pi/8.0) == Approx(-std::sqrt(2.0/std::numbers::pi)));
    const auto m6 = ModelSpec::side_dot(0.06, -2.0, 6);
    CHECK(form_factor(m6, std::numbers::pi/12.0) == Approx(-std::sqrt(2.0/std::numbers::pi)));
    CHECK_THROWS_AS(form_factor(ModelSpec::end_dot(0.1, -2.0), 0.3), std::invalid_argument);
    CHECK_THROWS_AS(form_factor(ModelSpec::qubit(0.1, 0.5), 0.3), std::invalid_argument);
}

TEST_CASE("self-energy closed values") {
    // decoupled limit
    const auto m0 = ModelSpec::end_dot(1e-8, -2.0);
    CHECK(std::abs(self_energy(m0, Complex(0.7, 0.2))) < 1e-15);
    // linear end-dot form
    const auto m = ModelSpec::end_dot(0.5, -2.0);
    CHECK(self_energy(m, Complex(2.0)).real() == Approx(-0.5));
    CHECK(self_energy(m, Complex(2.0)).imag() == Approx(0.0).margin(1e-16));
}

TEST_CASE("side-dot self-energy matches the k-integral oracle") {
    const auto m = ModelSpec::side_dot(0.06, -2.0, 4);
    const double E = -3.0;
    const Complex via_lambda = self_energy(m, Complex(E), Sheet::First);
    CHECK(std::abs(via_lambda - self_energy_k_integral(m, E)) < 1e-10);

    const auto m6 = ModelSpec::side_dot(0.11, -2.0, 6);
    for (double E6 : {-2.7, -4.0, 3.1}) {
        const Complex v = self_energy(m6, Complex(E6), Sheet::First);
        CHECK(std::abs(v - self_energy_k_integral(m6, E6)) < 1e-10);
    }
}

TEST_CASE("self-energy sheet agreement through lambda") {
    std::mt19937 rng(1234);
    std::uniform_real_distribution<double> mag(0.1, 3.0), arg(0.0, 2.0*std::numbers::pi);
    const auto m = ModelSpec::side_dot(0.3, -2.0, 4);
    int tested = 0;
    while (tested < 100) {
        const double r = mag(rng);
        if (std::abs(r - 1.0) < 1e-3) continue;
        const Complex lam = std::polar(r, arg(rng));
        const Complex E = energy_of_lambda(lam);
        const Sheet sheet = r < 1.0 ? Sheet::First : Sheet::Second;
        CHECK(std::abs(self_energy(m, lam) - self_energy(m, E, sheet)) < 1e-12);
        ++tested;
    }
}

TEST_CASE("self-energy scales as g^2 and is linear for the end dot") {
    const Complex lam(0.4, 1.1);
    const auto m1 = ModelSpec::side_dot(0.21, -2.0, 6);
    const auto m2 = ModelSpec::side_dot(0.42, -2.0, 6);
    CHECK(std::abs(self_energy(m2, lam) - 4.0*self_energy(m1, lam)) < 1e-15);

    const auto d = ModelSpec::end_dot(0.37, -2.0);
    const Complex l1(0.3, -0.6), l2(-1.2, 0.9);
    CHECK(std::abs(self_energy(d, l1) + self_energy(d, l2) - self_energy(d, l1 + l2)) < 1e-15);
}

TEST_CASE("band edges and degenerate inputs are signalled") {
    const auto m = ModelSpec::side_dot(0.1, -2.0, 4);
    CHECK_THROWS_AS(self_energy(m, Complex(1.0)), band_edge_error);
    CHECK_THROWS_AS(self_energy(m, Complex(-1.0)), band_edge_error);
    CHECK_THROWS_AS(self_energy(m, Complex(0.0)), std::invalid_argument);
    CHECK_THROWS_AS(lambda_of_energy(Complex(-2.0), Sheet::First), band_edge_error);
}

TEST_CASE("lambda roots multiply to one") {
    for (Complex E : {Complex(-3.0), Complex(0.5, -0.4), Complex(2.4, 0.1)}) {
        auto [small, big] = lambda_roots(E);
        CHECK(std::abs(small*big - 1.0) < 1e-14);
        CHECK(std::abs(small) < 1.0);
        CHECK(std::abs(big) > 1.0);
        CHECK(std::abs(energy_of_lambda(small) - E) < 1e-12);
    }
}

TEST_CASE("model invariants are enforced") {
    CHECK_THROWS_AS(ModelSpec::end_dot(-0.1, -2.0), std::invalid_argument);
    CHECK_THROWS_AS(ModelSpec::end_dot(0.0, -2.0), std::invalid_argument);
    CHECK_THROWS_AS(ModelSpec::side_dot(0.1, -2.0, 0), std::invalid_argument);
    CHECK(ModelSpec::qubit(0.75, 0.5).level_count() == 2);
    CHECK(ModelSpec::end_dot(0.1, -2.0).level_count() == 1);
    // V = 0 is a legal decoupled-qubit edge: the d1 level sits in the band
    CHECK(spectra::discrete_states(ModelSpec::qubit(0.75, 0.0)).size() == 4);
}
