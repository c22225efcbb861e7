#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <span>

#include "epchain/roots.hpp"

using namespace epchain;
using roots::Complex;
using roots::polynomial_roots;

namespace {

double min_match_distance(const std::vector<Complex>& found, const std::vector<Complex>& want) {
    // Hausdorff-style multiset distance via greedy matching (sizes agree here)
    double worst = 0.0;
    std::vector<bool> used(found.size(), false);
    for (const Complex& w : want) {
        double best = 1e300;
        std::size_t bi = 0;
        for (std::size_t i = 0; i < found.size(); ++i) {
            if (used[i]) continue;
            if (std::abs(found[i] - w) < best) {
                best = std::abs(found[i] - w);
                bi = i;
            }
        }
        used[bi] = true;
        worst = std::max(worst, best);
    }
    return worst;
}

}  // namespace

TEST_CASE("roots of a factored cubic") {
    // (z - 1)(z^2 + 9) = z^3 - z^2 + 9z - 9, roots 1, +-3i
    const std::vector<double> c{-9.0, 9.0, -1.0, 1.0};
    const auto r = polynomial_roots(c);
    REQUIRE(r.size() == 3);
    CHECK(min_match_distance(r, {Complex(1.0), Complex(0.0, 3.0), Complex(0.0, -3.0)}) < 1e-12);
}

TEST_CASE("leading and trailing zero handling") {
    // z^2 (z - 2), with an explicit zero leading coefficient appended
    const std::vector<double> c{0.0, 0.0, -2.0, 1.0, 0.0};
    const auto r = polynomial_roots(c);
    REQUIRE(r.size() == 3);
    CHECK(min_match_distance(r, {Complex(0.0), Complex(0.0), Complex(2.0)}) < 1e-12);
    CHECK_THROWS_AS(polynomial_roots(std::vector<double>{3.0}), std::invalid_argument);
}

TEST_CASE("random real polynomials: residuals and conjugate pairing") {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    for (int deg : {4, 8, 12, 24}) {
        std::vector<double> c(deg + 1);
        for (auto& x : c) x = coef(rng);
        if (std::abs(c.back()) < 0.1) c.back() = 1.0;
        const auto r = polynomial_roots(c);
        REQUIRE(int(r.size()) == deg);
        const double scale = roots::coeff_scale(c);
        for (const Complex& z : r) {
            const double pode = std::abs(roots::polyval(std::span<const double>(c), z));
            const double zmag = std::max(1.0, std::pow(std::abs(z), double(deg)));
            CHECK(pode/(scale*zmag) < 1e-10);
            if (std::abs(z.imag()) > 1e-8) {
                double best = 1e300;
                for (const Complex& z2 : r) best = std::min(best, std::abs(z2 - std::conj(z)));
                CHECK(best < 1e-7*(1.0 + std::abs(z)));
            }
        }
    }
}
