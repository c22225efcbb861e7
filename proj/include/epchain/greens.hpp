// greens.hpp — dot-site Green's function on either Riemann sheet, band spectral
// density, and the pole decomposition (bound weights, resonance residues) that
// feeds the survival-amplitude integrations.

#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

#include "epchain/model.hpp"
#include "epchain/roots.hpp"
#include "epchain/spectra.hpp"

namespace epchain::greens {

using epchain::Complex;

// G_dd(E) evaluated through lambda; sheet-free rational function of lambda.
inline Complex green_of_lambda(const ModelSpec& m, Complex lam) {
    const auto q = spectra::lambda_poly(m);
    return spectra::green_numerator(m, lam)/roots::polyval(std::span<const double>(q), lam);
}

inline Complex green_dot(const ModelSpec& m, Complex E, Sheet sheet) {
    return green_of_lambda(m, lambda_of_energy(E, sheet));
}

// Spectral density on the band, rho(E(k)) with E = -2 cos k, k in (0, pi):
// rho = -(1/pi) Im G_dd(E + i0); the retarded boundary value is lambda = e^{ik}.
inline double band_density(const ModelSpec& m, double k) {
    const Complex lam(std::cos(k), std::sin(k));
    return -green_of_lambda(m, lam).imag()/M_PI;
}

// Residue of G_dd(E) at the discrete state with the given lambda.
inline Complex residue_weight(const ModelSpec& m, Complex lam) {
    const auto q = spectra::lambda_poly(m);
    const auto dq = roots::polyder(std::span<const double>(q));
    const Complex qp = roots::polyval(std::span<const double>(dq), lam);
    return spectra::green_numerator(m, lam)*(1.0 - lam*lam)/(qp*lam*lam);
}

struct PoleDecomposition {
    std::vector<std::pair<double, double>> bound;          // (E_b, weight)
    std::vector<std::pair<Complex, Complex>> resonances;   // (E_r, residue), Im E_r < 0
};

// Bound states (first sheet) and resonances (second sheet, lower half plane).
// Only resonances with Re E inside the band are enclosed by the deformed
// contour used for long times; the caller filters on that.
inline PoleDecomposition pole_decomposition(const ModelSpec& m) {
    PoleDecomposition out;
    for (const auto& s : spectra::discrete_states(m)) {
        if (s.cls == spectra::StateClass::Bound)
            out.bound.emplace_back(s.energy.real(), residue_weight(m, s.lambda).real());
        else if (s.cls == spectra::StateClass::Resonance)
            out.resonances.emplace_back(s.energy, residue_weight(m, s.lambda));
    }
    return out;
}

}  // namespace epchain::greens
