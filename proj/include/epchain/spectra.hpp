// spectra.hpp — dispersion polynomials (lambda and E representations), the
// discrete spectrum with its classification, generalized eigenvalue pencils,
// and generalized eigenstate norms.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

#include "epchain/model.hpp"
#include "epchain/roots.hpp"

namespace epchain::spectra {

using epchain::Complex;

struct ep_degeneracy_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Two lambda roots are flagged near-coalescent below this relative separation;
// chosen so Puiseux-regime detection triggers before root clustering degrades
// the companion solve.
inline constexpr double kCoalescenceTol = 1e-6;

// ------------------------- lambda-polynomial ----------------------------------

// Coefficients (ascending in lambda) of the polynomial whose roots are the
// lambda values of all discrete states, across both sheets:
//   Qubit:   (1-g^2) l^4 + (2-g^2-V^2) l^2 + 1
//   EndDot:  (1-g^2) l^2 + eps l + 1, stored negated as l*(E - eps - Sigma)
//   SideDot: g^2 (l^2 + l^4 + ... + l^{2n}) - l^2 - eps l - 1
// The dot families are written as lambda * (E - eps_d - Sigma(lambda)) so the
// same coefficients serve as the Green's-function denominator.
// `param` is V (Qubit) or eps_d (dot families); it may be complex during
// exceptional-point refinement.
template <class Scalar>
std::vector<Scalar> lambda_poly(Family family, double g, Scalar param, int n = 1) {
    const double g2 = g*g;
    if (family == Family::Qubit) {
        std::vector<Scalar> c(5, Scalar(0.0));
        c[0] = Scalar(1.0);
        c[2] = Scalar(2.0 - g2) - param*param;
        c[4] = Scalar(1.0 - g2);
        return c;
    }
    const int site = family == Family::EndDot ? 1 : n;
    std::vector<Scalar> c(2*site + 1, Scalar(0.0));
    c[0] = Scalar(-1.0);
    c[1] = -param;
    c[2] = Scalar(g2 - 1.0);
    for (int m = 2; m <= site; ++m) c[2*m] = Scalar(g2);
    return c;
}

inline std::vector<double> lambda_poly(const ModelSpec& m) {
    return lambda_poly<double>(m.family, m.g, m.param(), m.site());
}

// d/dparam of the lambda-polynomial coefficients.
template <class Scalar>
std::vector<Scalar> lambda_poly_dparam(Family family, double /*g*/, Scalar param, int n = 1) {
    if (family == Family::Qubit) {
        std::vector<Scalar> c(5, Scalar(0.0));
        c[2] = Scalar(-2.0)*param;
        return c;
    }
    const int site = family == Family::EndDot ? 1 : n;
    std::vector<Scalar> c(2*site + 1, Scalar(0.0));
    c[1] = Scalar(-1.0);
    return c;
}

// d/dg of the lambda-polynomial coefficients.
template <class Scalar>
std::vector<Scalar> lambda_poly_dg(Family family, double g, Scalar param, int n = 1) {
    if (family == Family::Qubit) {
        std::vector<Scalar> c(5, Scalar(0.0));
        c[2] = Scalar(-2.0*g);
        c[4] = Scalar(-2.0*g);
        return c;
    }
    (void)param;
    const int site = family == Family::EndDot ? 1 : n;
    std::vector<Scalar> c(2*site + 1, Scalar(0.0));
    for (int m = 1; m <= site; ++m) c[2*m] = Scalar(2.0*g);
    return c;
}

// --------------------------- E representation ---------------------------------

struct DispersionPolynomial {
    ModelSpec model;
    std::vector<double> lambda_coeffs;  // ascending in lambda
    std::vector<double> energy_coeffs;  // ascending in E
};

// E-representation. Qubit and EndDot use the printed closed forms; SideDot
// coefficients are generated from the lambda roots (E_j = -l_j - 1/l_j) and
// normalized so the leading coefficient is g^2, matching the n = 4 octic.
inline DispersionPolynomial dispersion_polynomial(const ModelSpec& m) {
    m.validate();
    DispersionPolynomial d{m, lambda_poly(m), {}};
    const double g2 = m.g*m.g;
    if (m.family == Family::Qubit) {
        d.energy_coeffs = {m.V*m.V*m.V*m.V, 0.0, g2*g2 + (g2 - 2.0)*m.V*m.V, 0.0, 1.0 - g2};
        return d;
    }
    if (m.family == Family::EndDot) {
        d.energy_coeffs = {m.eps_d*m.eps_d + g2*g2, m.eps_d*(g2 - 2.0), 1.0 - g2};
        return d;
    }
    const auto lams = roots::polynomial_roots(d.lambda_coeffs);
    std::vector<Complex> mono{1.0};
    for (const Complex& l : lams) {
        const Complex E = energy_of_lambda(l);
        std::vector<Complex> next(mono.size() + 1, Complex(0.0));
        for (std::size_t j = 0; j < mono.size(); ++j) {
            next[j] += -E*mono[j];
            next[j + 1] += mono[j];
        }
        mono = std::move(next);
    }
    d.energy_coeffs.resize(mono.size());
    for (std::size_t j = 0; j < mono.size(); ++j) d.energy_coeffs[j] = g2*mono[j].real();
    return d;
}

// --------------------------- discrete spectrum --------------------------------

enum class StateClass { Bound, Virtual, Resonance, AntiResonance };

inline const char* state_class_name(StateClass c) {
    switch (c) {
        case StateClass::Bound:         return "bound";
        case StateClass::Virtual:       return "virtual";
        case StateClass::Resonance:     return "resonance";
        case StateClass::AntiResonance: return "anti_resonance";
    }
    return "?";
}

struct DiscreteState {
    Complex energy;
    Complex lambda;
    StateClass cls{StateClass::Virtual};
    Complex norm{0.0};           // <d|psi>^2 under the pencil normalization
    bool near_coalescent{false};
};

inline StateClass classify_state(Complex energy, Complex lambda) {
    const double imtol = 1e-9*(1.0 + std::abs(energy));
    if (energy.imag() < -imtol) return StateClass::Resonance;
    if (energy.imag() > imtol) return StateClass::AntiResonance;
    return std::abs(lambda) < 1.0 ? StateClass::Bound : StateClass::Virtual;
}

// Green's-function numerator at the dot/initial site, so that
// G_dd(E) = N(lambda) / q(lambda) with q the lambda-polynomial above.
inline Complex green_numerator(const ModelSpec& m, Complex lam) {
    if (m.family == Family::Qubit) {
        const Complex E = energy_of_lambda(lam);
        return (E + m.g*m.g*lam)*lam*lam;
    }
    return lam;
}

// Generalized eigenstate norm <d|psi_j>^2 fixed by <Psi~|G|Psi> = 1. Computed
// as the Green's-function residue divided by (1 - lambda^2); reproduces the
// closed forms for the qubit and end-dot pencils and extends them to SideDot.
inline Complex eigenstate_norm_at(const ModelSpec& m, Complex lam) {
    const auto q = lambda_poly(m);
    const auto dq = roots::polyder(std::span<const double>(q));
    const Complex qp = roots::polyval(std::span<const double>(dq), lam);
    return green_numerator(m, lam)/(qp*lam*lam);
}

inline std::vector<DiscreteState> discrete_states(const ModelSpec& m) {
    m.validate();
    const auto q = lambda_poly(m);
    const auto lams = roots::polynomial_roots(q);
    const double scale = roots::coeff_scale(q);

    std::vector<DiscreteState> states;
    states.reserve(lams.size());
    for (const Complex& lam : lams) {
        DiscreteState s;
        s.lambda = lam;
        s.energy = energy_of_lambda(lam);
        s.cls = classify_state(s.energy, lam);
        // residual check of the resummed pole condition E - eps_d - Sigma = 0
        const double res = std::abs(roots::polyval(std::span<const double>(q), lam));
        if (res > 1e-8*scale*(1.0 + std::pow(std::abs(lam), double(q.size() - 1))))
            throw std::runtime_error("discrete_states: root failed the pole-condition residual");
        states.push_back(s);
    }
    for (std::size_t i = 0; i < states.size(); ++i)
        for (std::size_t j = i + 1; j < states.size(); ++j)
            if (std::abs(states[i].lambda - states[j].lambda) <
                kCoalescenceTol*(1.0 + std::abs(states[i].lambda))) {
                states[i].near_coalescent = true;
                states[j].near_coalescent = true;
            }
    for (auto& s : states)
        s.norm = s.near_coalescent ? Complex(0.0) : eigenstate_norm_at(m, s.lambda);
    std::sort(states.begin(), states.end(), [](const DiscreteState& a, const DiscreteState& b) {
        if (a.energy.real() != b.energy.real()) return a.energy.real() < b.energy.real();
        return a.energy.imag() < b.energy.imag();
    });
    return states;
}

inline Complex eigenstate_norm(const ModelSpec& m, const DiscreteState& s) {
    if (s.near_coalescent)
        throw ep_degeneracy_error("eigenstate_norm: state at an exceptional point; norm diverges");
    return eigenstate_norm_at(m, s.lambda);
}

// ------------------------------- pencil ----------------------------------------

// Linearization (F - lambda G)|Psi> = 0 of the quadratic lambda eigenproblem.
struct PencilPair {
    Eigen::MatrixXd F;
    Eigen::MatrixXd G;
    int dimension{0};
};

inline PencilPair build_pencil(const ModelSpec& m) {
    m.validate();
    if (m.family == Family::SideDot)
        throw std::invalid_argument("build_pencil: no pencil for the side-coupled family");
    if (m.family == Family::EndDot) {
        PencilPair p{Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(2, 2), 2};
        p.F << 0.0, 1.0,
               1.0, m.eps_d;
        p.G(0, 0) = 1.0;
        p.G(1, 1) = -1.0 + m.g*m.g;
        return p;
    }
    PencilPair p{Eigen::MatrixXd::Zero(4, 4), Eigen::MatrixXd::Zero(4, 4), 4};
    p.F(0, 2) = p.F(2, 0) = 1.0;
    p.F(1, 3) = p.F(3, 1) = 1.0;
    p.F(2, 3) = p.F(3, 2) = -m.V;
    p.G(0, 0) = p.G(1, 1) = 1.0;
    p.G(2, 2) = -1.0;
    p.G(3, 3) = m.g*m.g - 1.0;
    return p;
}

// G is diagonal and invertible for g != 1, so the pencil reduces to the
// standard eigenproblem of G^{-1} F (QZ struggles near the defective points).
inline std::vector<Complex> pencil_eigenvalues(const PencilPair& p) {
    Eigen::MatrixXd m = p.G.inverse()*p.F;
    Eigen::ComplexEigenSolver<Eigen::MatrixXd> es(m, false);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("pencil_eigenvalues: eigensolver failed");
    std::vector<Complex> out;
    for (int i = 0; i < p.dimension; ++i) out.push_back(es.eigenvalues()(i));
    return out;
}

}  // namespace epchain::spectra
