// model.hpp — Hamiltonian families for a dot/qubit coupled to a semi-infinite chain:
// continuum dispersion, form factors, and chain self-energy in the uniformizing
// variable lambda = e^{ik} (energies in units of the chain hopping, J = 1).

#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace epchain {

using Complex = std::complex<double>;

// Signalled where the two lambda sheets coincide (E = -2 or +2, lambda = +1 or -1).
struct band_edge_error : std::domain_error {
    using std::domain_error::domain_error;
};

enum class Family {
    Qubit,    // two-site qubit, second site coupled to the chain endpoint
    EndDot,   // single dot with potential eps_d coupled to the chain endpoint
    SideDot,  // single dot side-coupled to chain site n
};

inline const char* family_name(Family f) {
    switch (f) {
        case Family::Qubit:   return "hq";
        case Family::EndDot:  return "hd";
        case Family::SideDot: return "hn";
    }
    return "?";
}

inline Family family_from_name(const std::string& s) {
    if (s == "hq") return Family::Qubit;
    if (s == "hd") return Family::EndDot;
    if (s == "hn") return Family::SideDot;
    throw std::invalid_argument("unknown family '" + s + "' (expected hq|hd|hn)");
}

struct ModelSpec {
    Family family{Family::EndDot};
    double g{0.1};      // dot(qubit)-chain coupling
    double V{0.0};      // intra-qubit coupling (Qubit only)
    double eps_d{0.0};  // dot potential (EndDot / SideDot)
    int n{1};           // attachment site index (SideDot only)

    static ModelSpec qubit(double g, double V) {
        ModelSpec m{Family::Qubit, g, V, 0.0, 1};
        m.validate();
        return m;
    }
    static ModelSpec end_dot(double g, double eps_d) {
        ModelSpec m{Family::EndDot, g, 0.0, eps_d, 1};
        m.validate();
        return m;
    }
    static ModelSpec side_dot(double g, double eps_d, int n) {
        ModelSpec m{Family::SideDot, g, 0.0, eps_d, n};
        m.validate();
        return m;
    }

    void validate() const {
        if (g <= 0.0) throw std::invalid_argument("ModelSpec: g must be > 0");
        if (family == Family::SideDot && n < 1)
            throw std::invalid_argument("ModelSpec: site index n must be >= 1");
    }

    // Number of discrete dot/qubit levels behind the projection.
    int level_count() const { return family == Family::Qubit ? 2 : 1; }

    // The scan parameter: V for the qubit model, eps_d otherwise.
    double param() const { return family == Family::Qubit ? V : eps_d; }

    ModelSpec with_param(double p) const {
        ModelSpec m = *this;
        (m.family == Family::Qubit ? m.V : m.eps_d) = p;
        return m;
    }

    // Effective side-coupling site: the end-coupled dot is the n = 1 case.
    int site() const { return family == Family::SideDot ? n : 1; }
};

// ------------------------------ dispersion -----------------------------------

// E(k) = -2 cos k, analytic in complex k.
inline Complex continuum_dispersion(Complex k) { return -2.0*std::cos(k); }

// Same band energy through lambda = e^{ik}:  E = -lambda - 1/lambda.
inline Complex energy_of_lambda(Complex lam) { return -lam - 1.0/lam; }

// Chain group velocity bound |dE/dk| <= 2; sets the finite-lattice horizon.
inline constexpr double kGroupVelocity = 2.0;

// ------------------------------ form factor ----------------------------------

// V_k = -sqrt(2/pi) sin(n k) for the side-coupled dot.
inline double form_factor(const ModelSpec& m, double k) {
    if (m.family != Family::SideDot)
        throw std::invalid_argument("form_factor: defined for the side-coupled family only");
    return -std::sqrt(2.0/std::numbers::pi)*std::sin(m.n*k);
}

// ------------------------------ self-energy ----------------------------------

// Chain self-energy at the dot as a function of lambda. The k-integral
//   Sigma(E) = g^2 \int_0^pi |V_k|^2 / (E - E_k) dk
// resums to the sheet-free polynomial
//   Sigma(lambda) = -g^2 (lambda + lambda^3 + ... + lambda^{2n-1}),
// which reduces to -g^2 lambda for end coupling (n = 1). The qubit family uses
// the same endpoint self-energy on its second site.
inline Complex self_energy(const ModelSpec& m, Complex lam) {
    if (lam == Complex(0.0, 0.0))
        throw std::invalid_argument("self_energy: lambda must be nonzero");
    if (std::abs(lam*lam - 1.0) < 1e-12)
        throw band_edge_error("self_energy: lambda at a band edge (lambda^2 = 1)");
    const int n = m.site();
    Complex sum = 0.0;
    Complex p = lam;
    const Complex lam2 = lam*lam;
    for (int j = 0; j < n; ++j) {
        sum += p;
        p *= lam2;
    }
    return -m.g*m.g*sum;
}

// ------------------------------ sheets ---------------------------------------

enum class Sheet { First, Second };  // |lambda| < 1 on the first sheet

// Both roots of lambda^2 + E lambda + 1 = 0, small-magnitude root first.
// The product of the roots is exactly 1; the small root is computed from the
// large one to avoid cancellation.
inline std::pair<Complex, Complex> lambda_roots(Complex E) {
    if (std::abs(E - 2.0) < 1e-14 || std::abs(E + 2.0) < 1e-14)
        throw band_edge_error("lambda_roots: E at a band edge");
    const Complex s = std::sqrt(E*E - 4.0);
    const Complex a = 0.5*(-E + s);
    const Complex b = 0.5*(-E - s);
    const Complex big = std::abs(a) >= std::abs(b) ? a : b;
    return {1.0/big, big};
}

inline Complex lambda_of_energy(Complex E, Sheet sheet) {
    auto [small, big] = lambda_roots(E);
    return sheet == Sheet::First ? small : big;
}

// Self-energy on a chosen Riemann sheet of the energy plane. The first sheet
// (|lambda| < 1) carries Im Sigma(E + i0) <= 0 inside the band.
inline Complex self_energy(const ModelSpec& m, Complex E, Sheet sheet) {
    return self_energy(m, lambda_of_energy(E, sheet));
}

}  // namespace epchain
