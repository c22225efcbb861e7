// roots.hpp — dense polynomial root finding: companion-matrix eigenvalues with
// Newton polishing. Coefficients ascending; degrees here stay small (<= 24).

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

namespace epchain::roots {

using Complex = std::complex<double>;

template <class Scalar>
Scalar polyval(std::span<const Scalar> c, Scalar z) {
    Scalar acc{};
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc*z + *it;
    return acc;
}

inline Complex polyval(std::span<const double> c, Complex z) {
    Complex acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc*z + *it;
    return acc;
}

template <class Scalar>
std::vector<Scalar> polyder(std::span<const Scalar> c) {
    std::vector<Scalar> d;
    for (std::size_t j = 1; j < c.size(); ++j) d.push_back(double(j)*c[j]);
    return d;
}

inline double coeff_scale(std::span<const double> c) {
    double s = 0.0;
    for (double x : c) s = std::max(s, std::abs(x));
    return s;
}

// All roots of a real-coefficient polynomial (ascending coefficients).
// Companion-matrix eigenvalues followed by a few Newton steps per root,
// accepted only when they reduce the residual.
inline std::vector<Complex> polynomial_roots(std::span<const double> coeffs) {
    std::vector<double> c(coeffs.begin(), coeffs.end());
    while (!c.empty() && c.back() == 0.0) c.pop_back();
    if (c.size() < 2) throw std::invalid_argument("polynomial_roots: degree must be >= 1");

    std::vector<Complex> out;
    while (c.front() == 0.0) {  // roots at the origin
        out.push_back(0.0);
        c.erase(c.begin());
    }
    const int deg = int(c.size()) - 1;
    if (deg == 0) return out;

    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
    for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -c[i]/c[deg];
    Eigen::ComplexEigenSolver<Eigen::MatrixXd> es(comp, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("polynomial_roots: companion eigensolver failed");

    const auto d1 = polyder(std::span<const double>(c));
    for (int i = 0; i < deg; ++i) {
        Complex z = es.eigenvalues()(i);
        double best = std::abs(polyval(std::span<const double>(c), z));
        for (int it = 0; it < 4; ++it) {
            const Complex dp = polyval(std::span<const double>(d1), z);
            if (dp == Complex(0.0)) break;
            const Complex znew = z - polyval(std::span<const double>(c), z)/dp;
            const double r = std::abs(polyval(std::span<const double>(c), znew));
            if (r < best) {
                z = znew;
                best = r;
            } else {
                break;
            }
        }
        out.push_back(z);
    }
    return out;
}

}  // namespace epchain::roots
