// fitting.hpp — linear least squares of survival series against power-law
// bases (half-integer and integer exponents) and log-log slope extraction.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "epchain/dynamics.hpp"

namespace epchain::fitting {

struct ill_posed_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr double kMaxCondition = 1e13;

struct FitResult {
    std::vector<double> exponents;
    std::vector<double> coefficients;
    double t_min{0.0};
    double t_max{0.0};
    double rms{0.0};
    double condition{0.0};
};

// Least squares of P(t) - 1 against {t^e}; Householder QR, never normal
// equations. Requires at least 4x more samples than coefficients.
inline FitResult fit_powers(const dynamics::TimeSeries& series, double t_min, double t_max,
                            const std::vector<double>& exponents) {
    if (exponents.empty()) throw std::invalid_argument("fit_powers: empty basis");
    std::vector<int> idx;
    for (std::size_t i = 0; i < series.times.size(); ++i)
        if (series.times[i] >= t_min && series.times[i] <= t_max) idx.push_back(int(i));
    if (idx.size() < 4*exponents.size())
        throw std::invalid_argument("fit_powers: need at least 4x more samples than coefficients");
    if (series.times.empty() || t_min < series.times.front() - 1e-12 ||
        t_max > series.times.back() + 1e-12)
        throw std::invalid_argument("fit_powers: window outside the series support");

    const int nrow = int(idx.size()), ncol = int(exponents.size());
    Eigen::MatrixXd A(nrow, ncol);
    Eigen::VectorXd y(nrow);
    for (int r = 0; r < nrow; ++r) {
        const double t = series.times[idx[r]];
        for (int c = 0; c < ncol; ++c) A(r, c) = std::pow(t, exponents[c]);
        y(r) = series.values[idx[r]] - 1.0;
    }
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(ncol - 1);
    const double cond = smin > 0.0 ? smax/smin : std::numeric_limits<double>::infinity();
    if (!(cond < kMaxCondition))
        throw ill_posed_error("fit_powers: design matrix condition " + std::to_string(cond) +
                              " exceeds " + std::to_string(kMaxCondition));
    Eigen::VectorXd coef = A.colPivHouseholderQr().solve(y);
    const Eigen::VectorXd r = y - A*coef;

    FitResult out;
    out.exponents = exponents;
    out.coefficients.assign(coef.data(), coef.data() + ncol);
    out.t_min = series.times[idx.front()];
    out.t_max = series.times[idx.back()];
    out.rms = std::sqrt(r.squaredNorm()/nrow);
    out.condition = cond;
    return out;
}

inline FitResult fit_half_powers(const dynamics::TimeSeries& series, double t_min, double t_max) {
    return fit_powers(series, t_min, t_max, {0.5, 1.0, 1.5, 2.0, 2.5, 3.0});
}

inline FitResult fit_integer_powers(const dynamics::TimeSeries& series, double t_min, double t_max,
                                    int max_degree = 6) {
    std::vector<double> e;
    for (int k = 1; k <= max_degree; ++k) e.push_back(double(k));
    return fit_powers(series, t_min, t_max, e);
}

inline double evaluate_fit(const FitResult& f, double t) {
    double acc = 1.0;
    for (std::size_t i = 0; i < f.exponents.size(); ++i)
        acc += f.coefficients[i]*std::pow(t, f.exponents[i]);
    return acc;
}

// Least-squares slope of ln P against ln t. Oscillatory series (three or more
// interior maxima in the window) are reduced to their envelope maxima first.
inline double loglog_slope(const dynamics::TimeSeries& series, double t_min, double t_max) {
    std::vector<double> lt, lp;
    std::vector<int> idx;
    for (std::size_t i = 0; i < series.times.size(); ++i)
        if (series.times[i] >= t_min && series.times[i] <= t_max) {
            if (!(series.values[i] > 0.0))
                throw std::invalid_argument("loglog_slope: nonpositive P(t) in window");
            idx.push_back(int(i));
        }
    if (idx.size() < 3) throw std::invalid_argument("loglog_slope: too few samples in window");

    std::vector<int> maxima;
    for (std::size_t j = 1; j + 1 < idx.size(); ++j)
        if (series.values[idx[j]] > series.values[idx[j - 1]] &&
            series.values[idx[j]] > series.values[idx[j + 1]])
            maxima.push_back(idx[j]);
    const std::vector<int>& use = maxima.size() >= 3 ? maxima : idx;
    for (int i : use) {
        lt.push_back(std::log(series.times[i]));
        lp.push_back(std::log(series.values[i]));
    }
    const int n = int(lt.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        sx += lt[i];
        sy += lp[i];
        sxx += lt[i]*lt[i];
        sxy += lt[i]*lp[i];
    }
    return (n*sxy - sx*sy)/(n*sxx - sx*sx);
}

}  // namespace epchain::fitting
