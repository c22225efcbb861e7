// eppoints.hpp — locating exceptional points (closed-form and searched),
// A/B classification by side sampling, and half-power Puiseux expansions.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "epchain/model.hpp"
#include "epchain/roots.hpp"
#include "epchain/spectra.hpp"

namespace epchain::eppoints {

using epchain::Complex;

struct ep_not_found_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct unclassified_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EPRecord {
    Family family{Family::EndDot};
    int n{1};
    double g{0.0};
    double param{0.0};       // parameter location: V (Qubit) or eps_d
    Complex E_bar{0.0};      // coalesced energy
    Complex lambda_bar{0.0};
    int order{2};
    char ep_type{'A'};
    double gap{0.0};         // |threshold - E_bar|, nearest band edge

    ModelSpec model() const {
        ModelSpec m;
        m.family = family;
        m.g = g;
        m.n = n;
        (family == Family::Qubit ? m.V : m.eps_d) = param;
        return m;
    }
};

inline double edge_gap(Complex E_bar) {
    return std::min(std::abs(E_bar - Complex(-2.0)), std::abs(E_bar - Complex(2.0)));
}

// ----------------------------- closed forms ------------------------------------

// Printed EP locations for the qubit and end-dot families (g < 1).
inline std::vector<EPRecord> closed_form_eps(const ModelSpec& m) {
    m.validate();
    if (m.g >= 1.0)
        throw std::domain_error("closed_form_eps: EPs not real-valued for g >= 1");
    const double b = 1.0 - m.g*m.g;
    std::vector<EPRecord> out;
    if (m.family == Family::Qubit) {
        const double y = std::pow(b, -0.25);  // |lambda| at either EP
        EPRecord a{Family::Qubit, 1, m.g, 1.0 + std::sqrt(b), 0.0, y, 2, 'A', 0.0};
        a.E_bar = -y - 1.0/y;
        a.gap = edge_gap(a.E_bar);
        const double gamma_half = std::sqrt((2.0 - m.g*m.g)/std::sqrt(b) - 2.0);
        EPRecord bb{Family::Qubit, 1, m.g, 1.0 - std::sqrt(b),
                    Complex(0.0, -gamma_half), Complex(0.0, y), 2, 'B', 0.0};
        bb.gap = edge_gap(bb.E_bar);
        out = {a, bb};
    } else if (m.family == Family::EndDot) {
        const double lam = 1.0/std::sqrt(b);
        const double Eb = -(2.0 - m.g*m.g)/std::sqrt(b);
        EPRecord lo{Family::EndDot, 1, m.g, -2.0*std::sqrt(b), Eb, lam, 2, 'A', 0.0};
        lo.gap = edge_gap(lo.E_bar);
        EPRecord hi{Family::EndDot, 1, m.g, 2.0*std::sqrt(b), -Eb, -lam, 2, 'A', 0.0};
        hi.gap = edge_gap(hi.E_bar);
        out = {lo, hi};
    } else {
        throw std::invalid_argument("closed_form_eps: no printed forms for the side-coupled family");
    }
    return out;
}

// ----------------------------- classification ----------------------------------

namespace detail {

// The `count` states closest (in lambda) to the coalescence point.
inline std::vector<spectra::StateClass> nearest_classes(const ModelSpec& m, Complex lam_bar,
                                                        int count) {
    auto states = spectra::discrete_states(m);
    std::sort(states.begin(), states.end(),
              [&](const spectra::DiscreteState& a, const spectra::DiscreteState& b) {
                  return std::abs(a.lambda - lam_bar) < std::abs(b.lambda - lam_bar);
              });
    std::vector<spectra::StateClass> out;
    for (int i = 0; i < count && i < int(states.size()); ++i) out.push_back(states[i].cls);
    std::sort(out.begin(), out.end());
    return out;
}

inline bool is_pair(const std::vector<spectra::StateClass>& v, spectra::StateClass a,
                    spectra::StateClass b) {
    std::vector<spectra::StateClass> want{a, b};
    std::sort(want.begin(), want.end());
    return v == want;
}

}  // namespace detail

// Assigns A/B by sampling the spectrum on both parameter sides of the EP:
//   EP2A: two virtual states on one side, a resonance/anti-resonance pair on the other
//   EP2B: resonances on both sides (or the conjugate anti-resonance pair)
//   EP3A: a virtual state, a resonance and an anti-resonance on both sides
// The default offset 1e-4 is widened once against root clustering, then walked
// down for EPs so close to a band edge that the virtual pair crosses onto the
// first sheet within 1e-4 of the EP (the bound-virtual crossing at E = -+2
// happens a distance ~gap away in the parameter).
inline char classify_ep(const EPRecord& ep) {
    using spectra::StateClass;
    const ModelSpec base = ep.model();
    bool saw_real_pair_transition = false;
    for (double rel : {1e-4, 1e-3, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9}) {
        const double off = rel*std::max(1.0, std::abs(ep.param));
        const auto lo = detail::nearest_classes(base.with_param(ep.param - off), ep.lambda_bar,
                                                ep.order);
        const auto hi = detail::nearest_classes(base.with_param(ep.param + off), ep.lambda_bar,
                                                ep.order);
        if (ep.order == 2) {
            const bool lo_vv = detail::is_pair(lo, StateClass::Virtual, StateClass::Virtual);
            const bool hi_vv = detail::is_pair(hi, StateClass::Virtual, StateClass::Virtual);
            const bool lo_ra = detail::is_pair(lo, StateClass::Resonance, StateClass::AntiResonance);
            const bool hi_ra = detail::is_pair(hi, StateClass::Resonance, StateClass::AntiResonance);
            if ((lo_vv && hi_ra) || (lo_ra && hi_vv)) return 'A';
            const bool lo_rr = detail::is_pair(lo, StateClass::Resonance, StateClass::Resonance);
            const bool hi_rr = detail::is_pair(hi, StateClass::Resonance, StateClass::Resonance);
            const bool lo_aa =
                detail::is_pair(lo, StateClass::AntiResonance, StateClass::AntiResonance);
            const bool hi_aa =
                detail::is_pair(hi, StateClass::AntiResonance, StateClass::AntiResonance);
            if ((lo_rr && hi_rr) || (lo_aa && hi_aa)) return 'B';
            // real-eigenvalue pair (possibly one already bound) vs res/anti pair
            auto real_pair = [](const std::vector<StateClass>& v) {
                return v.size() == 2 && v[0] != StateClass::Resonance &&
                       v[0] != StateClass::AntiResonance && v[1] != StateClass::Resonance &&
                       v[1] != StateClass::AntiResonance;
            };
            if ((real_pair(lo) && hi_ra) || (lo_ra && real_pair(hi)))
                saw_real_pair_transition = true;
        } else if (ep.order == 3) {
            auto trio = [](const std::vector<StateClass>& v) {
                std::vector<StateClass> want{StateClass::Virtual, StateClass::Resonance,
                                             StateClass::AntiResonance};
                std::sort(want.begin(), want.end());
                return v == want;
            };
            if (trio(lo) && trio(hi)) return 'A';
        }
    }
    // no offset fell inside the two-virtual sliver, but the real-pair to
    // resonance-pair transition itself is the A signature
    if (saw_real_pair_transition) return 'A';
    throw unclassified_error("classify_ep: side samples did not match any EP pattern");
}

// ----------------------------- numeric search ----------------------------------

namespace detail {

// Discriminant of the lambda-polynomial from its root multiset:
// lc^(2d-2) prod_{i<j} (l_i - l_j)^2, real for real coefficients.
inline double discriminant_from_roots(std::span<const double> coeffs,
                                      const std::vector<Complex>& lams) {
    Complex d = 1.0;
    for (std::size_t i = 0; i < lams.size(); ++i)
        for (std::size_t j = i + 1; j < lams.size(); ++j) {
            const Complex diff = lams[i] - lams[j];
            d *= diff*diff;
        }
    const double lc = coeffs.back();
    return std::pow(lc, 2.0*double(lams.size()) - 2.0)*d.real();
}

inline std::pair<double, Complex> closest_pair(const std::vector<Complex>& lams) {
    double best = std::numeric_limits<double>::infinity();
    Complex mid = 0.0;
    for (std::size_t i = 0; i < lams.size(); ++i)
        for (std::size_t j = i + 1; j < lams.size(); ++j) {
            const double d = std::abs(lams[i] - lams[j]);
            if (d < best) {
                best = d;
                mid = 0.5*(lams[i] + lams[j]);
            }
        }
    return {best, mid};
}

// Newton iteration on (p, dp/dlambda) = 0 over complex (lambda, param).
inline std::optional<std::pair<Complex, Complex>> refine_ep2(const ModelSpec& base, Complex lam0,
                                                             Complex param0) {
    Complex lam = lam0, par = param0;
    using CSpan = std::span<const Complex>;
    for (int it = 0; it < 60; ++it) {
        const auto c = spectra::lambda_poly<Complex>(base.family, base.g, par, base.site());
        const auto c1 = roots::polyder(CSpan(c));
        const auto c2 = roots::polyder(CSpan(c1));
        const auto cp = spectra::lambda_poly_dparam<Complex>(base.family, base.g, par, base.site());
        const auto cp1 = roots::polyder(CSpan(cp));
        const Complex f0 = roots::polyval(CSpan(c), lam);
        const Complex f1 = roots::polyval(CSpan(c1), lam);
        const Complex j00 = f1, j01 = roots::polyval(CSpan(cp), lam);
        const Complex j10 = roots::polyval(CSpan(c2), lam);
        const Complex j11 = roots::polyval(CSpan(cp1), lam);
        const Complex det = j00*j11 - j01*j10;
        if (std::abs(det) < 1e-300) return std::nullopt;
        const Complex dlam = -(f0*j11 - f1*j01)/det;
        const Complex dpar = -(j00*f1 - j10*f0)/det;
        lam += dlam;
        par += dpar;
        if (std::abs(dlam) + std::abs(dpar) < 1e-13*(1.0 + std::abs(lam) + std::abs(par)))
            return std::make_pair(lam, par);
    }
    return std::nullopt;
}

}  // namespace detail

// Scans the parameter window for coalescing lambda-root pairs (discriminant
// sign changes and near-degenerate minima), then Newton-refines each candidate
// on the double-root system. Records are canonicalized to Im(E_bar) <= 0; the
// conjugate partner EP is implied by the real-coefficient symmetry.
inline std::vector<EPRecord> locate_ep2(const ModelSpec& base, double param_lo, double param_hi,
                                        int scan_points = 400) {
    base.validate();
    if (!(param_hi > param_lo)) throw std::invalid_argument("locate_ep2: empty window");

    std::vector<double> disc(scan_points), dmin(scan_points);
    std::vector<Complex> mids(scan_points);
    std::vector<double> params(scan_points);
    for (int i = 0; i < scan_points; ++i) {
        const double p = param_lo + (param_hi - param_lo)*i/(scan_points - 1);
        params[i] = p;
        const auto c = spectra::lambda_poly<double>(base.family, base.g, p, base.site());
        const auto lams = roots::polynomial_roots(c);
        disc[i] = detail::discriminant_from_roots(std::span<const double>(c), lams);
        auto [d, mid] = detail::closest_pair(lams);
        dmin[i] = d;
        mids[i] = mid;
    }

    std::vector<std::pair<Complex, double>> seeds;  // (lambda0, param0)
    for (int i = 0; i + 1 < scan_points; ++i)
        if (disc[i] == 0.0 || (disc[i] > 0) != (disc[i + 1] > 0)) {
            const double frac = std::abs(disc[i])/(std::abs(disc[i]) + std::abs(disc[i + 1]));
            const double p0 = params[i] + frac*(params[i + 1] - params[i]);
            seeds.emplace_back(dmin[i] < dmin[i + 1] ? mids[i] : mids[i + 1], p0);
        }
    for (int i = 1; i + 1 < scan_points; ++i)
        if (dmin[i] < dmin[i - 1] && dmin[i] < dmin[i + 1] && dmin[i] < 0.2)
            seeds.emplace_back(mids[i], params[i]);

    std::vector<EPRecord> found;
    const double window_tol = 1e-9*(1.0 + std::abs(param_hi - param_lo));
    for (const auto& [lam0, p0] : seeds) {
        const auto sol = detail::refine_ep2(base, lam0, p0);
        if (!sol) continue;
        auto [lam, par] = *sol;
        if (std::abs(par.imag()) > 1e-7*(1.0 + std::abs(par))) continue;  // complex-parameter EP
        const double p = par.real();
        if (p < param_lo - window_tol || p > param_hi + window_tol) continue;
        if (std::abs(lam.imag()) < 5e-9*(1.0 + std::abs(lam))) lam = lam.real();
        Complex E = energy_of_lambda(lam);
        if (std::abs(E.imag()) < 5e-9*(1.0 + std::abs(E))) E = E.real();
        if (E.imag() > 0.0) {  // take the lower-half-plane representative
            E = std::conj(E);
            lam = std::conj(lam);
        }
        bool dup = false;
        for (const auto& r : found)
            dup = dup || (std::abs(r.param - p) < 1e-8*(1.0 + std::abs(p)) &&
                          std::abs(r.lambda_bar - lam) < 1e-5*(1.0 + std::abs(lam)));
        if (dup) continue;
        EPRecord rec{base.family, base.site(), base.g, p, E, lam, 2, 'A', edge_gap(E)};
        rec.ep_type = classify_ep(rec);
        found.push_back(rec);
    }
    std::sort(found.begin(), found.end(),
              [](const EPRecord& a, const EPRecord& b) { return a.param < b.param; });
    return found;
}

namespace detail {

// Newton iteration on (p, p', p'') = 0 over complex (lambda, eps_d, g).
inline std::optional<std::array<Complex, 3>> refine_ep3(int n, Complex lam0, Complex eps0,
                                                        double g0) {
    Complex lam = lam0, eps = eps0, g = g0;
    using CSpan = std::span<const Complex>;
    for (int it = 0; it < 80; ++it) {
        // coefficients and their parameter derivatives at real g (g drifts
        // complex during iteration; rebuild coefficients manually)
        const int site = n;
        std::vector<Complex> c(2*site + 1, Complex(0.0));
        c[0] = -1.0;
        c[1] = -eps;
        c[2] = g*g - 1.0;
        for (int m2 = 2; m2 <= site; ++m2) c[2*m2] = g*g;
        std::vector<Complex> cg(2*site + 1, Complex(0.0));
        for (int m2 = 1; m2 <= site; ++m2) cg[2*m2] = 2.0*g;

        const auto c1 = roots::polyder(CSpan(c));
        const auto c2 = roots::polyder(CSpan(c1));
        const auto c3 = roots::polyder(CSpan(c2));
        const auto cg1 = roots::polyder(CSpan(cg));
        const auto cg2 = roots::polyder(CSpan(cg1));

        Eigen::Matrix3cd J;
        Eigen::Vector3cd F;
        F(0) = roots::polyval(CSpan(c), lam);
        F(1) = roots::polyval(CSpan(c1), lam);
        F(2) = roots::polyval(CSpan(c2), lam);
        J(0, 0) = F(1);
        J(1, 0) = F(2);
        J(2, 0) = roots::polyval(CSpan(c3), lam);
        J(0, 1) = -lam;   // d p / d eps
        J(1, 1) = -1.0;
        J(2, 1) = 0.0;
        J(0, 2) = roots::polyval(CSpan(cg), lam);
        J(1, 2) = roots::polyval(CSpan(cg1), lam);
        J(2, 2) = roots::polyval(CSpan(cg2), lam);
        const Eigen::Vector3cd dx = J.fullPivLu().solve(-F);
        lam += dx(0);
        eps += dx(1);
        g += dx(2);
        if (dx.cwiseAbs().maxCoeff() < 1e-13*(1.0 + std::abs(lam) + std::abs(eps) + std::abs(g)))
            return std::array<Complex, 3>{lam, eps, g};
    }
    return std::nullopt;
}

}  // namespace detail

// Tracks the two EP2As of the side-coupled model inside the eps window while
// g increases, until the branches merge into a third-order point; the merger
// is then polished on the triple-root system (p, p', p'') = 0.
inline EPRecord locate_ep3(const ModelSpec& base, double g_lo, double g_hi, double eps_lo,
                           double eps_hi, int g_steps = 24) {
    base.validate();
    if (base.family != Family::SideDot)
        throw std::invalid_argument("locate_ep3: third-order search is for the side-coupled family");

    std::string trace;
    auto pair_at = [&](double g) -> std::vector<EPRecord> {
        ModelSpec m = base;
        m.g = g;
        auto eps2 = locate_ep2(m, eps_lo, eps_hi, 320);
        std::erase_if(eps2, [](const EPRecord& r) { return r.ep_type != 'A'; });
        return eps2;
    };

    auto try_polish = [&](const std::vector<EPRecord>& pair, double g) -> std::optional<EPRecord> {
        const Complex lam0 = 0.5*(pair[0].lambda_bar + pair[1].lambda_bar);
        const Complex eps0 = 0.5*(pair[0].param + pair[1].param);
        const auto sol = detail::refine_ep3(base.site(), lam0, eps0, g);
        if (!sol) return std::nullopt;
        const auto [lam, eps, gg] = *sol;
        if (std::abs(lam.imag()) > 1e-8 || std::abs(eps.imag()) > 1e-8 ||
            std::abs(gg.imag()) > 1e-8)
            return std::nullopt;
        if (gg.real() < g_lo || gg.real() > g_hi || eps.real() < eps_lo || eps.real() > eps_hi)
            return std::nullopt;
        const Complex E = energy_of_lambda(lam.real());
        EPRecord rec{base.family, base.site(), gg.real(), eps.real(), E, lam.real(), 3, 'A',
                     edge_gap(E)};
        rec.ep_type = classify_ep(rec);
        return rec;
    };

    double g_ok = -1.0;
    std::vector<EPRecord> pair_ok;
    double g = g_lo;
    double step = (g_hi - g_lo)/g_steps;
    while (g <= g_hi + 1e-12) {
        auto pair = pair_at(g);
        if (pair.size() >= 2) {
            std::sort(pair.begin(), pair.end(),
                      [](const EPRecord& a, const EPRecord& b) { return a.param < b.param; });
            // keep the two closest-separated A-type points
            if (pair.size() > 2) {
                double best = std::numeric_limits<double>::infinity();
                std::size_t bi = 0;
                for (std::size_t i = 0; i + 1 < pair.size(); ++i)
                    if (pair[i + 1].param - pair[i].param < best) {
                        best = pair[i + 1].param - pair[i].param;
                        bi = i;
                    }
                pair = {pair[bi], pair[bi + 1]};
            }
            const double sep = pair[1].param - pair[0].param;
            trace += "g=" + std::to_string(g) + " sep=" + std::to_string(sep) + "; ";
            if (sep < 0.02) {
                if (auto rec = try_polish(pair, g)) return *rec;
            }
            g_ok = g;
            pair_ok = pair;
            g += step;
        } else if (g_ok < 0.0) {
            // the second branch may still be outside the eps window at small g
            trace += "g=" + std::to_string(g) + " pair incomplete; ";
            g += step;
        } else {
            // overshot the merger: bisect back toward the last good g
            step *= 0.5;
            if (step < 1e-7) {
                if (auto rec = try_polish(pair_ok, g_ok)) return *rec;
                throw ep_not_found_error("locate_ep3: branches lost before merging; last " + trace);
            }
            g = g_ok + step;
        }
    }
    if (!pair_ok.empty())
        if (auto rec = try_polish(pair_ok, g_ok)) return *rec;
    throw ep_not_found_error("locate_ep3: branches did not merge in the window (" + trace + ")");
}

// ----------------------------- Puiseux expansions -------------------------------

enum class PuiseuxVariable { Energy, Lambda, Norm };

// Half-power expansion around an order-2 EP. Coefficients are indexed by the
// half-step k: value_(+/-)(u) = sum_k coeff[k] (+/- sqrt(u))^k, where the
// detuning u is (V^2 - Vbar^2) for the qubit family and (eps_d - eps_bar)
// otherwise. The norm expansion carries a divergent k = -1 term.
struct PuiseuxExpansion {
    EPRecord center;
    PuiseuxVariable variable{PuiseuxVariable::Energy};
    std::map<int, Complex> coeff;
    int order{3};               // highest half-step kept
    bool closed_form{false};
    std::string warning;

    Complex evaluate(double u, bool plus_branch) const {
        const Complex s = (plus_branch ? 1.0 : -1.0)*std::sqrt(Complex(u));
        Complex acc = 0.0;
        for (const auto& [k, c] : coeff) {
            if (k == 0) {
                acc += c;
                continue;
            }
            Complex p = 1.0;
            for (int i = 0; i < std::abs(k); ++i) p *= s;
            acc += k > 0 ? c*p : c/p;
        }
        return acc;
    }
};

inline double detuning_of_param(const EPRecord& ep, double param) {
    if (ep.family == Family::Qubit) return param*param - ep.param*ep.param;
    return param - ep.param;
}

inline double param_of_detuning(const EPRecord& ep, double u) {
    if (ep.family == Family::Qubit) return std::sqrt(ep.param*ep.param + u);
    return ep.param + u;
}

namespace detail {

inline std::optional<PuiseuxExpansion> closed_form_puiseux(const ModelSpec& m, const EPRecord& ep,
                                                           PuiseuxVariable var) {
    const double g = m.g, b = 1.0 - g*g;
    if (m.family == Family::Qubit && ep.ep_type == 'B' && var == PuiseuxVariable::Energy) {
        PuiseuxExpansion px{ep, var, {}, 1, true, ""};
        px.coeff[0] = ep.E_bar;
        px.coeff[1] = g*g/(2.0*std::sqrt(b*(2.0 - g*g - 2.0*std::sqrt(b))));
        return px;
    }
    if (m.family == Family::EndDot && ep.ep_type == 'A') {
        const Complex lam = ep.lambda_bar;  // +-1/sqrt(1-g^2)
        if (var == PuiseuxVariable::Lambda && ep.param < 0.0) {
            PuiseuxExpansion px{ep, var, {}, 2, true, ""};
            px.coeff[0] = lam;
            px.coeff[1] = Complex(0.0, 1.0)*lam*std::sqrt(lam);
            px.coeff[2] = -0.5*lam*lam;
            return px;
        }
        if (var == PuiseuxVariable::Norm && ep.param < 0.0) {
            PuiseuxExpansion px{ep, var, {}, 0, true, ""};
            px.coeff[-1] = Complex(0.0, 0.5)/std::sqrt(lam);
            px.coeff[0] = 0.5;
            return px;
        }
    }
    return std::nullopt;
}

inline Complex state_variable(const ModelSpec& m, const spectra::DiscreteState& s,
                              PuiseuxVariable var) {
    switch (var) {
        case PuiseuxVariable::Energy: return s.energy;
        case PuiseuxVariable::Lambda: return s.lambda;
        case PuiseuxVariable::Norm:   return spectra::eigenstate_norm_at(m, s.lambda);
    }
    return 0.0;
}

}  // namespace detail

// Coefficients extracted by fitting the exact root splitting over a geometric
// detuning ladder against sqrt(u), u, u^{3/2}; closed forms are used where the
// printed expansions exist.
inline PuiseuxExpansion puiseux(const ModelSpec& m, const EPRecord& ep, PuiseuxVariable var,
                                int order = 3) {
    m.validate();
    if (ep.order != 2)
        throw std::invalid_argument("puiseux: half-power basis covers order-2 EPs only");
    if (order < 1 || order > 3)
        throw std::invalid_argument("puiseux: order must be 1..3 half-steps");
    if (auto cf = detail::closed_form_puiseux(m, ep, var)) {
        while (!cf->coeff.empty() && cf->coeff.rbegin()->first > order)
            cf->coeff.erase(std::prev(cf->coeff.end()));
        cf->order = std::min(cf->order, order);
        return *cf;
    }

    PuiseuxExpansion px{ep, var, {}, order, false, ""};
    std::vector<double> us;
    for (double u = 1e-3; u > 3e-8; u *= 0.25) us.push_back(u);

    std::vector<double> s_ok;
    std::vector<Complex> diff_ok, mean_ok;
    Complex prev_dir = 0.0;
    bool dropped = false;
    for (double u : us) {
        const ModelSpec mu = m.with_param(param_of_detuning(ep, u));
        auto states = spectra::discrete_states(mu);
        std::sort(states.begin(), states.end(),
                  [&](const spectra::DiscreteState& a, const spectra::DiscreteState& b) {
                      return std::abs(a.lambda - ep.lambda_bar) < std::abs(b.lambda - ep.lambda_bar);
                  });
        if (states.size() < 2) continue;
        if (std::abs(states[0].lambda - states[1].lambda) <
            spectra::kCoalescenceTol*(1.0 + std::abs(ep.lambda_bar))) {
            dropped = true;  // root-clustering regime: drop this rung
            continue;
        }
        const Complex y0 = detail::state_variable(mu, states[0], var);
        const Complex y1 = detail::state_variable(mu, states[1], var);
        Complex d = 0.5*(y0 - y1);
        if (prev_dir != Complex(0.0)) {
            if (std::abs(d/std::sqrt(u) - prev_dir) > std::abs(-d/std::sqrt(u) - prev_dir)) d = -d;
        } else if (d.imag() < 0.0 || (d.imag() == 0.0 && d.real() < 0.0)) {
            d = -d;
        }
        prev_dir = d/std::sqrt(u);
        s_ok.push_back(std::sqrt(u));
        diff_ok.push_back(d);
        mean_ok.push_back(0.5*(y0 + y1));
    }
    if (s_ok.size() < 3)
        throw std::runtime_error("puiseux: detuning ladder collapsed into the clustering regime");
    if (dropped) px.warning = "ladder reduced: smallest rungs in root-clustering regime";

    // center value from the EP record itself
    Complex c0;
    switch (var) {
        case PuiseuxVariable::Energy: c0 = ep.E_bar; break;
        case PuiseuxVariable::Lambda: c0 = ep.lambda_bar; break;
        case PuiseuxVariable::Norm:   c0 = 0.5; break;
    }
    px.coeff[0] = c0;

    const int nrow = int(s_ok.size());
    // odd part: c1 s + c3 s^3
    {
        const int ncol = order >= 3 ? 2 : 1;
        Eigen::MatrixXcd A(nrow, ncol);
        Eigen::VectorXcd y(nrow);
        for (int i = 0; i < nrow; ++i) {
            A(i, 0) = s_ok[i];
            if (ncol > 1) A(i, 1) = s_ok[i]*s_ok[i]*s_ok[i];
            y(i) = diff_ok[i];
        }
        const Eigen::VectorXcd c = A.colPivHouseholderQr().solve(y);
        px.coeff[1] = c(0);
        if (ncol > 1) px.coeff[3] = c(1);
    }
    // even part: c2 s^2 (about the known center)
    if (order >= 2) {
        Eigen::MatrixXcd A(nrow, 1);
        Eigen::VectorXcd y(nrow);
        for (int i = 0; i < nrow; ++i) {
            A(i, 0) = s_ok[i]*s_ok[i];
            y(i) = mean_ok[i] - c0;
        }
        px.coeff[2] = A.colPivHouseholderQr().solve(y)(0);
    }
    return px;
}

}  // namespace epchain::eppoints
