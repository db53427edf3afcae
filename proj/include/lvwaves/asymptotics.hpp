#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lvwaves/error.hpp"
#include "lvwaves/fitting.hpp"
#include "lvwaves/model.hpp"
#include "lvwaves/wavesolver.hpp"

namespace lvw::asymptotics {

struct TheoryRates {
    double mu_minus = 0.0;       ///< slow decay exponent at -inf (sqrt(alpha) at the critical speed)
    double mu_minus_fast = 0.0;  ///< fast root at -inf
    double mu_plus = 0.0;        ///< approach exponent at +inf
    double nu_plus = 0.0;        ///< subdominant approach exponent of the first component at +inf
    bool critical = false;
};

enum class End { left, right };

struct Window {
    double lo = 0.0, hi = 0.0;
};

/// Fitted exponents of both components at one end.
struct EndFit {
    End end = End::left;
    Window window;
    double exponent_u1 = 0.0, exponent_u2 = 0.0;
    double plain_slope_u1 = 0.0;  ///< single-exponential slope of u1 (equals exponent_u1 at the left end)
    double amplitude_u1 = 0.0, amplitude_u2 = 0.0;
    double linear_u1 = std::numeric_limits<double>::quiet_NaN();  ///< critical prefactor slope
    double linear_u2 = std::numeric_limits<double>::quiet_NaN();
    bool prefactor_corrected = false;
    std::size_t nodes = 0;
};

struct EndFitOptions {
    bool critical = false;                ///< subtract log|xi| (left end)
    std::optional<double> u1_subdominant; ///< known second exponent of the first component's tail
    double limit_u1 = 1.0;                ///< right limits
    double limit_u2 = std::numeric_limits<double>::quiet_NaN();
    double min_boundary_distance = 5.0;
    double underflow = 1e-14;
};

struct AsymptoticFit {
    TheoryRates theory;
    EndFit left, right;
};

struct Thresholds {
    double rel_tol = 0.02;
    double critical_rel_tol = 0.05;
    double share_tol = 0.01;
};

struct RateReport {
    bool critical = false;
    double rel_err_left_u1 = 0.0, rel_err_left_u2 = 0.0;
    double rel_err_right_u1 = 0.0, rel_err_right_u2 = 0.0;
    double share_diff = 0.0;       ///< relative gap between the two right exponents
    bool slow_root_selected = false;
    bool signs_ok = false;
    bool pass_left = false, pass_right = false, pass_share = false;
    bool passed() const { return pass_left && pass_right && pass_share; }
};

inline TheoryRates theoretical_rates(const model::ScaledParams& s, double c) {
    const double disc = c * c - 4.0 * s.alpha;
    if (disc < -1e-10) {
        std::ostringstream os;
        os << "speed c=" << c << " is subcritical (c_min=" << s.c_min << ")";
        throw PreconditionError(os.str());
    }
    TheoryRates t;
    t.critical = std::abs(disc) <= 1e-10;
    const double root = t.critical ? 0.0 : std::sqrt(disc);
    t.mu_minus = t.critical ? std::sqrt(s.alpha) : 0.5 * (c - root);
    t.mu_minus_fast = 0.5 * (c + root);
    t.mu_plus = 0.5 * (c - std::sqrt(c * c + 4.0 * (s.b - s.eps1)));
    t.nu_plus = 0.5 * (c - std::sqrt(c * c + 4.0));
    return t;
}

namespace detail {

struct Samples {
    std::vector<double> x, y1, y2;
};

inline Samples collect(const wave::WaveProfile& w, End end, Window win, const EndFitOptions& o) {
    if (!(win.lo < win.hi)) throw PreconditionError("empty fit window");
    if (win.lo < w.grid.front() + o.min_boundary_distance || win.hi > w.grid.back() - o.min_boundary_distance) {
        std::ostringstream os;
        os << "fit window [" << win.lo << ", " << win.hi << "] closer than " << o.min_boundary_distance
           << " to the domain ends [" << w.grid.front() << ", " << w.grid.back() << "]";
        throw PreconditionError(os.str());
    }
    if (end == End::right && std::isnan(o.limit_u2)) throw PreconditionError("right-end fit needs limit_u2");
    Samples s;
    for (std::size_t i = 0; i < w.grid.size; ++i) {
        const double x = w.grid[i];
        if (x < win.lo || x > win.hi) continue;
        const double a = end == End::left ? w.u1[i] : o.limit_u1 - w.u1[i];
        const double b = end == End::left ? w.u2[i] : o.limit_u2 - w.u2[i];
        if (!(a > o.underflow) || !(b > o.underflow)) {
            std::ostringstream os;
            os << "fit window reaches the underflow region at xi=" << x << " (values " << a << ", " << b << ")";
            throw PreconditionError(os.str());
        }
        s.x.push_back(x);
        s.y1.push_back(a);
        s.y2.push_back(b);
    }
    if (s.x.size() < 3) throw PreconditionError("fit window holds fewer than 3 nodes");
    return s;
}

inline LineFit log_fit(const std::vector<double>& x, const std::vector<double>& y, bool critical) {
    std::vector<double> ly(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) ly[i] = std::log(y[i]) - (critical ? std::log(std::abs(x[i])) : 0.0);
    return fit_line(x, ly);
}

// Projection amplitude of y onto exp(mu x).
inline double amplitude(const std::vector<double>& x, const std::vector<double>& y, double mu) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = std::exp(mu * x[i]);
        num += y[i] * e;
        den += e * e;
    }
    return num / den;
}

struct TwoMode {
    double mu = 0.0, A = 0.0, C = 0.0, cost = 0.0;
};

// For fixed mu, relative least squares of y ~ A e^{mu x} + C e^{nu x}.
inline TwoMode two_mode_at(const std::vector<double>& x, const std::vector<double>& y, double mu, double nu) {
    double s11 = 0, s12 = 0, s22 = 0, t1 = 0, t2 = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double p = std::exp(mu * x[i]) / y[i], q = std::exp(nu * x[i]) / y[i];
        s11 += p * p;
        s12 += p * q;
        s22 += q * q;
        t1 += p;
        t2 += q;
    }
    const double det = s11 * s22 - s12 * s12;
    TwoMode m;
    m.mu = mu;
    if (!(std::abs(det) > 0.0)) {
        m.cost = std::numeric_limits<double>::infinity();
        return m;
    }
    m.A = (t1 * s22 - t2 * s12) / det;
    m.C = (s11 * t2 - s12 * t1) / det;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = (m.A * std::exp(mu * x[i]) + m.C * std::exp(nu * x[i])) / y[i] - 1.0;
        m.cost += r * r;
    }
    return m;
}

inline TwoMode two_mode_fit(const std::vector<double>& x, const std::vector<double>& y, double nu) {
    const double lo = nu * (1.0 - 1e-3), hi = -1e-6;
    const int scan = 400;
    double best_mu = lo, best_cost = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= scan; ++k) {
        const double mu = lo + (hi - lo) * k / scan;
        const double cost = two_mode_at(x, y, mu, nu).cost;
        if (cost < best_cost) { best_cost = cost; best_mu = mu; }
    }
    const double step = (hi - lo) / scan;
    const double mu = golden_minimize([&](double m) { return two_mode_at(x, y, m, nu).cost; },
                                      std::max(lo, best_mu - step), std::min(hi, best_mu + step), 1e-13);
    return two_mode_at(x, y, mu, nu);
}

}  // namespace detail

/// Least-squares exponents of both components over `win` at one end of the profile.
inline EndFit fit_decay_rate(const wave::WaveProfile& w, End end, Window win, const EndFitOptions& o = {}) {
    const detail::Samples s = detail::collect(w, end, win, o);
    EndFit f;
    f.end = end;
    f.window = win;
    f.nodes = s.x.size();
    const bool corrected = o.critical && end == End::left;
    f.prefactor_corrected = corrected;

    const LineFit l1 = detail::log_fit(s.x, s.y1, corrected);
    const LineFit l2 = detail::log_fit(s.x, s.y2, corrected);
    f.plain_slope_u1 = l1.slope;
    f.exponent_u1 = l1.slope;
    f.exponent_u2 = l2.slope;
    f.amplitude_u1 = detail::amplitude(s.x, s.y1, f.exponent_u1);
    f.amplitude_u2 = detail::amplitude(s.x, s.y2, f.exponent_u2);

    if (end == End::right && o.u1_subdominant) {
        const detail::TwoMode m = detail::two_mode_fit(s.x, s.y1, *o.u1_subdominant);
        f.exponent_u1 = m.mu;
        f.amplitude_u1 = m.A;
    }
    if (corrected) {
        // u = (a + d xi) e^{mu xi}: fit the prefactor with the theory exponent removed.
        auto prefactor = [&](const std::vector<double>& y, double mu) {
            std::vector<double> p(y.size());
            for (std::size_t i = 0; i < y.size(); ++i) p[i] = y[i] * std::exp(-mu * s.x[i]);
            return fit_line(s.x, p);
        };
        const double mu = 0.5 * (f.exponent_u1 + f.exponent_u2);
        const LineFit p1 = prefactor(s.y1, mu), p2 = prefactor(s.y2, mu);
        f.amplitude_u1 = p1.intercept;
        f.amplitude_u2 = p2.intercept;
        f.linear_u1 = p1.slope;
        f.linear_u2 = p2.slope;
    }
    return f;
}

/// Default windows [-0.75L, -0.4L] and [0.4L, 0.75L] about the grid centre.
inline std::pair<Window, Window> default_windows(const Grid& g) {
    const double L = g.half_width(), m = g.center();
    return {Window{m - 0.75 * L, m - 0.4 * L}, Window{m + 0.4 * L, m + 0.75 * L}};
}

inline AsymptoticFit fit_asymptotics(const wave::WaveProfile& w, const model::ScaledParams& s,
                                     std::optional<Window> left = {}, std::optional<Window> right = {}) {
    AsymptoticFit fit;
    fit.theory = theoretical_rates(s, w.c);
    const auto defaults = default_windows(w.grid);
    EndFitOptions o;
    o.critical = fit.theory.critical;
    o.limit_u1 = 1.0;
    o.limit_u2 = s.K2();
    fit.left = fit_decay_rate(w, End::left, left.value_or(defaults.first), o);
    o.u1_subdominant = fit.theory.nu_plus;
    fit.right = fit_decay_rate(w, End::right, right.value_or(defaults.second), o);
    return fit;
}

inline RateReport compare_rates(const AsymptoticFit& fit, const Thresholds& th = {}) {
    RateReport r;
    const TheoryRates& t = fit.theory;
    r.critical = t.critical;
    auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
    r.rel_err_left_u1 = rel(fit.left.exponent_u1, t.mu_minus);
    r.rel_err_left_u2 = rel(fit.left.exponent_u2, t.mu_minus);
    r.rel_err_right_u1 = rel(fit.right.exponent_u1, t.mu_plus);
    r.rel_err_right_u2 = rel(fit.right.exponent_u2, t.mu_plus);
    r.share_diff = rel(fit.right.exponent_u1, fit.right.exponent_u2);
    const double tol = t.critical ? th.critical_rel_tol : th.rel_tol;
    const double share = t.critical ? 2.0 * th.share_tol : th.share_tol;
    r.pass_left = r.rel_err_left_u1 <= tol && r.rel_err_left_u2 <= tol;
    r.pass_right = r.rel_err_right_u1 <= tol && r.rel_err_right_u2 <= tol;
    r.pass_share = r.share_diff <= share;
    const double slow = r.rel_err_left_u1;
    const double fast = rel(fit.left.exponent_u1, t.mu_minus_fast);
    r.slow_root_selected = t.critical || 5.0 * slow <= fast;
    r.signs_ok = fit.right.amplitude_u1 > 0.0 && fit.right.amplitude_u2 > 0.0 &&
                 (t.critical ? (fit.left.linear_u1 < 0.0 && fit.left.linear_u2 < 0.0)
                             : (fit.left.amplitude_u1 > 0.0 && fit.left.amplitude_u2 > 0.0));
    return r;
}

}  // namespace lvw::asymptotics
