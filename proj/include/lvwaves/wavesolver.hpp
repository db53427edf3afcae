#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "lvwaves/error.hpp"
#include "lvwaves/fitting.hpp"
#include "lvwaves/grid.hpp"
#include "lvwaves/interpolation.hpp"
#include "lvwaves/kpp.hpp"
#include "lvwaves/model.hpp"
#include "lvwaves/reaction.hpp"
#include "lvwaves/tridiagonal.hpp"

namespace lvw::wave {

/// Upper pair (Y, K2*Y) and lower pair (Z, l*K2*Z) on a common grid.
struct OrderedPair {
    Grid grid;
    std::vector<double> upper1, upper2, lower1, lower2;
    double l = 0.0;
    double c = 0.0;
    double lower_scale = 0.0;  ///< Z = lower_scale * Y
};

/// Extreme residuals of the four differential inequalities.
/// Upper residuals must be >= -tol, lower residuals <= tol.
struct PairCertificate {
    double min_upper1 = 0.0, min_upper2 = 0.0;
    double max_lower1 = 0.0, max_lower2 = 0.0;
    std::size_t node_upper1 = 0, node_upper2 = 0, node_lower1 = 0, node_lower2 = 0;
    double max_order_gap = 0.0;  ///< max over nodes of lower - upper (should be <= 0)

    bool holds(double tol) const {
        return min_upper1 >= -tol && min_upper2 >= -tol && max_lower1 <= tol && max_lower2 <= tol &&
               max_order_gap <= tol;
    }
};

struct PairOptions {
    std::optional<double> l;  ///< defaults to the largest admissible value
    long phase_offset = 0;     ///< shifts the upper front by whole nodes
    double certificate_tol = 1e-9;
    kpp::SolveOptions kpp;
};

struct WaveProfile {
    Grid grid;  ///< relabelled so that u1(0) = 1/2
    std::vector<double> u1, u2;
    double c = 0.0;
    std::size_t iterates_used = 0;
    double final_delta = 0.0;
    double residual = 0.0;
    double phase_shift = 0.0;  ///< coordinate of u1 = 1/2 before relabelling
};

enum class Start { upper, lower };

struct IterateOptions {
    double tol = 1e-10;
    std::size_t max_iters = 200000;
    Start start = Start::upper;
    double order_slack = 1e-13;  ///< rounding allowance for ordering checks
};

enum class SpeedClassKind { subcritical, critical, supercritical };

struct SpeedClass {
    double c = 0.0;
    SpeedClassKind kind = SpeedClassKind::supercritical;
    double discriminant = 0.0;
};

inline const char* to_string(SpeedClassKind k) {
    switch (k) {
        case SpeedClassKind::subcritical: return "Subcritical";
        case SpeedClassKind::critical: return "Critical";
        case SpeedClassKind::supercritical: return "Supercritical";
    }
    return "?";
}

/// Sign of c^2 - 4 alpha with a 1e-10 band around zero. `speed_tol` widens the critical band
/// to |c - c_min| <= speed_tol, for speeds known only to a few decimals.
inline SpeedClass classify_speed(const model::ScaledParams& s, double c, double speed_tol = 0.0) {
    if (!(c > 0.0)) throw PreconditionError("wave speed must be positive");
    SpeedClass out{c, SpeedClassKind::supercritical, c * c - 4.0 * s.alpha};
    if (std::abs(out.discriminant) <= 1e-10 || std::abs(c - s.c_min) <= speed_tol) {
        out.kind = SpeedClassKind::critical;
    } else if (out.discriminant < 0.0) {
        out.kind = SpeedClassKind::subcritical;
    }
    return out;
}

namespace detail {

inline double n_operator(std::span<const double> u, std::size_t i, double h, double c) {
    return -(u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h) + c * (u[i + 1] - u[i - 1]) / (2.0 * h);
}

}  // namespace detail

/// Evaluates the four inequalities node-wise with the worst-case partner component.
inline PairCertificate certify_pair(const OrderedPair& p, const model::ScaledParams& s) {
    const MonotoneSystem F(s);
    const double h = p.grid.h;
    PairCertificate cert;
    cert.min_upper1 = cert.min_upper2 = std::numeric_limits<double>::infinity();
    cert.max_lower1 = cert.max_lower2 = -std::numeric_limits<double>::infinity();
    cert.max_order_gap = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < p.grid.size; ++i) {
        cert.max_order_gap = std::max({cert.max_order_gap, p.lower1[i] - p.upper1[i], p.lower2[i] - p.upper2[i]});
    }
    for (std::size_t i = 1; i + 1 < p.grid.size; ++i) {
        const auto fu = F(p.upper1[i], p.upper2[i]);
        const auto fl = F(p.lower1[i], p.lower2[i]);
        const double u1 = detail::n_operator(p.upper1, i, h, p.c) - fu[0];
        const double u2 = detail::n_operator(p.upper2, i, h, p.c) - fu[1];
        const double l1 = detail::n_operator(p.lower1, i, h, p.c) - fl[0];
        const double l2 = detail::n_operator(p.lower2, i, h, p.c) - fl[1];
        if (u1 < cert.min_upper1) { cert.min_upper1 = u1; cert.node_upper1 = i; }
        if (u2 < cert.min_upper2) { cert.min_upper2 = u2; cert.node_upper2 = i; }
        if (l1 > cert.max_lower1) { cert.max_lower1 = l1; cert.node_lower1 = i; }
        if (l2 > cert.max_lower2) { cert.max_lower2 = l2; cert.node_lower2 = i; }
    }
    return cert;
}

/// Upper/lower pair from the logistic front Y at speed c.
inline OrderedPair build_ordered_pair(const model::ScaledParams& s, double c, const Grid& grid,
                                      const PairOptions& opt = {}) {
    const double l = opt.l.value_or(s.l_max());
    kpp::SolveOptions kopt = opt.kpp;
    kopt.phase_offset = opt.phase_offset;
    const kpp::KppProfile Y = kpp::solve_kpp(kpp::KppProblem{s.alpha, 1.0, c}, grid, kopt);
    const kpp::KppProfile Z = kpp::lower_from_upper(Y, l, s);

    OrderedPair p;
    p.grid = grid;
    p.l = l;
    p.c = c;
    p.lower_scale = Z.beta;
    const double K2 = s.K2();
    p.upper1 = Y.omega;
    p.lower1 = Z.omega;
    p.upper2.resize(grid.size);
    p.lower2.resize(grid.size);
    for (std::size_t i = 0; i < grid.size; ++i) {
        p.upper2[i] = K2 * Y.omega[i];
        p.lower2[i] = l * K2 * Z.omega[i];
    }

    const PairCertificate cert = certify_pair(p, s);
    if (!cert.holds(opt.certificate_tol)) {
        std::ostringstream os;
        os << "upper/lower inequalities violated (grid too coarse?): upper1 " << cert.min_upper1 << " at node "
           << cert.node_upper1 << ", upper2 " << cert.min_upper2 << " at node " << cert.node_upper2
           << ", lower1 " << cert.max_lower1 << " at node " << cert.node_lower1 << ", lower2 "
           << cert.max_lower2 << " at node " << cert.node_lower2 << ", order gap " << cert.max_order_gap;
        throw CheckFailure(os.str());
    }
    return p;
}

/// Sup norm of the discrete travelling-wave residual u'' - c u' + F(u) over interior nodes.
inline double wave_residual(const Grid& g, std::span<const double> u1, std::span<const double> u2, double c,
                            const model::ScaledParams& s) {
    const MonotoneSystem F(s);
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < g.size; ++i) {
        const auto f = F(u1[i], u2[i]);
        worst = std::max({worst, std::abs(-detail::n_operator(u1, i, g.h, c) + f[0]),
                          std::abs(-detail::n_operator(u2, i, g.h, c) + f[1])});
    }
    return worst;
}

/// Monotone iteration between the pair: each sweep solves
/// -w'' + c w' + P w = P u^n + F(u^n) per component with Dirichlet data from the upper pair.
inline WaveProfile monotone_iterate(const OrderedPair& pair, const model::ScaledParams& s,
                                    const IterateOptions& opt = {}) {
    const Grid& g = pair.grid;
    const std::size_t n = g.size;
    const double h = g.h, c = pair.c;
    if (c * h / 2.0 >= 1.0) throw PreconditionError("grid too coarse for the iteration: need c*h/2 < 1");
    const MonotoneSystem F(s);
    const double P = F.penalty();

    const double lo = -1.0 / (h * h) - c / (2.0 * h);
    const double up = -1.0 / (h * h) + c / (2.0 * h);
    Tridiagonal m(n - 2);
    for (std::size_t j = 0; j < n - 2; ++j) {
        m.lower[j] = lo;
        m.diag[j] = 2.0 / (h * h) + P;
        m.upper[j] = up;
    }
    const TridiagonalLU lu(m);

    const bool from_upper = opt.start == Start::upper;
    std::vector<double> u1 = from_upper ? pair.upper1 : pair.lower1;
    std::vector<double> u2 = from_upper ? pair.upper2 : pair.lower2;
    u1.front() = pair.upper1.front();
    u1.back() = pair.upper1.back();
    u2.front() = pair.upper2.front();
    u2.back() = pair.upper2.back();

    std::vector<double> r1(n - 2), r2(n - 2);
    double delta = std::numeric_limits<double>::infinity();
    std::size_t it = 0;
    const double slack = opt.order_slack;
    for (; it < opt.max_iters && delta >= opt.tol; ++it) {
        for (std::size_t j = 0; j < n - 2; ++j) {
            const std::size_t i = j + 1;
            const auto f = F(u1[i], u2[i]);
            const ReactionJacobian jac = F.jacobian(u1[i], u2[i]);
            if (!jac.cooperative(1e-12)) {
                throw CheckFailure("iterate left the cooperative region at node " + std::to_string(i));
            }
            r1[j] = P * u1[i] + f[0];
            r2[j] = P * u2[i] + f[1];
        }
        r1.front() -= lo * u1.front();
        r1.back() -= up * u1.back();
        r2.front() -= lo * u2.front();
        r2.back() -= up * u2.back();
        lu.solve_in_place(r1);
        lu.solve_in_place(r2);

        delta = 0.0;
        for (std::size_t j = 0; j < n - 2; ++j) {
            const std::size_t i = j + 1;
            const double d1 = r1[j] - u1[i], d2 = r2[j] - u2[i];
            const bool ordered = from_upper ? (d1 <= slack && d2 <= slack) : (d1 >= -slack && d2 >= -slack);
            if (!ordered) {
                std::ostringstream os;
                os << "iterates lost monotonicity at sweep " << it << ", node " << i << " (changes " << d1 << ", "
                   << d2 << "); penalty constant too small";
                throw CheckFailure(os.str());
            }
            if (r1[j] < pair.lower1[i] - slack || r2[j] < pair.lower2[i] - slack ||
                r1[j] > pair.upper1[i] + slack || r2[j] > pair.upper2[i] + slack) {
                throw CheckFailure("iterate left the ordered interval at node " + std::to_string(i));
            }
            delta = std::max({delta, std::abs(d1), std::abs(d2)});
            u1[i] = r1[j];
            u2[i] = r2[j];
        }
    }
    if (delta >= opt.tol) {
        std::ostringstream os;
        os << "monotone iteration reached max_iters=" << opt.max_iters << " with update " << delta;
        throw ConvergenceError(os.str(), delta);
    }

    WaveProfile w;
    w.c = c;
    w.iterates_used = it;
    w.final_delta = delta;
    w.residual = wave_residual(g, u1, u2, c, s);
    if (!(w.residual < 10.0 * opt.tol)) {
        std::ostringstream os;
        os << "converged iterate has residual " << w.residual << " >= 10*tol";
        throw CheckFailure(os.str());
    }
    w.phase_shift = crossing(g, u1, 0.5);
    w.grid = g.relabelled(w.phase_shift);
    w.u1 = std::move(u1);
    w.u2 = std::move(u2);
    return w;
}

/// Convenience: pair + iteration with default options.
inline WaveProfile solve_wave(const model::ScaledParams& s, double c, const Grid& grid,
                              const PairOptions& popt = {}, const IterateOptions& iopt = {}) {
    const SpeedClass cls = classify_speed(s, c);
    if (cls.kind == SpeedClassKind::subcritical) {
        std::ostringstream os;
        os << "no monotone wave for subcritical speed c=" << c << " (c_min=" << s.c_min << ")";
        throw PreconditionError(os.str());
    }
    return monotone_iterate(build_ordered_pair(s, c, grid, popt), s, iopt);
}

struct MonotonicityReport {
    double min_interior_step = 0.0;        ///< min forward difference away from the ends
    std::vector<std::size_t> flagged;      ///< non-increasing steps within `edge` of either end
    bool strict() const { return min_interior_step > 0.0; }
};

/// Strict monotonicity check: steps within `edge` of the domain ends are only flagged.
inline MonotonicityReport monotonicity(const WaveProfile& w, double edge = 5.0) {
    MonotonicityReport r;
    r.min_interior_step = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < w.grid.size; ++i) {
        const double step = std::min(w.u1[i + 1] - w.u1[i], w.u2[i + 1] - w.u2[i]);
        const bool near_edge = w.grid[i] < w.grid.front() + edge || w.grid[i + 1] > w.grid.back() - edge;
        if (near_edge) {
            if (step <= 0.0) r.flagged.push_back(i);
        } else {
            r.min_interior_step = std::min(r.min_interior_step, step);
        }
    }
    return r;
}

struct Alignment {
    double theta = 0.0;     ///< w1(xi + theta) ~ w2(xi)
    double sup_diff = 0.0;
};

/// Sup-norm distance between w1 shifted by theta and w2, over w2 nodes inside w1's domain.
/// `edge` excludes points within that distance of either domain's ends (Dirichlet layers).
inline double shifted_distance(const WaveProfile& w1, const WaveProfile& w2, double theta, double edge = 0.0) {
    const double lo = w1.grid.front() + std::max(edge, 3.0 * w1.grid.h);
    const double hi = w1.grid.back() - std::max(edge, 3.0 * w1.grid.h);
    double worst = 0.0;
    std::size_t used = 0;
    for (std::size_t j = 0; j < w2.grid.size; ++j) {
        const double x = w2.grid[j] + theta;
        if (x < lo || x > hi) continue;
        if (w2.grid[j] < w2.grid.front() + edge || w2.grid[j] > w2.grid.back() - edge) continue;
        ++used;
        worst = std::max({worst, std::abs(interpolate(w1.grid, w1.u1, x) - w2.u1[j]),
                          std::abs(interpolate(w1.grid, w1.u2, x) - w2.u2[j])});
    }
    if (used == 0) return std::numeric_limits<double>::infinity();
    return worst;
}

/// Optimal translation between two waves (golden section around the phase difference).
inline Alignment align_profiles(const WaveProfile& w1, const WaveProfile& w2, double edge = 0.0,
                                double bracket = 0.5) {
    if (!same_spacing(w1.grid, w2.grid)) throw PreconditionError("profiles live on grids with different spacing");
    const double theta0 = crossing(w1.grid, w1.u1, 0.5) - crossing(w2.grid, w2.u1, 0.5);
    auto D = [&](double t) { return shifted_distance(w1, w2, t, edge); };
    Alignment a;
    a.theta = golden_minimize(D, theta0 - bracket, theta0 + bracket, 1e-11);
    a.sup_diff = D(a.theta);
    return a;
}

}  // namespace lvw::wave
