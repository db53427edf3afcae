#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <vector>

#include "lvwaves/error.hpp"
#include "lvwaves/fitting.hpp"
#include "lvwaves/grid.hpp"
#include "lvwaves/model.hpp"
#include "lvwaves/tridiagonal.hpp"

/// Scalar logistic fronts w'' - c w' + alpha1 w (1 - w/beta) = 0, w(-inf)=0, w(+inf)=beta.
namespace lvw::kpp {

struct KppProblem {
    double alpha1 = 0.75;  ///< f'(0)
    double beta = 1.0;     ///< right rest state
    double c = 2.0;        ///< speed

    double f(double w) const { return alpha1 * w * (1.0 - w / beta); }
    double df(double w) const { return alpha1 * (1.0 - 2.0 * w / beta); }
    double discriminant() const { return c * c - 4.0 * alpha1; }
};

struct KppProfile {
    Grid grid;
    std::vector<double> omega;
    double c = 0.0;
    double alpha1 = 0.0;
    double beta = 0.0;
    std::size_t phase_node = 0;  ///< node where omega = beta/2
    double residual = 0.0;
    int newton_iterations = 0;
};

struct KppRates {
    double mu_minus = 0.0;
    double mu_plus = 0.0;
    bool critical = false;
    // Fitted amplitudes. Non-critical: a (left), b (right). Critical: a_c + d_c*xi (left), b (right).
    double a = std::numeric_limits<double>::quiet_NaN();
    double d_c = std::numeric_limits<double>::quiet_NaN();
    double b = std::numeric_limits<double>::quiet_NaN();
};

struct SolveOptions {
    double tol = 1e-9;           ///< accepted sup residual
    int max_newton = 60;
    long phase_offset = 0;       ///< phase node = centre node + offset
    bool check_truncation = true;
    double truncation_tol = 1e-6;
    double continuation_factor = 1.05;
    int continuation_steps = 6;
};

inline double critical_tolerance() { return 1e-10; }

/// Sup norm of the discrete residual over interior nodes.
inline double residual(const KppProblem& pb, const Grid& g, std::span<const double> w) {
    const double h = g.h;
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < g.size; ++i) {
        const double r = (w[i + 1] - 2.0 * w[i] + w[i - 1]) / (h * h) - pb.c * (w[i + 1] - w[i - 1]) / (2.0 * h) +
                         pb.f(w[i]);
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

namespace detail {

inline std::vector<double> residual_vector(const KppProblem& pb, const Grid& g, std::span<const double> w,
                                           std::size_t m) {
    const std::size_t n = g.size;
    const double h = g.h;
    std::vector<double> R(n);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        R[i] = (w[i + 1] - 2.0 * w[i] + w[i - 1]) / (h * h) - pb.c * (w[i + 1] - w[i - 1]) / (2.0 * h) + pb.f(w[i]);
    }
    R[0] = w[m] - 0.5 * pb.beta;
    R[n - 1] = w[n - 1] - pb.beta;
    return R;
}

inline double sup(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

// Solves the Newton system whose row 0 pins node m, rows 1..n-2 are the linearized ODE and
// row n-1 is Dirichlet. Right of m it is a Dirichlet problem; left of m a backward recurrence,
// which is stable because both homogeneous modes decay leftwards.
inline std::vector<double> newton_step(const KppProblem& pb, const Grid& g, std::span<const double> w,
                                       std::span<const double> R, std::size_t m) {
    const std::size_t n = g.size;
    const double h = g.h;
    const double lo = 1.0 / (h * h) + pb.c / (2.0 * h);
    const double up = 1.0 / (h * h) - pb.c / (2.0 * h);
    std::vector<double> dx(n, 0.0);
    dx[m] = R[0];

    const std::size_t k = n - 1 - m;  // unknowns m+1..n-1
    Tridiagonal t(k);
    std::vector<double> rhs(k);
    for (std::size_t j = 0; j < k; ++j) {
        const std::size_t i = m + 1 + j;
        if (i == n - 1) {
            t.diag[j] = 1.0;
            rhs[j] = R[i];
            continue;
        }
        t.lower[j] = lo;
        t.diag[j] = -2.0 / (h * h) + pb.df(w[i]);
        t.upper[j] = up;
        rhs[j] = R[i];
        if (j == 0) rhs[j] -= lo * dx[m];
    }
    const std::vector<double> right = solve_tridiagonal(t, rhs);
    for (std::size_t j = 0; j < k; ++j) dx[m + 1 + j] = right[j];

    for (std::size_t i = m; i >= 1; --i) {
        const double diag = -2.0 / (h * h) + pb.df(w[i]);
        dx[i - 1] = (R[i] - diag * dx[i] - up * dx[i + 1]) / lo;
    }
    return dx;
}

inline KppProfile newton(const KppProblem& pb, const Grid& g, std::vector<double> w, std::size_t m,
                         const SolveOptions& opt) {
    const std::size_t n = g.size;
    w[n - 1] = pb.beta;
    std::vector<double> R = residual_vector(pb, g, w, m);
    double res = sup(R);
    int it = 0;
    for (; it < opt.max_newton && res > 1e-12; ++it) {
        const std::vector<double> dx = newton_step(pb, g, w, R, m);
        double lambda = 1.0;
        bool accepted = false;
        std::vector<double> trial(n);
        for (int halvings = 0; halvings < 30; ++halvings, lambda *= 0.5) {
            for (std::size_t i = 0; i < n; ++i) trial[i] = w[i] - lambda * dx[i];
            const std::vector<double> Rt = residual_vector(pb, g, trial, m);
            const double rt = sup(Rt);
            if (std::isfinite(rt) && rt < res) {
                w.swap(trial);
                R = Rt;
                res = rt;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }
    KppProfile prof;
    prof.grid = g;
    prof.omega = std::move(w);
    prof.c = pb.c;
    prof.alpha1 = pb.alpha1;
    prof.beta = pb.beta;
    prof.phase_node = m;
    prof.residual = residual(pb, g, prof.omega);
    prof.newton_iterations = it;
    if (!(prof.residual < opt.tol)) {
        std::ostringstream os;
        os << "KPP Newton solve did not converge (c=" << pb.c << ", residual " << prof.residual << ")";
        throw ConvergenceError(os.str(), prof.residual);
    }
    return prof;
}

}  // namespace detail

/// Closed-form decay exponents at both ends; beta1 = |f'(beta)|.
inline KppRates kpp_rates(const KppProblem& pb, double beta1) {
    const double disc = pb.discriminant();
    if (disc < -critical_tolerance()) throw PreconditionError("speed below 2*sqrt(alpha1)");
    KppRates r;
    r.critical = std::abs(pb.c - 2.0 * std::sqrt(pb.alpha1)) < critical_tolerance();
    r.mu_minus = r.critical ? std::sqrt(pb.alpha1) : 0.5 * (pb.c - std::sqrt(std::max(disc, 0.0)));
    r.mu_plus = 0.5 * (pb.c - std::sqrt(pb.c * pb.c + 4.0 * beta1));
    return r;
}

/// Newton solve on grid g with the phase pinned at the centre node (plus offset).
inline KppProfile solve_kpp(const KppProblem& pb, const Grid& g, const SolveOptions& opt = {}) {
    if (!(pb.alpha1 > 0.0 && pb.beta > 0.0)) throw PreconditionError("KPP needs alpha1 > 0 and beta > 0");
    if (pb.discriminant() < -critical_tolerance()) {
        std::ostringstream os;
        os << "speed c=" << pb.c << " is below the minimal speed " << 2.0 * std::sqrt(pb.alpha1);
        throw PreconditionError(os.str());
    }
    if (2.0 * g.h * pb.c >= 4.0) throw PreconditionError("grid too coarse: need c*h/2 < 1");
    const long centre = static_cast<long>(g.size / 2) + opt.phase_offset;
    if (centre < 2 || centre > static_cast<long>(g.size) - 3) throw PreconditionError("phase node outside grid");
    const std::size_t m = static_cast<std::size_t>(centre);

    const double mu = kpp_rates(pb, pb.alpha1).mu_minus;
    const double left_extent = g[m] - g.front();
    if (opt.check_truncation && !(std::exp(-mu * left_extent) < opt.truncation_tol)) {
        std::ostringstream os;
        os << "domain too short: exp(-mu_minus*L) = " << std::exp(-mu * left_extent) << " >= "
           << opt.truncation_tol;
        throw PreconditionError(os.str());
    }

    auto sigmoid = [&](const KppProblem& p) {
        std::vector<double> w(g.size);
        const double s = std::sqrt(p.alpha1);
        for (std::size_t i = 0; i < g.size; ++i) w[i] = p.beta / (1.0 + std::exp(-(g[i] - g[m]) * s));
        return w;
    };

    const double cmin = 2.0 * std::sqrt(pb.alpha1);
    const double c_start = opt.continuation_factor * cmin;
    if (pb.c >= c_start) return detail::newton(pb, g, sigmoid(pb), m, opt);

    // Near the double root the Newton basin shrinks; walk down from c_start.
    KppProblem step = pb;
    step.c = c_start;
    KppProfile prof = detail::newton(step, g, sigmoid(step), m, opt);
    for (int s = 1; s <= opt.continuation_steps; ++s) {
        step.c = c_start + (pb.c - c_start) * static_cast<double>(s) / opt.continuation_steps;
        prof = detail::newton(step, g, prof.omega, m, opt);
    }
    prof.c = pb.c;
    return prof;
}

/// Lower-solution front Z = scale*Y with scale = alpha/(1 - l r/(1+eps2)).
inline KppProfile lower_from_upper(const KppProfile& Y, double l, const model::ScaledParams& s) {
    const double lmax = s.l_max();
    if (!(l > 0.0 && l <= lmax + 1e-12)) {
        std::ostringstream os;
        os << "lower-solution parameter l=" << l << " outside (0, " << lmax << "]";
        throw PreconditionError(os.str());
    }
    const double scale = s.alpha / (1.0 - l * s.r / (1.0 + s.eps2));
    KppProfile Z = Y;
    for (double& w : Z.omega) w *= scale;
    Z.beta = Y.beta * scale;
    Z.residual = residual(KppProblem{Z.alpha1, Z.beta, Z.c}, Z.grid, Z.omega);
    return Z;
}

/// Least-squares amplitudes on the given windows, exponents taken from `rates`.
inline KppRates fit_kpp_amplitudes(const KppProfile& prof, KppRates rates, std::pair<double, double> left,
                                   std::pair<double, double> right) {
    std::vector<double> xl, yl, xr, yr;
    for (std::size_t i = 0; i < prof.grid.size; ++i) {
        const double x = prof.grid[i];
        if (x >= left.first && x <= left.second) {
            xl.push_back(x);
            yl.push_back(prof.omega[i] * std::exp(-rates.mu_minus * x));
        }
        if (x >= right.first && x <= right.second) {
            xr.push_back(x);
            yr.push_back((prof.beta - prof.omega[i]) * std::exp(-rates.mu_plus * x));
        }
    }
    if (xl.size() < 2 || xr.size() < 2) throw PreconditionError("amplitude windows contain too few nodes");
    if (rates.critical) {
        const LineFit f = fit_line(xl, yl);
        rates.a = f.intercept;
        rates.d_c = f.slope;
    } else {
        double s = 0.0;
        for (double y : yl) s += y;
        rates.a = s / static_cast<double>(yl.size());
    }
    double s = 0.0;
    for (double y : yr) s += y;
    rates.b = s / static_cast<double>(yr.size());
    return rates;
}

}  // namespace lvw::kpp
