#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lvwaves/error.hpp"
#include "lvwaves/fitting.hpp"
#include "lvwaves/grid.hpp"
#include "lvwaves/model.hpp"
#include "lvwaves/reaction.hpp"
#include "lvwaves/tridiagonal.hpp"
#include "lvwaves/wavesolver.hpp"
#include "lvwaves/weights.hpp"

namespace lvw::spectrum {

/// One branch lambda(zeta) = vertex - zeta^2 - i*advection*zeta of the essential spectrum.
struct SpectrumCurve {
    std::string label;
    double vertex = 0.0;
    double advection = 0.0;
    std::vector<double> zeta, re, im;
};

struct WeightWindow {
    double sigma1_lo = 0.0, sigma1_hi = 0.0;  ///< [lo, hi)
    double sigma2_lo = 0.0, sigma2_hi = 0.0;  ///< (lo, hi)
    double max_sampled_bound = 0.0;           ///< largest rightmost bound over a 10x10 interior sample

    bool contains(const WeightSpec& w) const {
        return w.sigma1 >= sigma1_lo && w.sigma1 < sigma1_hi && w.sigma2 > sigma2_lo && w.sigma2 < sigma2_hi;
    }
};

/// Weighted essential-spectrum vertices in the order
/// {+inf first component, +inf second, -inf first, -inf second}.
/// The zero weight gives the unweighted vertices.
inline std::array<double, 4> vertices(const model::ScaledParams& s, double c, const WeightSpec& w) {
    const double p = w.sigma1 * w.sigma1 + c * w.sigma1;
    const double m = w.sigma2 * w.sigma2 - c * w.sigma2;
    return {p - 1.0, p + s.eps1 - s.b, m + s.alpha, m - s.eps1};
}

inline double rightmost_essential_bound(const model::ScaledParams& s, double c, const WeightSpec& w) {
    const auto v = vertices(s, c, w);
    return *std::max_element(v.begin(), v.end());
}

inline std::vector<SpectrumCurve> essential_curves(const model::ScaledParams& s, double c,
                                                   std::optional<WeightSpec> weight = {}, std::size_t samples = 401,
                                                   double zeta_max = 10.0) {
    if (!(c > 0.0)) throw PreconditionError("speed must be positive");
    if (samples < 2) throw PreconditionError("need at least two zeta samples");
    const WeightSpec w = weight.value_or(WeightSpec{});
    const auto v = vertices(s, c, w);
    const std::array<double, 4> adv{2.0 * w.sigma1 + c, 2.0 * w.sigma1 + c, c - 2.0 * w.sigma2, c - 2.0 * w.sigma2};
    const std::string prefix = weight ? "weighted-" : "";
    const std::array<const char*, 4> names{"plus-u1", "plus-u2", "minus-u1", "minus-u2"};
    std::vector<SpectrumCurve> out;
    for (std::size_t k = 0; k < 4; ++k) {
        SpectrumCurve curve;
        curve.label = prefix + names[k];
        curve.vertex = v[k];
        curve.advection = adv[k];
        for (std::size_t j = 0; j < samples; ++j) {
            const double z = -zeta_max + 2.0 * zeta_max * static_cast<double>(j) / static_cast<double>(samples - 1);
            curve.zeta.push_back(z);
            curve.re.push_back(v[k] - z * z);
            curve.im.push_back(-adv[k] * z);
        }
        out.push_back(std::move(curve));
    }
    return out;
}

inline WeightWindow weight_window(const model::ScaledParams& s, double c) {
    const double disc = c * c - 4.0 * s.alpha;
    if (!(disc > 1e-10)) {
        std::ostringstream os;
        os << "weight window needs a supercritical speed (c=" << c << ", c_min=" << s.c_min << ")";
        throw PreconditionError(os.str());
    }
    WeightWindow win;
    win.sigma1_lo = 0.0;
    win.sigma1_hi = 0.5 * (-c + std::sqrt(c * c + 4.0 * (s.b - s.eps1)));
    win.sigma2_lo = 0.5 * (c - std::sqrt(disc));
    win.sigma2_hi = 0.5 * (c + std::sqrt(disc));
    win.max_sampled_bound = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < 10; ++i) {
        for (int j = 0; j < 10; ++j) {
            const WeightSpec w{win.sigma1_hi * (i + 0.5) / 10.0,
                               win.sigma2_lo + (win.sigma2_hi - win.sigma2_lo) * (j + 0.5) / 10.0};
            win.max_sampled_bound = std::max(win.max_sampled_bound, rightmost_essential_bound(s, c, w));
        }
    }
    if (!(win.max_sampled_bound < 0.0)) throw CheckFailure("window sample produced a nonnegative essential bound");
    return win;
}

struct Mat2 {
    double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;
};

/// Discrete L~ V = V'' - (2 g1 + c) V' + M V with homogeneous Dirichlet rows at both ends.
struct WeightedOperator {
    Grid grid;
    double c = 0.0;
    WeightSpec weight;
    model::ScaledParams scaled;
    std::vector<double> u1, u2;  ///< wave the operator linearizes about
    std::vector<double> g1, g2, advection;
    std::vector<Mat2> M;

    std::size_t size() const { return grid.size; }

    /// (L~ V) at interior nodes; zero at the boundary nodes.
    std::array<std::vector<double>, 2> apply(const std::vector<double>& v1, const std::vector<double>& v2) const {
        const std::size_t n = grid.size;
        const double h = grid.h;
        std::array<std::vector<double>, 2> out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double lo = 1.0 / (h * h) + advection[i] / (2.0 * h);
            const double up = 1.0 / (h * h) - advection[i] / (2.0 * h);
            const double di = -2.0 / (h * h);
            out[0][i] = lo * v1[i - 1] + di * v1[i] + up * v1[i + 1] + M[i].a11 * v1[i] + M[i].a12 * v2[i];
            out[1][i] = lo * v2[i - 1] + di * v2[i] + up * v2[i + 1] + M[i].a21 * v1[i] + M[i].a22 * v2[i];
        }
        return out;
    }
};

namespace detail {

inline WeightedOperator assemble(const Grid& grid, double c, const std::vector<double>& u1,
                                 const std::vector<double>& u2, const model::ScaledParams& s, const WeightSpec& w) {
    const wave::MonotoneSystem F(s);
    WeightedOperator op;
    op.grid = grid;
    op.c = c;
    op.weight = w;
    op.scaled = s;
    op.u1 = u1;
    op.u2 = u2;
    const std::size_t n = grid.size;
    op.g1.resize(n);
    op.g2.resize(n);
    op.advection.resize(n);
    op.M.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = grid[i];
        op.g1[i] = w.g1(x);
        op.g2[i] = w.g2(x);
        op.advection[i] = 2.0 * op.g1[i] + c;
        // Interior nodes use the stencil-average state: for quadratic F this makes the centred
        // derivative of the discrete wave an exact discrete null vector.
        double a = u1[i], b = u2[i];
        if (i > 0 && i + 1 < n) {
            a = 0.5 * (u1[i - 1] + u1[i + 1]);
            b = 0.5 * (u2[i - 1] + u2[i + 1]);
        }
        const wave::ReactionJacobian J = F.jacobian(a, b);
        const double shift = 2.0 * op.g1[i] * op.g1[i] - op.g2[i] + c * op.g1[i];
        op.M[i] = Mat2{J.a11 + shift, J.a12, J.a21, J.a22 + shift};
    }
    return op;
}

}  // namespace detail

inline WeightedOperator assemble_weighted_operator(const wave::WaveProfile& wave, const model::ScaledParams& s,
                                                   const WeightSpec& w) {
    w.validate();
    if (wave.grid.size < 5) throw PreconditionError("wave grid too small");
    return detail::assemble(wave.grid, wave.c, wave.u1, wave.u2, s, w);
}

enum class AbscissaMethod { time_evolution, eigensolve };

inline const char* to_string(AbscissaMethod m) {
    return m == AbscissaMethod::time_evolution ? "time-evolution" : "eigensolve";
}

struct AbscissaOptions {
    double T = 20.0;
    double dt = 0.01;
    int sample_every = 10;
    std::uint64_t seed = 20240601;
    std::size_t max_eig_nodes = 800;
    double min_r2 = 0.9;
};

struct SpectralAbscissaEstimate {
    AbscissaMethod method = AbscissaMethod::time_evolution;
    double value = 0.0;
    double essential_bound = 0.0;
    double r2 = std::numeric_limits<double>::quiet_NaN();  ///< time-evolution fit quality
    std::size_t nodes_used = 0;
    std::vector<std::complex<double>> outliers;  ///< eigenvalues right of the essential bound
};

/// Semi-implicit propagation of V_t = L~ V: the second-order part implicitly, M V explicitly.
class LinearPropagator {
public:
    LinearPropagator(const WeightedOperator& op, double dt) : op_(op), dt_(dt) {
        const std::size_t n = op.size();
        const double h = op.grid.h;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (std::abs(op.advection[i]) * h / 2.0 >= 1.0) throw PreconditionError("cell Peclet number >= 1");
        }
        Tridiagonal t(n - 2);
        for (std::size_t j = 0; j < n - 2; ++j) {
            const std::size_t i = j + 1;
            t.lower[j] = -dt * (1.0 / (h * h) + op.advection[i] / (2.0 * h));
            t.diag[j] = 1.0 + 2.0 * dt / (h * h);
            t.upper[j] = -dt * (1.0 / (h * h) - op.advection[i] / (2.0 * h));
        }
        lu_ = TridiagonalLU(t);
    }

    void step(std::vector<double>& v1, std::vector<double>& v2) const {
        const std::size_t n = op_.size();
        std::vector<double> r1(n - 2), r2(n - 2);
        for (std::size_t j = 0; j < n - 2; ++j) {
            const std::size_t i = j + 1;
            const Mat2& m = op_.M[i];
            r1[j] = v1[i] + dt_ * (m.a11 * v1[i] + m.a12 * v2[i]);
            r2[j] = v2[i] + dt_ * (m.a21 * v1[i] + m.a22 * v2[i]);
        }
        lu_.solve_in_place(r1);
        lu_.solve_in_place(r2);
        for (std::size_t j = 0; j < n - 2; ++j) {
            v1[j + 1] = r1[j];
            v2[j + 1] = r2[j];
        }
        v1.front() = v1.back() = v2.front() = v2.back() = 0.0;
    }

private:
    const WeightedOperator& op_;
    double dt_;
    TridiagonalLU lu_;
};

namespace detail {

inline double sup_norm(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s = std::max({s, std::abs(a[i]), std::abs(b[i])});
    return s;
}

inline SpectralAbscissaEstimate by_time_evolution(const WeightedOperator& op, const AbscissaOptions& o) {
    if (!(o.T > 0.0 && o.dt > 0.0)) throw PreconditionError("time evolution needs T > 0 and dt > 0");
    const std::size_t n = op.size();
    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v1(n), v2(n);
    for (std::size_t i = 0; i < n; ++i) {
        v1[i] = u(rng);
        v2[i] = u(rng);
    }
    v1.front() = v1.back() = v2.front() = v2.back() = 0.0;
    const LinearPropagator prop(op, o.dt);
    const long steps = std::lround(o.T / o.dt);
    std::vector<double> ts, logs;
    for (long k = 0; k <= steps; ++k) {
        if (k % o.sample_every == 0) {
            const double t = static_cast<double>(k) * o.dt;
            const double norm = sup_norm(v1, v2);
            if (!(norm > 0.0) || !std::isfinite(norm)) throw ConvergenceError("norm left the representable range", 0.0);
            if (t >= 0.5 * o.T) {
                ts.push_back(t);
                logs.push_back(std::log(norm));
            }
        }
        if (k < steps) prop.step(v1, v2);
    }
    const LineFit f = fit_line(ts, logs);
    if (!(f.r2 >= o.min_r2)) {
        std::ostringstream os;
        os << "Lyapunov fit not converged: R^2 = " << f.r2;
        throw ConvergenceError(os.str(), f.r2);
    }
    SpectralAbscissaEstimate e;
    e.method = AbscissaMethod::time_evolution;
    e.value = f.slope;
    e.r2 = f.r2;
    e.nodes_used = n;
    return e;
}

inline std::size_t coarsening_stride(std::size_t n, std::size_t max_nodes) {
    const std::size_t cells = n - 1;
    for (std::size_t s = 1; s <= cells; ++s) {
        if (cells % s == 0 && cells / s + 1 <= max_nodes) return s;
    }
    return cells;
}

inline SpectralAbscissaEstimate by_eigensolve(const WeightedOperator& fine, const AbscissaOptions& o) {
    const std::size_t stride = coarsening_stride(fine.size(), o.max_eig_nodes);
    const Grid g{fine.grid.origin, fine.grid.h * static_cast<double>(stride), (fine.size() - 1) / stride + 1};
    std::vector<double> a(g.size), b(g.size);
    for (std::size_t i = 0; i < g.size; ++i) {
        a[i] = fine.u1[i * stride];
        b[i] = fine.u2[i * stride];
    }
    const WeightedOperator op = assemble(g, fine.c, a, b, fine.scaled, fine.weight);
    const std::size_t m = g.size - 2;
    const double h = g.h;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * m, 2 * m);
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t i = k + 1;
        const double lo = 1.0 / (h * h) + op.advection[i] / (2.0 * h);
        const double up = 1.0 / (h * h) - op.advection[i] / (2.0 * h);
        for (std::size_t comp = 0; comp < 2; ++comp) {
            const Eigen::Index row = static_cast<Eigen::Index>(2 * k + comp);
            A(row, row) += -2.0 / (h * h);
            if (k > 0) A(row, row - 2) += lo;
            if (k + 1 < m) A(row, row + 2) += up;
        }
        const Eigen::Index r = static_cast<Eigen::Index>(2 * k);
        A(r, r) += op.M[i].a11;
        A(r, r + 1) += op.M[i].a12;
        A(r + 1, r) += op.M[i].a21;
        A(r + 1, r + 1) += op.M[i].a22;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
    if (es.info() != Eigen::Success) throw ConvergenceError("dense eigensolve failed", 0.0);
    SpectralAbscissaEstimate e;
    e.method = AbscissaMethod::eigensolve;
    e.nodes_used = g.size;
    e.value = -std::numeric_limits<double>::infinity();
    const double bound = rightmost_essential_bound(fine.scaled, fine.c, fine.weight);
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
        const std::complex<double> z = es.eigenvalues()[k];
        e.value = std::max(e.value, z.real());
        if (z.real() > bound) e.outliers.push_back(z);
    }
    std::sort(e.outliers.begin(), e.outliers.end(),
              [](const auto& x, const auto& y) { return x.real() > y.real() || (x.real() == y.real() && x.imag() > y.imag()); });
    return e;
}

}  // namespace detail

inline SpectralAbscissaEstimate estimate_spectral_abscissa(const WeightedOperator& op,
                                                           AbscissaMethod method = AbscissaMethod::time_evolution,
                                                           const AbscissaOptions& o = {}) {
    SpectralAbscissaEstimate e =
        method == AbscissaMethod::time_evolution ? detail::by_time_evolution(op, o) : detail::by_eigensolve(op, o);
    e.essential_bound = rightmost_essential_bound(op.scaled, op.c, op.weight);
    return e;
}

struct ZeroModeReport {
    double unweighted_residual = 0.0;  ///< sup |L U*'| over interior nodes
    double probe = 0.0;                ///< left probe coordinate
    double log_ratio_probe = 0.0;      ///< log of weighted mode magnitude at probe over value at 0
    double log_ratio_left_end = 0.0;   ///< same at the first interior node
    double growth_exponent = 0.0;      ///< fitted d/dxi of log weighted mode on [probe, probe/2]
    double expected_exponent = 0.0;    ///< -(sigma2 - mu_minus)
    bool in_window = false;
    bool mode_unbounded = false;       ///< weighted image grows towards -L
    std::optional<double> abscissa;    ///< weighted spectral abscissa estimate when requested
};

/// Translation-mode test: U*' is an unweighted null vector but not an admissible weighted one.
inline ZeroModeReport zero_eigenvalue_exclusion(const wave::WaveProfile& wave, const model::ScaledParams& s,
                                                const WeightSpec& w, std::optional<double> probe = {},
                                                bool estimate_abscissa = false) {
    w.validate();
    const WeightedOperator plain = assemble_weighted_operator(wave, s, WeightSpec{});
    const Grid& g = wave.grid;
    const std::size_t n = g.size;
    const double h = g.h;
    std::vector<double> d1(n, 0.0), d2(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        d1[i] = (wave.u1[i + 1] - wave.u1[i - 1]) / (2.0 * h);
        d2[i] = (wave.u2[i + 1] - wave.u2[i - 1]) / (2.0 * h);
    }
    const auto Ld = plain.apply(d1, d2);
    ZeroModeReport r;
    for (std::size_t i = 2; i + 2 < n; ++i) r.unweighted_residual = std::max({r.unweighted_residual, std::abs(Ld[0][i]), std::abs(Ld[1][i])});

    auto mode = [&](std::size_t i) { return w(g[i]) * std::max(std::abs(d1[i]), std::abs(d2[i])); };
    r.probe = probe.value_or(g.center() - 0.75 * g.half_width());
    const std::size_t i0 = g.nearest(0.0), ip = g.nearest(r.probe);
    r.log_ratio_probe = std::log(mode(ip)) - std::log(mode(i0));
    r.log_ratio_left_end = std::log(mode(1)) - std::log(mode(i0));

    std::vector<double> xs, ys;
    for (std::size_t i = ip; i <= g.nearest(0.5 * r.probe); ++i) {
        xs.push_back(g[i]);
        ys.push_back(std::log(mode(i)));
    }
    r.growth_exponent = fit_line(xs, ys).slope;
    const double disc = wave.c * wave.c - 4.0 * s.alpha;
    const double mu_minus = 0.5 * (wave.c - std::sqrt(std::max(disc, 0.0)));
    r.expected_exponent = -(w.sigma2 - mu_minus);
    r.mode_unbounded = r.log_ratio_probe > 0.0 && r.growth_exponent < 0.0;
    if (disc > 1e-10) r.in_window = weight_window(s, wave.c).contains(w);
    if (estimate_abscissa) {
        r.abscissa = estimate_spectral_abscissa(assemble_weighted_operator(wave, s, w)).value;
    }
    return r;
}

}  // namespace lvw::spectrum
