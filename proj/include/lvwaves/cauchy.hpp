#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "lvwaves/error.hpp"
#include "lvwaves/fitting.hpp"
#include "lvwaves/grid.hpp"
#include "lvwaves/model.hpp"
#include "lvwaves/reaction.hpp"
#include "lvwaves/spectrum.hpp"
#include "lvwaves/tridiagonal.hpp"
#include "lvwaves/wavesolver.hpp"
#include "lvwaves/weights.hpp"

namespace lvw::cauchy {

enum class Frame { physical, moving };

struct Field {
    Grid grid;
    std::vector<double> u, v;
    double t = 0.0;
    Frame frame = Frame::physical;
    double speed = 0.0;
};

/// U_t = d U_xx - a U_x + R(U) with Dirichlet values at both ends.
struct StepParams {
    double diffusion = 1.0;
    double advection = 0.0;
    model::StatePair left{}, right{};
    double blowup_bound = std::numeric_limits<double>::infinity();
};

/// Implicit diffusion-advection, explicit reaction. `Reaction` is called as
/// r(i, u, v) -> std::array<double, 2> so it may depend on the node.
template <class Reaction>
class ImexStepper {
public:
    ImexStepper(const Grid& g, const StepParams& p, double dt, Reaction r)
        : grid_(g), p_(p), dt_(dt), reaction_(std::move(r)) {
        if (!(dt > 0.0)) throw PreconditionError("time step must be positive");
        if (!(p.diffusion > 0.0)) throw PreconditionError("diffusion must be positive");
        if (g.size < 3) throw PreconditionError("grid needs at least three nodes");
        const double h = g.h;
        if (std::abs(p.advection) * h / (2.0 * p.diffusion) >= 1.0) {
            throw PreconditionError("cell Peclet number h*c/(2d) must be < 1");
        }
        lo_ = -dt * (p.diffusion / (h * h) + p.advection / (2.0 * h));
        up_ = -dt * (p.diffusion / (h * h) - p.advection / (2.0 * h));
        Tridiagonal t(g.size - 2);
        for (std::size_t j = 0; j < g.size - 2; ++j) {
            t.lower[j] = lo_;
            t.diag[j] = 1.0 + 2.0 * dt * p.diffusion / (h * h);
            t.upper[j] = up_;
        }
        lu_ = TridiagonalLU(t);
        ru_.resize(g.size - 2);
        rv_.resize(g.size - 2);
    }

    double dt() const { return dt_; }

    void step(Field& f) {
        const std::size_t n = grid_.size;
        for (std::size_t j = 0; j < n - 2; ++j) {
            const std::size_t i = j + 1;
            const std::array<double, 2> r = reaction_(i, f.u[i], f.v[i]);
            ru_[j] = f.u[i] + dt_ * r[0];
            rv_[j] = f.v[i] + dt_ * r[1];
        }
        ru_.front() -= lo_ * p_.left.first;
        rv_.front() -= lo_ * p_.left.second;
        ru_.back() -= up_ * p_.right.first;
        rv_.back() -= up_ * p_.right.second;
        lu_.solve_in_place(ru_);
        lu_.solve_in_place(rv_);
        for (std::size_t j = 0; j < n - 2; ++j) {
            f.u[j + 1] = ru_[j];
            f.v[j + 1] = rv_[j];
        }
        f.u.front() = p_.left.first;
        f.v.front() = p_.left.second;
        f.u.back() = p_.right.first;
        f.v.back() = p_.right.second;
        f.t += dt_;
        for (std::size_t i = 0; i < n; ++i) {
            if (!(std::abs(f.u[i]) <= p_.blowup_bound && std::abs(f.v[i]) <= p_.blowup_bound)) {
                std::ostringstream os;
                os << "blow-up at t=" << f.t << ", node " << i << " (x=" << grid_[i] << "): (" << f.u[i] << ", "
                   << f.v[i] << ") exceeds " << p_.blowup_bound;
                throw CheckFailure(os.str());
            }
        }
    }

private:
    Grid grid_;
    StepParams p_;
    double dt_;
    Reaction reaction_;
    double lo_ = 0.0, up_ = 0.0;
    TridiagonalLU lu_;
    std::vector<double> ru_, rv_;
};

/// One step; prefer ImexStepper for repeated steps (it factors the matrix once).
template <class Reaction>
Field step_imex(const Field& f, const StepParams& p, double dt, Reaction r) {
    Field out = f;
    ImexStepper<Reaction> s(f.grid, p, dt, std::move(r));
    s.step(out);
    return out;
}

/// Reaction of the physical competition system.
inline auto physical_reaction(const model::PhysicalParams& p) {
    return [p](std::size_t, double u, double v) {
        return std::array<double, 2>{u * (p.a1 - p.b1 * u - p.c1 * v), v * (p.a2 - p.b2 * u - p.c2 * v)};
    };
}

/// Perturbation reaction F(U* + V) - F(U*) about a wave.
inline auto perturbation_reaction(const wave::WaveProfile& w, const model::ScaledParams& s) {
    return [F = wave::MonotoneSystem(s), &w](std::size_t i, double a, double b) {
        const auto full = F(w.u1[i] + a, w.u2[i] + b);
        const auto base = F(w.u1[i], w.u2[i]);
        return std::array<double, 2>{full[0] - base[0], full[1] - base[1]};
    };
}

struct SimulationTrace {
    std::vector<double> times, sup_norm, weighted_norm, envelope;  ///< unused series stay empty
    double fitted_b = std::numeric_limits<double>::quiet_NaN();
    double fitted_M = std::numeric_limits<double>::quiet_NaN();
    double fit_r2 = std::numeric_limits<double>::quiet_NaN();
};

/// Least-squares fit log(norm) = log M - b t over samples with t >= t_from.
inline void fit_exponential(SimulationTrace& tr, const std::vector<double>& norms, double t_from) {
    std::vector<double> x, y;
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        if (tr.times[k] + 1e-12 < t_from || !(norms[k] > 0.0)) continue;
        x.push_back(tr.times[k]);
        y.push_back(std::log(norms[k]));
    }
    if (x.size() < 2) return;
    const LineFit f = fit_line(x, y);
    tr.fitted_b = -f.slope;
    tr.fitted_M = std::exp(f.intercept);
    tr.fit_r2 = f.r2;
}

using Profile = std::function<double(double)>;

struct PhysicalRunOptions {
    double L = 100.0;
    double h = 0.1;
    double dt = 0.01;
    int sample_every = 10;
};

// ---------------------------------------------------------------- attraction

struct AttractionResult {
    SimulationTrace trace;   ///< sup_norm = sup max(|u - a1/b1|, |v|), envelope = rho(t)
    double max_violation = 0.0;
    double final_sup_u = 0.0;  ///< sup |u - a1/b1| at T_end
    double final_envelope = 0.0;
    Field final_field;
    bool passed = false;
};

struct AttractionOptions : PhysicalRunOptions {
    Profile u0 = [](double x) { return 2.0 - 0.5 * std::pow(std::cos(x / 10.0), 2); };
    Profile v0 = [](double x) { return 0.25 * std::abs(std::sin(x / 10.0)); };
    double tolerance = 1e-6;
};

/// Simulates the physical system and checks the attraction sandwich at every step.
inline AttractionResult verify_attraction(const model::PhysicalParams& p, double rho0, double A, double T_end,
                                          const AttractionOptions& o = {}) {
    const model::StabilityConstants k = model::stability_constants(p);
    if (!(A > 0.0)) throw PreconditionError("attraction constant A must be positive");
    if (!(T_end >= 0.0)) throw PreconditionError("T_end must be nonnegative");
    const double ueq = p.a1 / p.b1;
    auto rho = [&](double t) { return model::rho_envelope(k, rho0, t, model::EnvelopeKind::attraction); };

    Field f;
    f.grid = Grid::symmetric(o.L, o.h);
    f.u.resize(f.grid.size);
    f.v.resize(f.grid.size);
    for (std::size_t i = 0; i < f.grid.size; ++i) {
        f.u[i] = o.u0(f.grid[i]);
        f.v[i] = o.v0(f.grid[i]);
    }
    f.u.front() = f.u.back() = ueq;
    f.v.front() = f.v.back() = 0.0;

    auto violation = [&](const Field& g, double r) {
        double worst = 0.0;
        for (std::size_t i = 0; i < g.grid.size; ++i) {
            worst = std::max({worst, (ueq - r) - g.u[i], g.u[i] - (ueq + A * r), -g.v[i], g.v[i] - k.B * r});
        }
        return worst;
    };
    if (violation(f, rho0) > 0.0) {
        std::ostringstream os;
        os << "initial data outside the t=0 sandwich (excess " << violation(f, rho0) << ")";
        throw PreconditionError(os.str());
    }

    StepParams sp;
    sp.diffusion = p.d;
    sp.left = sp.right = {ueq, 0.0};
    sp.blowup_bound = 10.0 * (ueq + A * rho0 + 1.0);
    ImexStepper stepper(f.grid, sp, o.dt, physical_reaction(p));

    AttractionResult res;
    auto record = [&](const Field& g) {
        double s = 0.0;
        for (std::size_t i = 0; i < g.grid.size; ++i) s = std::max({s, std::abs(g.u[i] - ueq), std::abs(g.v[i])});
        res.trace.times.push_back(g.t);
        res.trace.sup_norm.push_back(s);
        res.trace.envelope.push_back(rho(g.t));
    };
    const long steps = std::lround(T_end / o.dt);
    record(f);
    for (long n = 1; n <= steps; ++n) {
        stepper.step(f);
        res.max_violation = std::max(res.max_violation, violation(f, rho(f.t)));
        if (n % o.sample_every == 0 || n == steps) record(f);
    }
    fit_exponential(res.trace, res.trace.sup_norm, 0.5 * T_end);
    for (std::size_t i = 0; i < f.grid.size; ++i) res.final_sup_u = std::max(res.final_sup_u, std::abs(f.u[i] - ueq));
    res.final_envelope = rho(f.t);
    res.final_field = std::move(f);
    res.passed = res.max_violation <= o.tolerance;
    return res;
}

// --------------------------------------------------------------- instability

struct InstabilityResult {
    SimulationTrace trace;  ///< sup_norm = sup max(|u - a1/b1|, |v|), envelope = rho(t)
    double min_u = 0.0, max_v = 0.0;
    double bound_u = 0.0, bound_v = 0.0;  ///< A gamma/delta and a2/c2 - gamma/delta
    double max_sandwich_violation = 0.0;  ///< of A rho(t) <= u, v <= a2/c2 - rho(t)
    double slack = 0.05;
    Field final_field;
    bool passed = false;
};

struct InstabilityOptions : PhysicalRunOptions {
    Profile u0;  ///< defaults to eps (1.5 + 0.5 cos(x/10))
    Profile v0;  ///< defaults to (a2/c2 - eps)(0.75 + 0.25 sin(x/10))
    double slack = 0.05;
    double tolerance = 1e-6;
};

inline InstabilityResult verify_instability_estimates(const model::PhysicalParams& p, double eps, double T_end,
                                                      const InstabilityOptions& o = {}) {
    const model::StabilityConstants k = model::stability_constants(p);
    const double cap = std::min(k.A * k.gamma / k.delta, k.gamma / k.delta);
    if (!(eps > 0.0 && eps < cap)) {
        std::ostringstream os;
        os << "eps=" << eps << " outside (0, " << cap << ")";
        throw PreconditionError(os.str());
    }
    const double vmax = p.a2 / p.c2;
    const Profile u0 = o.u0 ? o.u0 : Profile([eps](double x) { return eps * (1.5 + 0.5 * std::cos(x / 10.0)); });
    const Profile v0 =
        o.v0 ? o.v0 : Profile([eps, vmax](double x) { return (vmax - eps) * (0.75 + 0.25 * std::sin(x / 10.0)); });
    const double rho0 = std::min(eps / k.A, eps);
    auto rho = [&](double t) { return model::rho_envelope(k, rho0, t, model::EnvelopeKind::instability); };

    Field f;
    f.grid = Grid::symmetric(o.L, o.h);
    f.u.resize(f.grid.size);
    f.v.resize(f.grid.size);
    const double ueq = p.a1 / p.b1;
    for (std::size_t i = 0; i < f.grid.size; ++i) {
        f.u[i] = u0(f.grid[i]);
        f.v[i] = v0(f.grid[i]);
        if (f.u[i] < eps || f.v[i] < 0.0 || f.v[i] > vmax - eps) {
            throw PreconditionError("initial data violate u0 >= eps, 0 <= v0 <= a2/c2 - eps at x=" +
                                    std::to_string(f.grid[i]));
        }
    }
    f.u.front() = f.u.back() = ueq;
    f.v.front() = f.v.back() = 0.0;

    StepParams sp;
    sp.diffusion = p.d;
    sp.left = sp.right = {ueq, 0.0};
    sp.blowup_bound = 10.0 * std::max({ueq, vmax, 2.0 * eps, 1.0});
    ImexStepper stepper(f.grid, sp, o.dt, physical_reaction(p));

    InstabilityResult res;
    res.slack = o.slack;
    auto record = [&](const Field& g) {
        double s = 0.0;
        for (std::size_t i = 0; i < g.grid.size; ++i) s = std::max({s, std::abs(g.u[i] - ueq), std::abs(g.v[i])});
        res.trace.times.push_back(g.t);
        res.trace.sup_norm.push_back(s);
        res.trace.envelope.push_back(rho(g.t));
    };
    auto violation = [&](const Field& g, double r) {
        double worst = 0.0;
        for (std::size_t i = 0; i < g.grid.size; ++i) worst = std::max({worst, k.A * r - g.u[i], g.v[i] - (vmax - r)});
        return worst;
    };
    const long steps = std::lround(T_end / o.dt);
    record(f);
    for (long n = 1; n <= steps; ++n) {
        stepper.step(f);
        res.max_sandwich_violation = std::max(res.max_sandwich_violation, violation(f, rho(f.t)));
        if (n % o.sample_every == 0 || n == steps) record(f);
    }
    res.min_u = *std::min_element(f.u.begin(), f.u.end());
    res.max_v = *std::max_element(f.v.begin(), f.v.end());
    res.bound_u = k.A * k.gamma / k.delta;
    res.bound_v = vmax - k.gamma / k.delta;
    res.final_field = std::move(f);
    res.passed = res.min_u >= res.bound_u - o.slack && res.max_v <= res.bound_v + o.slack &&
                 res.max_sandwich_violation <= o.tolerance;
    return res;
}

// ------------------------------------------------------------ moving frame

/// Initial perturbation V0(xi) of the wave.
using Perturbation = std::function<std::array<double, 2>(double)>;

inline Perturbation sech_perturbation(double amplitude) {
    return [amplitude](double x) {
        const double s = amplitude / std::cosh(x);
        return std::array<double, 2>{s, s};
    };
}

/// Gaussian bump amplitude*exp(-((x-centre)/width)^2) on one component (0 or 1).
inline Perturbation bump_perturbation(double centre, double width, double amplitude, int component = 0) {
    return [=](double x) {
        const double z = (x - centre) / width;
        const double b = amplitude * std::exp(-z * z);
        return component == 0 ? std::array<double, 2>{b, 0.0} : std::array<double, 2>{0.0, b};
    };
}

struct MovingRunOptions {
    double dt = 0.01;
    int sample_every = 10;
};

namespace detail {

struct PerturbationRun {
    SimulationTrace trace;
    Field final_field;
};

inline PerturbationRun run_perturbation(const wave::WaveProfile& w, const model::ScaledParams& s,
                                        const WeightSpec& weight, const Perturbation& v0, double T_end,
                                        const MovingRunOptions& o) {
    if (!(T_end >= 0.0)) throw PreconditionError("T_end must be nonnegative");
    Field f;
    f.grid = w.grid;
    f.frame = Frame::moving;
    f.speed = w.c;
    f.u.resize(w.grid.size);
    f.v.resize(w.grid.size);
    for (std::size_t i = 1; i + 1 < w.grid.size; ++i) {
        const auto p = v0(w.grid[i]);
        f.u[i] = p[0];
        f.v[i] = p[1];
    }
    StepParams sp;
    sp.diffusion = 1.0;
    sp.advection = w.c;
    sp.blowup_bound = 10.0 * std::max(1.0, s.K2());
    ImexStepper stepper(f.grid, sp, o.dt, cauchy::perturbation_reaction(w, s));

    std::vector<double> wt(w.grid.size);
    for (std::size_t i = 0; i < w.grid.size; ++i) wt[i] = weight(w.grid[i]);
    PerturbationRun run;
    auto record = [&](const Field& g) {
        double sup = 0.0, ws = 0.0;
        for (std::size_t i = 0; i < g.grid.size; ++i) {
            const double m = std::max(std::abs(g.u[i]), std::abs(g.v[i]));
            sup = std::max(sup, m);
            ws = std::max(ws, m * wt[i]);
        }
        run.trace.times.push_back(g.t);
        run.trace.sup_norm.push_back(sup);
        run.trace.weighted_norm.push_back(ws);
    };
    const long steps = std::lround(T_end / o.dt);
    record(f);
    for (long n = 1; n <= steps; ++n) {
        stepper.step(f);
        if (n % o.sample_every == 0 || n == steps) record(f);
    }
    run.final_field = std::move(f);
    return run;
}

}  // namespace detail

struct WeightedStabilityOptions : MovingRunOptions {
    double max_initial_weighted_norm = 0.05;
};

struct WeightedStabilityResult {
    SimulationTrace trace;
    double essential_bound = 0.0;  ///< rightmost weighted essential-spectrum vertex
    Field final_field;             ///< perturbation V at T_end
    bool passed = false;           ///< fitted b > 0
};

/// Nonlinear evolution of a perturbation of the wave, measured in the weighted sup norm.
inline WeightedStabilityResult wave_stability_weighted(const wave::WaveProfile& w, const model::ScaledParams& s,
                                                       const WeightSpec& weight, const Perturbation& v0, double T_end,
                                                       const WeightedStabilityOptions& o = {}) {
    weight.validate();
    const spectrum::WeightWindow win = spectrum::weight_window(s, w.c);
    if (!win.contains(weight)) {
        std::ostringstream os;
        os << "weight (" << weight.sigma1 << ", " << weight.sigma2 << ") outside the admissible window";
        throw PreconditionError(os.str());
    }
    double initial = 0.0;
    for (std::size_t i = 1; i + 1 < w.grid.size; ++i) {
        const auto p = v0(w.grid[i]);
        initial = std::max(initial, std::max(std::abs(p[0]), std::abs(p[1])) * weight(w.grid[i]));
    }
    if (initial > o.max_initial_weighted_norm) {
        std::ostringstream os;
        os << "initial perturbation weighted norm " << initial << " exceeds " << o.max_initial_weighted_norm;
        throw PreconditionError(os.str());
    }
    detail::PerturbationRun run = detail::run_perturbation(w, s, weight, v0, T_end, o);
    WeightedStabilityResult res;
    res.trace = std::move(run.trace);
    res.final_field = std::move(run.final_field);
    fit_exponential(res.trace, res.trace.weighted_norm, 0.5 * T_end);
    res.essential_bound = spectrum::rightmost_essential_bound(s, w.c, weight);
    res.passed = res.trace.fitted_b > 0.0;
    return res;
}

struct C0InstabilityOptions : MovingRunOptions {
    double transient = 1.0;     ///< weighted monotonicity is checked for t >= transient
    double growth_factor = 2.0; ///< required sup-norm growth over the run
};

struct C0InstabilityResult {
    SimulationTrace trace;
    double growth_ratio = 0.0;           ///< sup norm at T_end over sup norm at 0
    double max_weighted_increase = 0.0;  ///< largest relative step increase after the transient
    bool weighted_nonincreasing = false;
    Field final_field;
    bool passed = false;
};

/// Runs a perturbation and reports unweighted growth against weighted decay.
inline C0InstabilityResult wave_instability_c0(const wave::WaveProfile& w, const model::ScaledParams& s,
                                               const Perturbation& v0, double T_end, const WeightSpec& weight,
                                               const C0InstabilityOptions& o = {}) {
    weight.validate();
    detail::PerturbationRun run = detail::run_perturbation(w, s, weight, v0, T_end, o);
    C0InstabilityResult res;
    res.trace = std::move(run.trace);
    res.final_field = std::move(run.final_field);
    const auto& sup = res.trace.sup_norm;
    const auto& wn = res.trace.weighted_norm;
    res.growth_ratio = sup.back() / sup.front();
    for (std::size_t k = 1; k < wn.size(); ++k) {
        if (res.trace.times[k - 1] + 1e-12 < o.transient) continue;
        res.max_weighted_increase = std::max(res.max_weighted_increase, wn[k] / wn[k - 1] - 1.0);
    }
    res.weighted_nonincreasing = res.max_weighted_increase <= 1e-9;
    fit_exponential(res.trace, wn, 0.5 * T_end);
    res.passed = res.growth_ratio >= o.growth_factor && res.weighted_nonincreasing;
    return res;
}

// ------------------------------------------------------------- convergence

struct ConvergenceStudy {
    double h = 0.0, dt = 0.0;
    std::array<double, 2> errors{};  ///< sup differences (h, h/2) and (h/2, h/4) on the window
    double ratio = 0.0;              ///< errors[0] / errors[1]
};

/// Self-convergence of the physical solver under joint refinement (h, dt) -> (h/2, dt/2) -> (h/4, dt/4).
inline ConvergenceStudy self_convergence(const model::PhysicalParams& p, const Profile& u0, const Profile& v0,
                                         double T_end, double L, double h, double dt, double window) {
    const double ueq = p.a1 / p.b1;
    auto run = [&](int refine) {
        Field f;
        f.grid = Grid::symmetric(L, h / refine);
        f.u.resize(f.grid.size);
        f.v.resize(f.grid.size);
        for (std::size_t i = 0; i < f.grid.size; ++i) {
            f.u[i] = u0(f.grid[i]);
            f.v[i] = v0(f.grid[i]);
        }
        StepParams sp;
        sp.diffusion = p.d;
        sp.left = sp.right = {ueq, 0.0};
        f.u.front() = f.u.back() = ueq;
        f.v.front() = f.v.back() = 0.0;
        ImexStepper stepper(f.grid, sp, dt / refine, physical_reaction(p));
        const long steps = std::lround(T_end * refine / dt);
        for (long n = 0; n < steps; ++n) stepper.step(f);
        return f;
    };
    const Field a = run(1), b = run(2), c = run(4);
    ConvergenceStudy st;
    st.h = h;
    st.dt = dt;
    for (std::size_t i = 0; i < a.grid.size; ++i) {
        if (std::abs(a.grid[i]) > window) continue;
        const std::size_t j = 2 * i, k = 4 * i;
        st.errors[0] = std::max({st.errors[0], std::abs(a.u[i] - b.u[j]), std::abs(a.v[i] - b.v[j])});
        st.errors[1] = std::max({st.errors[1], std::abs(b.u[j] - c.u[k]), std::abs(b.v[j] - c.v[k])});
    }
    st.ratio = st.errors[0] / st.errors[1];
    return st;
}

}  // namespace lvw::cauchy
