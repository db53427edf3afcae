#pragma once

// Command-line front end. Requires CLI11 and nlohmann/json on the include path.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lvwaves/asymptotics.hpp"
#include "lvwaves/cauchy.hpp"
#include "lvwaves/config.hpp"
#include "lvwaves/csv.hpp"
#include "lvwaves/model.hpp"
#include "lvwaves/spectrum.hpp"
#include "lvwaves/wavesolver.hpp"

namespace lvw::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kPass = 0, kCheckFailure = 1, kUsageError = 2 };

/// A speed literal and the tolerance implied by its decimal digits.
struct SpeedLiteral {
    double value = 0.0;
    double tolerance = 0.0;
};

inline SpeedLiteral parse_speed(const std::string& text) {
    SpeedLiteral s;
    std::size_t used = 0;
    try {
        s.value = std::stod(text, &used);
    } catch (const std::exception&) {
        throw ConfigError("speed '" + text + "' is not a number");
    }
    if (used != text.size() || !std::isfinite(s.value)) throw ConfigError("speed '" + text + "' is not a number");
    const auto dot = text.find('.');
    if (dot != std::string::npos && text.find_first_of("eE") == std::string::npos) {
        s.tolerance = 0.5 * std::pow(10.0, -static_cast<double>(text.size() - dot - 1));
    }
    return s;
}

inline std::string fmt(double x) { return csv::format_number(x); }

/// Result of one subcommand body.
struct Outcome {
    bool passed = true;
    std::string reason;
    std::vector<std::string> outputs;
    nlohmann::json summary = nlohmann::json::object();
};

struct Flags {
    std::string config_path;
    std::string speed = "2";
    std::vector<std::string> speeds;
    std::optional<double> L, h, l, tol, T, dt, sigma1, sigma2;
    std::string start = "upper";
    std::string method = "time-evolution";
    std::string scenario = "attraction";
    double rho0 = 0.5, A = 1.0, eps = 0.05, amplitude = 0.01, centre = -30.0;
};

struct Context {
    config::RunConfig cfg;
    model::ScaledParams scaled;
    Flags flags;
    std::filesystem::path dir;
    std::ostream& out;

    double L() const { return flags.L.value_or(cfg.L); }
    double h() const { return flags.h.value_or(cfg.h); }
    double tol() const { return flags.tol.value_or(cfg.tol); }
    double dt() const { return flags.dt.value_or(cfg.dt); }
    double sigma1() const { return flags.sigma1.value_or(cfg.sigma1); }
    double sigma2() const { return flags.sigma2.value_or(cfg.sigma2); }
    Grid grid() const { return Grid::symmetric(L(), h()); }

    std::string write(const std::string& name, const csv::Table& t) const {
        csv::write_csv(t, dir / name);
        return name;
    }
    std::string write_text(const std::string& name, const std::string& text) const {
        csv::write_text(text, dir / name);
        return name;
    }
};

namespace detail {

struct ResolvedSpeed {
    double c = 0.0;
    wave::SpeedClass cls;
    bool snapped = false;
};

inline ResolvedSpeed resolve_speed(const model::ScaledParams& s, const std::string& literal) {
    const SpeedLiteral lit = parse_speed(literal);
    ResolvedSpeed r;
    r.cls = wave::classify_speed(s, lit.value, lit.tolerance);
    r.c = lit.value;
    if (r.cls.kind == wave::SpeedClassKind::critical && r.c != s.c_min) {
        r.c = s.c_min;
        r.snapped = true;
    }
    return r;
}

inline wave::IterateOptions iterate_options(const Context& ctx) {
    wave::IterateOptions o;
    o.tol = ctx.tol();
    o.max_iters = ctx.cfg.max_iters;
    if (ctx.flags.start == "lower") {
        o.start = wave::Start::lower;
    } else if (ctx.flags.start != "upper") {
        throw ConfigError("--start must be 'upper' or 'lower'");
    }
    return o;
}

inline wave::WaveProfile solve(const Context& ctx, const ResolvedSpeed& sp, wave::OrderedPair* pair_out = nullptr,
                               std::optional<wave::Start> start = {}) {
    if (sp.cls.kind == wave::SpeedClassKind::subcritical) {
        std::ostringstream os;
        os << "no monotone wave for subcritical speed c=" << sp.c << " (c_min=" << ctx.scaled.c_min << ")";
        throw PreconditionError(os.str());
    }
    wave::PairOptions popt;
    popt.l = ctx.flags.l;
    wave::IterateOptions iopt = iterate_options(ctx);
    if (start) iopt.start = *start;
    wave::OrderedPair pair = wave::build_ordered_pair(ctx.scaled, sp.c, ctx.grid(), popt);
    wave::WaveProfile w = wave::monotone_iterate(pair, ctx.scaled, iopt);
    if (pair_out) *pair_out = std::move(pair);
    return w;
}

inline nlohmann::json physical_json(const model::PhysicalParams& p) {
    return {{"d", p.d}, {"a1", p.a1}, {"a2", p.a2}, {"b1", p.b1}, {"b2", p.b2}, {"c1", p.c1}, {"c2", p.c2},
            {"q", p.with_default_q().q}};
}

}  // namespace detail

// ------------------------------------------------------------------- check

inline std::string check_report(const config::RunConfig& cfg) {
    const model::PhysicalParams& p = cfg.physical;
    const model::HypothesisReport hr = model::validate_hypotheses(p);
    const model::ScaledParams s = model::derive_scaled(p);
    const model::Equilibria e = model::equilibria(p);
    const model::StabilityConstants k = model::stability_constants(p);
    auto yes = [](bool b) { return b ? "holds" : "FAILS"; };
    auto pair = [](model::StatePair v) { return "(" + fmt(v.first) + ", " + fmt(v.second) + ")"; };
    std::ostringstream os;
    os << "hypotheses\n"
       << "  H1 a1/b1 > a2/b2: " << yes(hr.h1) << " slack=" << fmt(hr.slack1) << "\n"
       << "  H2 a1/c1 > a2/c2: " << yes(hr.h2) << " slack=" << fmt(hr.slack2) << "\n"
       << "  H3 1 + a2/a1 >= b2/b1 + c1 a2/(c2 a1): " << yes(hr.h3) << " slack=" << fmt(hr.slack3) << "\n"
       << "scaled\n"
       << "  r = " << fmt(s.r) << "\n"
       << "  b = " << fmt(s.b) << "\n"
       << "  eps1 = " << fmt(s.eps1) << "\n"
       << "  eps2 = " << fmt(s.eps2) << "\n"
       << "  k = " << fmt(s.k) << "\n"
       << "  q = " << fmt(s.q) << "\n"
       << "  alpha = " << fmt(s.alpha) << "\n"
       << "  c_min = " << fmt(s.c_min) << "\n"
       << "  K2 = " << fmt(s.K2()) << "\n"
       << "  l_max = " << fmt(s.l_max()) << "\n"
       << "equilibria\n"
       << "  e00 = " << pair(e.e00) << "\n"
       << "  e10 = " << pair(e.e10) << "\n"
       << "  e01 = " << pair(e.e01) << "\n"
       << "stability\n"
       << "  alpha_s = " << fmt(k.alpha_s) << "\n"
       << "  B = " << fmt(k.B) << "\n"
       << "  beta_s = " << fmt(k.beta_s) << "\n"
       << "  gamma = " << fmt(k.gamma) << "\n"
       << "  A = " << fmt(k.A) << "\n"
       << "  delta = " << fmt(k.delta) << "\n";
    return os.str();
}

inline Outcome run_check(const Context& ctx) {
    Outcome o;
    const std::string report = check_report(ctx.cfg);
    ctx.out << report;
    o.outputs.push_back(ctx.write_text("report.txt", report));
    const model::StabilityConstants k = model::stability_constants(ctx.cfg.physical);
    o.summary = {{"alpha", ctx.scaled.alpha}, {"c_min", ctx.scaled.c_min}, {"alpha_s", k.alpha_s}, {"B", k.B},
                 {"beta_s", k.beta_s},        {"gamma", k.gamma},          {"A", k.A},             {"delta", k.delta}};
    return o;
}

// -------------------------------------------------------------------- wave

inline Outcome run_wave(const Context& ctx) {
    Outcome o;
    const detail::ResolvedSpeed sp = detail::resolve_speed(ctx.scaled, ctx.flags.speed);
    wave::OrderedPair pair;
    const wave::WaveProfile w = detail::solve(ctx, sp, &pair);
    const wave::PairCertificate cert = wave::certify_pair(pair, ctx.scaled);
    const wave::MonotonicityReport mono = wave::monotonicity(w);

    csv::Table t;
    t.add("xi", w.grid.nodes())
        .add("u1", w.u1)
        .add("u2", w.u2)
        .add("upper1", pair.upper1)
        .add("upper2", pair.upper2)
        .add("lower1", pair.lower1)
        .add("lower2", pair.lower2);
    o.outputs.push_back(ctx.write("wave.csv", t));

    const bool cert_ok = cert.holds(1e-9);
    const bool resid_ok = w.residual <= 10.0 * ctx.tol();
    o.passed = cert_ok && resid_ok && mono.strict();
    if (!cert_ok) o.reason = "ordered pair certificate fails";
    else if (!resid_ok) o.reason = "residual above tolerance";
    else if (!mono.strict()) o.reason = "profile not strictly monotone away from the ends";

    ctx.out << "speed " << fmt(sp.c) << " class " << wave::to_string(sp.cls.kind) << (sp.snapped ? " (snapped to c_min)" : "")
            << "\niterations " << w.iterates_used << "\nresidual " << fmt(w.residual) << "\nphase_shift "
            << fmt(w.phase_shift) << "\nleft_limit (" << fmt(w.u1.front()) << ", " << fmt(w.u2.front())
            << ")\nright_limit (" << fmt(w.u1.back()) << ", " << fmt(w.u2.back()) << ")\ncertificate "
            << (cert_ok ? "holds" : "FAILS") << " max_order_gap=" << fmt(cert.max_order_gap) << "\nmonotone "
            << (mono.strict() ? "strict" : "NOT strict") << " flagged_near_ends=" << mono.flagged.size() << "\n";
    o.summary = {{"c", sp.c},
                 {"class", wave::to_string(sp.cls.kind)},
                 {"snapped", sp.snapped},
                 {"iterations", w.iterates_used},
                 {"residual", w.residual},
                 {"certificate", cert_ok},
                 {"strictly_monotone", mono.strict()}};
    return o;
}

// ------------------------------------------------------------------- sweep

inline Outcome run_sweep(const Context& ctx) {
    Outcome o;
    if (ctx.flags.speeds.empty()) throw ConfigError("--speeds needs at least one value");
    std::vector<std::string> literal, cls, status;
    std::vector<double> used, iters, resid;
    for (const std::string& lit : ctx.flags.speeds) {
        const detail::ResolvedSpeed sp = detail::resolve_speed(ctx.scaled, lit);
        literal.push_back(lit);
        cls.push_back(wave::to_string(sp.cls.kind));
        used.push_back(sp.c);
        if (sp.cls.kind == wave::SpeedClassKind::subcritical) {
            status.push_back("refused");
            iters.push_back(0.0);
            resid.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        try {
            const wave::WaveProfile w = detail::solve(ctx, sp);
            status.push_back("converged");
            iters.push_back(static_cast<double>(w.iterates_used));
            resid.push_back(w.residual);
        } catch (const Error& e) {
            status.push_back("failed");
            iters.push_back(0.0);
            resid.push_back(std::numeric_limits<double>::quiet_NaN());
            o.passed = false;
            o.reason = "solve failed at speed " + lit + ": " + e.what();
        }
    }
    csv::Table t;
    t.add("speed", literal).add("class", cls).add("c_used", used).add("status", status).add("iterations", iters).add(
        "residual", resid);
    o.outputs.push_back(ctx.write("sweep.csv", t));
    for (std::size_t i = 0; i < literal.size(); ++i) {
        ctx.out << literal[i] << " " << cls[i] << " " << status[i];
        if (status[i] == "converged") ctx.out << " iterations=" << iters[i] << " residual=" << fmt(resid[i]);
        ctx.out << "\n";
    }
    o.summary = {{"classes", cls}, {"status", status}};
    return o;
}

// ------------------------------------------------------------------- rates

inline Outcome run_rates(const Context& ctx) {
    Outcome o;
    const detail::ResolvedSpeed sp = detail::resolve_speed(ctx.scaled, ctx.flags.speed);
    const wave::WaveProfile w = detail::solve(ctx, sp);
    const asymptotics::AsymptoticFit fit = asymptotics::fit_asymptotics(w, ctx.scaled);
    const asymptotics::RateReport r = asymptotics::compare_rates(fit);

    std::vector<double> lu1, lu2, gu1, gu2;
    const double K2 = ctx.scaled.K2();
    for (std::size_t i = 0; i < w.grid.size; ++i) {
        lu1.push_back(std::log(std::abs(w.u1[i])));
        lu2.push_back(std::log(std::abs(w.u2[i])));
        gu1.push_back(std::log(std::abs(1.0 - w.u1[i])));
        gu2.push_back(std::log(std::abs(K2 - w.u2[i])));
    }
    csv::Table t;
    t.add("xi", w.grid.nodes()).add("log_u1", lu1).add("log_u2", lu2).add("log_gap_u1", gu1).add("log_gap_u2", gu2);
    o.outputs.push_back(ctx.write("rates.csv", t));

    std::ostringstream os;
    os << "speed " << fmt(sp.c) << " class " << wave::to_string(sp.cls.kind) << "\n"
       << "theory mu_minus " << fmt(fit.theory.mu_minus) << " mu_plus " << fmt(fit.theory.mu_plus) << "\n"
       << "left  window [" << fmt(fit.left.window.lo) << ", " << fmt(fit.left.window.hi) << "] u1 "
       << fmt(fit.left.exponent_u1) << " u2 " << fmt(fit.left.exponent_u2)
       << (fit.left.prefactor_corrected ? " (log|xi| corrected)" : "") << "\n"
       << "right window [" << fmt(fit.right.window.lo) << ", " << fmt(fit.right.window.hi) << "] u1 "
       << fmt(fit.right.exponent_u1) << " u2 " << fmt(fit.right.exponent_u2) << " plain_u1 "
       << fmt(fit.right.plain_slope_u1) << "\n"
       << "rel_err left " << fmt(r.rel_err_left_u1) << " " << fmt(r.rel_err_left_u2) << " right "
       << fmt(r.rel_err_right_u1) << " " << fmt(r.rel_err_right_u2) << " share " << fmt(r.share_diff) << "\n"
       << "slow_root_selected " << (r.slow_root_selected ? "yes" : "no") << " signs_ok " << (r.signs_ok ? "yes" : "no")
       << "\n"
       << "result " << (r.passed() ? "pass" : "FAIL") << "\n";
    ctx.out << os.str();
    o.outputs.push_back(ctx.write_text("report.txt", os.str()));
    o.passed = r.passed();
    if (!o.passed) o.reason = "fitted exponents outside tolerance";
    o.summary = {{"left_u1", fit.left.exponent_u1}, {"left_u2", fit.left.exponent_u2},
                 {"right_u1", fit.right.exponent_u1}, {"right_u2", fit.right.exponent_u2},
                 {"mu_minus", fit.theory.mu_minus}, {"mu_plus", fit.theory.mu_plus}};
    return o;
}

// ---------------------------------------------------------------- spectrum

inline spectrum::AbscissaMethod parse_method(const std::string& m) {
    if (m == "time-evolution") return spectrum::AbscissaMethod::time_evolution;
    if (m == "eigensolve") return spectrum::AbscissaMethod::eigensolve;
    throw ConfigError("--method must be 'time-evolution' or 'eigensolve'");
}

inline Outcome run_spectrum(const Context& ctx) {
    Outcome o;
    const spectrum::AbscissaMethod method = parse_method(ctx.flags.method);
    const detail::ResolvedSpeed sp = detail::resolve_speed(ctx.scaled, ctx.flags.speed);
    const WeightSpec weight{ctx.sigma1(), ctx.sigma2()};
    weight.validate();
    const wave::WaveProfile w = detail::solve(ctx, sp);

    csv::Table t;
    std::vector<std::string> branch;
    std::vector<double> zeta, re, im;
    auto append = [&](const std::vector<spectrum::SpectrumCurve>& cs) {
        for (const auto& c : cs) {
            for (std::size_t j = 0; j < c.zeta.size(); ++j) {
                branch.push_back(c.label);
                zeta.push_back(c.zeta[j]);
                re.push_back(c.re[j]);
                im.push_back(c.im[j]);
            }
        }
    };
    append(spectrum::essential_curves(ctx.scaled, sp.c, std::nullopt));
    if (!weight.is_zero()) append(spectrum::essential_curves(ctx.scaled, sp.c, weight));
    t.add("branch", branch).add("zeta", zeta).add("re", re).add("im", im);
    o.outputs.push_back(ctx.write("spectrum_curves.csv", t));

    std::ostringstream os;
    os << "speed " << fmt(sp.c) << " class " << wave::to_string(sp.cls.kind) << "\n";
    const auto v = spectrum::vertices(ctx.scaled, sp.c, weight);
    os << "weight (" << fmt(weight.sigma1) << ", " << fmt(weight.sigma2) << ")\n"
       << "vertices " << fmt(v[0]) << " " << fmt(v[1]) << " " << fmt(v[2]) << " " << fmt(v[3]) << "\n";
    std::optional<bool> in_window;
    if (sp.cls.kind == wave::SpeedClassKind::supercritical) {
        const spectrum::WeightWindow win = spectrum::weight_window(ctx.scaled, sp.c);
        in_window = win.contains(weight);
        os << "window sigma1 [" << fmt(win.sigma1_lo) << ", " << fmt(win.sigma1_hi) << ") sigma2 (" << fmt(win.sigma2_lo)
           << ", " << fmt(win.sigma2_hi) << ") contains " << (*in_window ? "yes" : "no") << "\n";
    } else {
        os << "window unavailable at critical speed\n";
    }
    spectrum::AbscissaOptions aopt;
    aopt.seed = ctx.cfg.seed;
    const spectrum::SpectralAbscissaEstimate est =
        spectrum::estimate_spectral_abscissa(spectrum::assemble_weighted_operator(w, ctx.scaled, weight), method, aopt);
    os << "abscissa " << spectrum::to_string(method) << " " << fmt(est.value) << " essential_bound "
       << fmt(est.essential_bound);
    if (method == spectrum::AbscissaMethod::time_evolution) os << " r2 " << fmt(est.r2);
    os << " nodes " << est.nodes_used << "\n";
    for (const auto& z : est.outliers) os << "outlier " << fmt(z.real()) << " " << fmt(z.imag()) << "\n";

    std::string expectation = "none";
    if (weight.is_zero()) {
        expectation = "positive";
        o.passed = est.value > 0.0;
    } else if (in_window.value_or(false)) {
        expectation = "negative";
        o.passed = est.value < 0.0;
        const spectrum::ZeroModeReport zm = spectrum::zero_eigenvalue_exclusion(w, ctx.scaled, weight);
        os << "translation_mode log_growth_to_probe " << fmt(zm.log_ratio_probe) << " at xi=" << fmt(zm.probe)
           << " unbounded " << (zm.mode_unbounded ? "yes" : "no") << "\n";
    }
    // The eigensolve on a truncated domain sees the absolute spectrum, so zero weight carries no sign claim there.
    if (weight.is_zero() && method == spectrum::AbscissaMethod::eigensolve) {
        expectation = "none";
        o.passed = true;
    }
    os << "expected_sign " << expectation << " result " << (o.passed ? "pass" : "FAIL") << "\n";
    if (!o.passed) o.reason = "spectral abscissa sign differs from expectation (" + expectation + ")";
    ctx.out << os.str();
    o.outputs.push_back(ctx.write_text("report.txt", os.str()));
    o.summary = {{"abscissa", est.value}, {"essential_bound", est.essential_bound}, {"expected_sign", expectation}};
    return o;
}

// ---------------------------------------------------------------- simulate

inline csv::Table trace_table(const cauchy::SimulationTrace& tr) {
    csv::Table t;
    t.add("t", tr.times).add("sup_norm", tr.sup_norm);
    if (!tr.weighted_norm.empty()) t.add("weighted_norm", tr.weighted_norm);
    if (!tr.envelope.empty()) t.add("envelope", tr.envelope);
    return t;
}

inline csv::Table field_table(const cauchy::Field& f, const char* x, const char* a, const char* b) {
    csv::Table t;
    t.add(x, f.grid.nodes()).add(a, f.u).add(b, f.v);
    return t;
}

inline Outcome run_simulate(const Context& ctx) {
    Outcome o;
    const std::string& sc = ctx.flags.scenario;
    const model::PhysicalParams& p = ctx.cfg.physical;
    std::ostringstream os;
    os << "scenario " << sc << "\n";
    if (sc == "attraction" || sc == "instability") {
        const double T = ctx.flags.T.value_or(ctx.cfg.T);
        if (sc == "attraction") {
            cauchy::AttractionOptions opt;
            opt.dt = ctx.dt();
            const auto r = cauchy::verify_attraction(p, ctx.flags.rho0, ctx.flags.A, T, opt);
            o.outputs.push_back(ctx.write("trace.csv", trace_table(r.trace)));
            o.outputs.push_back(ctx.write("final_field.csv", field_table(r.final_field, "x", "u", "v")));
            os << "max_violation " << fmt(r.max_violation) << "\nfinal sup|u-a1/b1| " << fmt(r.final_sup_u)
               << " envelope " << fmt(r.final_envelope) << "\n";
            o.passed = r.passed;
            o.summary = {{"max_violation", r.max_violation}, {"final_sup_u", r.final_sup_u},
                         {"final_envelope", r.final_envelope}};
        } else {
            cauchy::InstabilityOptions opt;
            opt.dt = ctx.dt();
            const auto r = cauchy::verify_instability_estimates(p, ctx.flags.eps, T, opt);
            o.outputs.push_back(ctx.write("trace.csv", trace_table(r.trace)));
            o.outputs.push_back(ctx.write("final_field.csv", field_table(r.final_field, "x", "u", "v")));
            os << "min_u " << fmt(r.min_u) << " bound " << fmt(r.bound_u - r.slack) << "\nmax_v " << fmt(r.max_v)
               << " bound " << fmt(r.bound_v + r.slack) << "\nsandwich_violation " << fmt(r.max_sandwich_violation)
               << "\n";
            o.passed = r.passed;
            o.summary = {{"min_u", r.min_u}, {"max_v", r.max_v}, {"sandwich_violation", r.max_sandwich_violation}};
        }
    } else if (sc == "wave-weighted" || sc == "wave-c0") {
        const detail::ResolvedSpeed sp = detail::resolve_speed(ctx.scaled, ctx.flags.speed);
        if (sp.cls.kind != wave::SpeedClassKind::supercritical) {
            throw PreconditionError("wave stability scenarios need a supercritical speed");
        }
        const wave::WaveProfile w = detail::solve(ctx, sp);
        const WeightSpec weight{ctx.sigma1(), ctx.sigma2()};
        if (sc == "wave-weighted") {
            cauchy::WeightedStabilityOptions opt;
            opt.dt = ctx.dt();
            const double T = ctx.flags.T.value_or(ctx.cfg.T);
            const auto r = cauchy::wave_stability_weighted(w, ctx.scaled, weight,
                                                           cauchy::sech_perturbation(ctx.flags.amplitude), T, opt);
            o.outputs.push_back(ctx.write("trace.csv", trace_table(r.trace)));
            o.outputs.push_back(ctx.write("final_field.csv", field_table(r.final_field, "xi", "v1", "v2")));
            os << "fitted_b " << fmt(r.trace.fitted_b) << " fitted_M " << fmt(r.trace.fitted_M) << " r2 "
               << fmt(r.trace.fit_r2) << "\nessential_bound " << fmt(r.essential_bound) << "\n";
            o.passed = r.passed;
            o.summary = {{"fitted_b", r.trace.fitted_b}, {"essential_bound", r.essential_bound}};
        } else {
            cauchy::C0InstabilityOptions opt;
            opt.dt = ctx.dt();
            // The growth claim is about the run up to t=5; a config T does not apply here.
            const double T = ctx.flags.T.value_or(5.0);
            const auto r = cauchy::wave_instability_c0(
                w, ctx.scaled, cauchy::bump_perturbation(ctx.flags.centre, 2.0, ctx.flags.amplitude), T, weight, opt);
            o.outputs.push_back(ctx.write("trace.csv", trace_table(r.trace)));
            o.outputs.push_back(ctx.write("final_field.csv", field_table(r.final_field, "xi", "v1", "v2")));
            os << "growth_ratio " << fmt(r.growth_ratio) << "\nweighted_nonincreasing "
               << (r.weighted_nonincreasing ? "yes" : "no") << " max_increase " << fmt(r.max_weighted_increase) << "\n";
            o.passed = r.passed;
            o.summary = {{"growth_ratio", r.growth_ratio}, {"weighted_nonincreasing", r.weighted_nonincreasing}};
        }
    } else {
        throw ConfigError("--scenario must be one of attraction, instability, wave-weighted, wave-c0");
    }
    os << "result " << (o.passed ? "pass" : "FAIL") << "\n";
    if (!o.passed) o.reason = "scenario " + sc + " assertion failed";
    ctx.out << os.str();
    return o;
}

// ------------------------------------------------------------------- align

inline Outcome run_align(const Context& ctx) {
    Outcome o;
    const detail::ResolvedSpeed sp = detail::resolve_speed(ctx.scaled, ctx.flags.speed);
    const wave::WaveProfile a = detail::solve(ctx, sp, nullptr, wave::Start::upper);
    const wave::WaveProfile b = detail::solve(ctx, sp, nullptr, wave::Start::lower);
    const wave::Alignment al = wave::align_profiles(a, b);
    csv::Table t;
    t.add("xi_upper_start", a.grid.nodes())
        .add("u1_upper_start", a.u1)
        .add("u2_upper_start", a.u2)
        .add("xi_lower_start", b.grid.nodes())
        .add("u1_lower_start", b.u1)
        .add("u2_lower_start", b.u2);
    o.outputs.push_back(ctx.write("align.csv", t));
    o.passed = al.sup_diff < 1e-6;
    if (!o.passed) o.reason = "aligned profiles differ by more than 1e-6";
    ctx.out << "speed " << fmt(sp.c) << "\ntheta " << fmt(al.theta) << "\nsup_diff " << fmt(al.sup_diff) << "\nresult "
            << (o.passed ? "pass" : "FAIL") << "\n";
    o.summary = {{"theta", al.theta}, {"sup_diff", al.sup_diff}};
    return o;
}

// ---------------------------------------------------------------- dispatch

inline std::filesystem::path output_root(const config::RunConfig& cfg) {
    if (const char* env = std::getenv("LVWAVES_OUT"); env && *env) return env;
    return cfg.out;
}

inline nlohmann::json manifest(const Context& ctx, const std::string& sub, const Outcome& o) {
    nlohmann::json given = nlohmann::json::object();
    for (const auto& [k, v] : ctx.cfg.given) given[k] = v;
    return {{"tool", "lvwaves"},
            {"subcommand", sub},
            {"status", o.passed ? "pass" : "fail"},
            {"reason", o.reason},
            {"seed", ctx.cfg.seed},
            {"config",
             {{"given", given},
              {"physical", detail::physical_json(ctx.cfg.physical)},
              {"L", ctx.L()},
              {"h", ctx.h()},
              {"dt", ctx.dt()},
              {"T", ctx.flags.T.value_or(ctx.cfg.T)},
              {"sigma1", ctx.sigma1()},
              {"sigma2", ctx.sigma2()},
              {"tol", ctx.tol()},
              {"max_iters", ctx.cfg.max_iters}}},
            {"scaled", {{"alpha", ctx.scaled.alpha}, {"c_min", ctx.scaled.c_min}, {"q", ctx.scaled.q}}},
            {"outputs", o.outputs},
            {"summary", o.summary},
            {"versions",
             {{"lvwaves", kVersion},
              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
              {"cli11", CLI11_VERSION},
              {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
              {"compiler", __VERSION__}}}};
}

inline void report_failure(std::ostream& err, const std::string& sub, int code, const std::string& kind,
                           const std::string& reason) {
    err << nlohmann::json{{"status", "fail"}, {"exit", code}, {"subcommand", sub}, {"kind", kind}, {"reason", reason}}
               .dump()
        << "\n";
}

/// Runs the tool; returns the process exit code. Never throws.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    Flags f;
    CLI::App app{"Workbench for competition traveling waves", "lvwaves"};
    app.set_help_flag("--help", "Print this help message and exit");  // -h would clash with --h
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.add_option("-c,--config", f.config_path, "Config file (key = value lines)")->required();

    auto grid_flags = [&](CLI::App* s) {
        s->add_option("--L", f.L, "Half-width of the domain");
        s->add_option("--h", f.h, "Grid spacing");
        s->add_option("--tol", f.tol, "Iteration tolerance");
    };
    auto* check = app.add_subcommand("check", "Hypotheses, scaled constants, equilibria, stability constants");
    auto* wave_cmd = app.add_subcommand("wave", "Solve one traveling wave");
    wave_cmd->add_option("--speed", f.speed, "Wave speed")->required();
    wave_cmd->add_option("--l", f.l, "Lower-solution parameter l");
    wave_cmd->add_option("--start", f.start, "Iteration start: upper or lower");
    grid_flags(wave_cmd);
    auto* sweep = app.add_subcommand("sweep", "Classify and solve several speeds");
    sweep->add_option("--speeds", f.speeds, "Comma-separated speeds")->required()->delimiter(',');
    grid_flags(sweep);
    auto* rates = app.add_subcommand("rates", "Fit tail decay rates");
    rates->add_option("--speed", f.speed, "Wave speed");
    grid_flags(rates);
    auto* spectrum_cmd = app.add_subcommand("spectrum", "Essential spectrum, weight window and spectral abscissa");
    spectrum_cmd->add_option("--speed", f.speed, "Wave speed");
    spectrum_cmd->add_option("--sigma1", f.sigma1, "Weight exponent on the right");
    spectrum_cmd->add_option("--sigma2", f.sigma2, "Weight exponent on the left");
    spectrum_cmd->add_option("--method", f.method, "time-evolution or eigensolve");
    grid_flags(spectrum_cmd);
    auto* sim = app.add_subcommand("simulate", "Time-dependent scenarios");
    sim->add_option("--scenario", f.scenario, "attraction, instability, wave-weighted or wave-c0");
    sim->add_option("--T", f.T, "Final time");
    sim->add_option("--dt", f.dt, "Time step");
    sim->add_option("--sigma1", f.sigma1, "Weight exponent on the right");
    sim->add_option("--sigma2", f.sigma2, "Weight exponent on the left");
    sim->add_option("--speed", f.speed, "Wave speed for wave scenarios");
    sim->add_option("--rho0", f.rho0, "Initial envelope (attraction)");
    sim->add_option("--A", f.A, "Envelope constant A (attraction)");
    sim->add_option("--eps", f.eps, "Lower bound on initial data (instability)");
    sim->add_option("--amplitude", f.amplitude, "Perturbation amplitude (wave scenarios)");
    sim->add_option("--centre", f.centre, "Bump centre (wave-c0)");
    grid_flags(sim);
    auto* align = app.add_subcommand("align", "Compare waves solved from the upper and the lower start");
    align->add_option("--speed", f.speed, "Wave speed");
    grid_flags(align);

    std::vector<const char*> argv{"lvwaves"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kPass : kUsageError;
    }
    const std::string sub = app.get_subcommands().front()->get_name();

    std::optional<Context> ctx;
    try {
        config::RunConfig cfg = config::parse_config(f.config_path);
        for (const auto& w : cfg.warnings) err << "warning: " << w << "\n";
        const model::ScaledParams scaled = model::derive_scaled(cfg.physical);
        const std::filesystem::path dir = output_root(cfg) / sub;
        std::filesystem::create_directories(dir);
        ctx.emplace(Context{std::move(cfg), scaled, f, dir, out});

        Outcome o;
        if (check->parsed()) o = run_check(*ctx);
        else if (wave_cmd->parsed()) o = run_wave(*ctx);
        else if (sweep->parsed()) o = run_sweep(*ctx);
        else if (rates->parsed()) o = run_rates(*ctx);
        else if (spectrum_cmd->parsed()) o = run_spectrum(*ctx);
        else if (sim->parsed()) o = run_simulate(*ctx);
        else o = run_align(*ctx);

        csv::write_text(manifest(*ctx, sub, o).dump(2) + "\n", ctx->dir / "manifest.json");
        if (!o.passed) {
            report_failure(err, sub, kCheckFailure, "check", o.reason);
            return kCheckFailure;
        }
        return kPass;
    } catch (const Error& e) {
        const bool check_kind = dynamic_cast<const CheckFailure*>(&e) || dynamic_cast<const ConvergenceError*>(&e);
        const int code = check_kind ? kCheckFailure : kUsageError;
        if (ctx) {
            Outcome o;
            o.passed = false;
            o.reason = e.what();
            try {
                csv::write_text(manifest(*ctx, sub, o).dump(2) + "\n", ctx->dir / "manifest.json");
            } catch (const Error&) {
            }
        }
        report_failure(err, sub, code, e.kind(), e.what());
        return code;
    } catch (const std::filesystem::filesystem_error& e) {
        report_failure(err, sub, kUsageError, "io", e.what());
        return kUsageError;
    }
}

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    return run(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace lvw::cli
