#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <utility>

#include "lvwaves/error.hpp"

/// Parameters, hypotheses, derived constants and state maps of the competition system.
namespace lvw::model {

/// Coefficients of u_t = d u_xx + u(a1 - b1 u - c1 v), v_t = d v_xx + v(a2 - b2 u - c2 v),
/// plus the free scaling constant q of the monotone reformulation.
struct PhysicalParams {
    double d = 1.0;
    double a1 = 2.0, a2 = 1.0;
    double b1 = 1.0, b2 = 1.0;
    double c1 = 1.0, c2 = 2.0;
    double q = std::numeric_limits<double>::quiet_NaN();

    /// Midpoint of the admissible interval (a2/c2, a1/c1).
    double default_q() const { return 0.5 * (a2 / c2 + a1 / c1); }

    /// Copy with q set to its default when unset.
    PhysicalParams with_default_q() const {
        PhysicalParams p = *this;
        if (std::isnan(p.q)) p.q = p.default_q();
        return p;
    }

    static PhysicalParams reference() {
        PhysicalParams p;
        p.q = 1.0;
        return p;
    }
};

struct HypothesisReport {
    bool h1 = false, h2 = false, h3 = false;
    /// Positive slack means the inequality holds with room to spare.
    double slack1 = 0.0, slack2 = 0.0, slack3 = 0.0;
    bool all() const { return h1 && h2 && h3; }
    std::string failed() const {
        std::string s;
        if (!h1) s += "H1 ";
        if (!h2) s += "H2 ";
        if (!h3) s += "H3 ";
        if (!s.empty()) s.pop_back();
        return s;
    }
};

struct ScaledParams {
    double r = 0.0, b = 0.0, eps1 = 0.0, eps2 = 0.0, k = 0.0, q = 0.0;
    double alpha = 0.0;
    double c_min = 0.0;

    /// Right limit of the second scaled component, 1/(1+eps2).
    double K2() const { return 1.0 / (1.0 + eps2); }

    /// Largest admissible lower-solution parameter l.
    double l_max() const { return std::min(1.0, b / (1.0 + eps1 - r / (1.0 + eps2))); }
};

struct StatePair {
    double first = 0.0;
    double second = 0.0;
    friend bool operator==(const StatePair&, const StatePair&) = default;
};

struct Equilibria {
    StatePair e00, e10, e01;
};

struct StabilityConstants {
    double alpha_s = 0.0, B = 0.0, beta_s = 0.0;
    double gamma = 0.0, A = 0.0, delta = 0.0;
};

enum class EnvelopeKind { attraction, instability };
enum class Direction { physical_to_scaled, scaled_to_physical };

namespace detail {
inline void require_positive(const char* name, double value) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        std::ostringstream os;
        os << "coefficient " << name << " must be positive and finite (got " << value << ")";
        throw PreconditionError(os.str());
    }
}
}  // namespace detail

/// Throws PreconditionError naming the first nonpositive coefficient.
inline void require_positive_coefficients(const PhysicalParams& p) {
    detail::require_positive("d", p.d);
    detail::require_positive("a1", p.a1);
    detail::require_positive("a2", p.a2);
    detail::require_positive("b1", p.b1);
    detail::require_positive("b2", p.b2);
    detail::require_positive("c1", p.c1);
    detail::require_positive("c2", p.c2);
    if (!std::isnan(p.q)) detail::require_positive("q", p.q);
}

inline HypothesisReport validate_hypotheses(const PhysicalParams& p) {
    require_positive_coefficients(p);
    HypothesisReport r;
    r.slack1 = p.a1 / p.b1 - p.a2 / p.b2;
    r.slack2 = p.a1 / p.c1 - p.a2 / p.c2;
    r.slack3 = (1.0 + p.a2 / p.a1) - (p.b2 / p.b1 + p.c1 * p.a2 / (p.c2 * p.a1));
    r.h1 = r.slack1 > 0.0;
    r.h2 = r.slack2 > 0.0;
    r.h3 = r.slack3 >= -1e-12;
    return r;
}

inline ScaledParams derive_scaled(const PhysicalParams& input) {
    const PhysicalParams p = input.with_default_q();
    const HypothesisReport h = validate_hypotheses(p);
    if (!h.all()) throw PreconditionError("hypotheses violated: " + h.failed());
    if (!(p.q > p.a2 / p.c2 && p.q < p.a1 / p.c1)) {
        std::ostringstream os;
        os << "q = " << p.q << " must lie strictly inside (" << p.a2 / p.c2 << ", " << p.a1 / p.c1 << ")";
        throw PreconditionError(os.str());
    }
    ScaledParams s;
    s.q = p.q;
    s.r = p.c1 * p.q / p.a1;
    s.eps1 = p.a2 / p.a1;
    s.b = p.b2 / p.b1;
    s.eps2 = p.c2 * p.q / p.a2 - 1.0;
    s.k = p.a1 / p.b1;
    s.alpha = 1.0 - s.r / (1.0 + s.eps2);
    s.c_min = 2.0 * std::sqrt(s.alpha);

    auto fail = [](const std::string& what) { throw PreconditionError("scaled constants inconsistent: " + what); };
    if (!(s.eps1 > 0.0 && s.eps1 < s.b)) fail("need 0 < eps1 < b");
    if (!(s.r > 0.0 && s.r < 1.0)) fail("need 0 < r < 1");
    if (!(s.eps2 > 0.0)) fail("need eps2 > 0");
    if (!(s.alpha > s.b - s.eps1)) fail("need 1 - r/(1+eps2) > b - eps1");
    return s;
}

inline Equilibria equilibria(const PhysicalParams& p) {
    return Equilibria{{0.0, 0.0}, {p.a1 / p.b1, 0.0}, {0.0, p.a2 / p.c2}};
}

/// Reaction terms of the physical system at a state.
inline StatePair physical_reaction(const PhysicalParams& p, StatePair s) {
    return {s.first * (p.a1 - p.b1 * s.first - p.c1 * s.second),
            s.second * (p.a2 - p.b2 * s.first - p.c2 * s.second)};
}

inline StabilityConstants stability_constants(const PhysicalParams& p) {
    const HypothesisReport h = validate_hypotheses(p);
    if (!h.all()) throw PreconditionError("hypotheses violated: " + h.failed());
    StabilityConstants k;
    const double gap = p.a1 / p.b1 - p.a2 / p.b2;
    k.alpha_s = p.b2 * gap;
    k.B = p.b1 * p.b2 / (p.a1 * p.c1) * ((p.a1 + p.a2) / p.b2 - p.a1 / p.b1);
    k.beta_s = p.b1 * p.b2 / p.a1 * gap;
    const double chain = p.c2 - p.c1 + p.a1 * p.c2 / p.a2;
    k.gamma = p.a1 - p.a2 * p.c1 / p.c2;
    k.A = chain / p.b2;
    k.delta = p.b1 / p.b2 * chain - p.c1;

    const double tol = 1e-12;
    if (!(k.alpha_s > 0.0 && k.beta_s > 0.0 && k.gamma > 0.0 && k.B >= -tol &&
          k.A > p.c2 / p.b2 && k.delta >= p.a1 * p.c2 / p.a2 - p.c1 - tol)) {
        throw CheckFailure("stability constants violate their sign conditions");
    }
    return k;
}

/// Comparison envelope rho(t) of the attraction or instability estimate.
inline double rho_envelope(const StabilityConstants& k, double rho0, double t, EnvelopeKind kind) {
    if (kind == EnvelopeKind::attraction) {
        const double cap = k.alpha_s / k.beta_s;
        if (!(rho0 > 0.0 && rho0 < cap)) {
            throw PreconditionError("attraction envelope needs 0 < rho0 < a1/b1");
        }
        const double ratio = k.beta_s / k.alpha_s;
        return 1.0 / (ratio + (1.0 / rho0 - ratio) * std::exp(k.alpha_s * t));
    }
    const double cap = k.gamma / k.delta;
    if (!(rho0 > 0.0 && rho0 < cap)) {
        throw PreconditionError("instability envelope needs 0 < rho0 < gamma/delta");
    }
    const double C = k.gamma / rho0 - k.delta;
    return k.gamma / (k.delta + C * std::exp(-k.gamma * t));
}

inline StatePair transform_state(StatePair s, const ScaledParams& sp, Direction dir) {
    if (dir == Direction::physical_to_scaled) {
        return {s.first / sp.k, sp.K2() - s.second / sp.q};
    }
    return {s.first * sp.k, sp.q * (sp.K2() - s.second)};
}

}  // namespace lvw::model
