#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>

#include "lvwaves/error.hpp"
#include "lvwaves/grid.hpp"

namespace lvw {

/// Local Lagrange interpolation of grid data using `points` consecutive nodes
/// around x (stencil clamped at the ends). Throws outside [front, back].
inline double interpolate(const Grid& g, std::span<const double> f, double x, std::size_t points = 6) {
    const double tol = 1e-12 * g.h;
    if (x < g.front() - tol || x > g.back() + tol) {
        throw PreconditionError("interpolation point outside grid");
    }
    points = std::min(points, g.size);
    const double s = (x - g.origin) / g.h;
    long first = static_cast<long>(std::floor(s)) - static_cast<long>(points / 2) + 1;
    first = std::clamp(first, 0L, static_cast<long>(g.size - points));
    double result = 0.0;
    for (std::size_t j = 0; j < points; ++j) {
        const double sj = static_cast<double>(first + static_cast<long>(j));
        double w = 1.0;
        for (std::size_t k = 0; k < points; ++k) {
            if (k == j) continue;
            const double sk = static_cast<double>(first + static_cast<long>(k));
            w *= (s - sk) / (sj - sk);
        }
        result += w * f[static_cast<std::size_t>(first) + j];
    }
    return result;
}

/// First point where increasing data f crosses `level`, refined by bisection on the interpolant.
inline double crossing(const Grid& g, std::span<const double> f, double level) {
    std::size_t i = 0;
    while (i + 1 < g.size && !(f[i] <= level && f[i + 1] >= level)) ++i;
    if (i + 1 >= g.size) throw PreconditionError("profile never crosses the requested level");
    double lo = g[i], hi = g[i + 1];
    for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (interpolate(g, f, mid) < level) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace lvw
