#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "lvwaves/error.hpp"

namespace lvw {

/// Uniform one-dimensional grid x_i = origin + i*h, i = 0..size-1.
struct Grid {
    double origin = 0.0;
    double h = 0.0;
    std::size_t size = 0;

    /// Nodes -L, -L+h, ..., L. L/h must be an integer up to rounding.
    static Grid symmetric(double L, double h) {
        if (!(L > 0.0) || !(h > 0.0)) {
            throw PreconditionError("grid needs L > 0 and h > 0");
        }
        const double cells = 2.0 * L / h;
        const double rounded = std::round(cells);
        if (std::abs(cells - rounded) > 1e-8 * rounded || rounded < 4.0) {
            throw PreconditionError("2L/h must be an integer >= 4 (L=" + std::to_string(L) +
                                    ", h=" + std::to_string(h) + ")");
        }
        return Grid{-L, h, static_cast<std::size_t>(rounded) + 1};
    }

    double operator[](std::size_t i) const { return origin + static_cast<double>(i) * h; }
    double front() const { return origin; }
    double back() const { return (*this)[size - 1]; }
    double half_width() const { return 0.5 * (back() - front()); }
    double center() const { return 0.5 * (back() + front()); }

    /// Index of the node closest to x, clamped to the grid.
    std::size_t nearest(double x) const {
        const double s = std::round((x - origin) / h);
        if (s <= 0.0) return 0;
        if (s >= static_cast<double>(size - 1)) return size - 1;
        return static_cast<std::size_t>(s);
    }

    /// Same nodes, coordinates relabelled so that the old point s becomes 0.
    Grid relabelled(double s) const { return Grid{origin - s, h, size}; }

    std::vector<double> nodes() const {
        std::vector<double> x(size);
        for (std::size_t i = 0; i < size; ++i) x[i] = (*this)[i];
        return x;
    }
};

inline bool same_spacing(const Grid& a, const Grid& b, double rel = 1e-12) {
    return std::abs(a.h - b.h) <= rel * std::max(a.h, b.h);
}

}  // namespace lvw
