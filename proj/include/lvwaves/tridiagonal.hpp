#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "lvwaves/error.hpp"

namespace lvw {

/// Tridiagonal matrix stored by diagonals. Row i reads
/// lower[i]*x[i-1] + diag[i]*x[i] + upper[i]*x[i+1]; lower[0] and upper[n-1] are ignored.
struct Tridiagonal {
    std::vector<double> lower, diag, upper;

    Tridiagonal() = default;
    explicit Tridiagonal(std::size_t n) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}
    std::size_t size() const { return diag.size(); }

    std::vector<double> apply(std::span<const double> x) const {
        const std::size_t n = size();
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = diag[i] * x[i];
            if (i > 0) s += lower[i] * x[i - 1];
            if (i + 1 < n) s += upper[i] * x[i + 1];
            y[i] = s;
        }
        return y;
    }
};

/**
 * @brief LU factors of a tridiagonal matrix (Thomas algorithm without pivoting).
 *
 * Factor once, solve many times. Intended for diagonally dominant or M-matrix systems.
 */
class TridiagonalLU {
public:
    TridiagonalLU() = default;

    explicit TridiagonalLU(const Tridiagonal& m) : lower_(m.lower), cprime_(m.size()), inv_(m.size()) {
        const std::size_t n = m.size();
        if (n == 0) return;
        double denom = m.diag[0];
        for (std::size_t i = 0; i < n; ++i) {
            if (i > 0) denom = m.diag[i] - m.lower[i] * cprime_[i - 1];
            if (denom == 0.0 || !std::isfinite(denom)) {
                throw ConvergenceError("singular tridiagonal pivot at row " + std::to_string(i), 0.0);
            }
            inv_[i] = 1.0 / denom;
            cprime_[i] = (i + 1 < n) ? m.upper[i] * inv_[i] : 0.0;
        }
    }

    std::size_t size() const { return inv_.size(); }

    /// Solves in place: x enters as the right-hand side.
    void solve_in_place(std::span<double> x) const {
        const std::size_t n = size();
        if (n == 0) return;
        x[0] *= inv_[0];
        for (std::size_t i = 1; i < n; ++i) x[i] = (x[i] - lower_[i] * x[i - 1]) * inv_[i];
        for (std::size_t i = n - 1; i-- > 0;) x[i] -= cprime_[i] * x[i + 1];
    }

    std::vector<double> solve(std::span<const double> rhs) const {
        std::vector<double> x(rhs.begin(), rhs.end());
        solve_in_place(x);
        return x;
    }

private:
    std::vector<double> lower_, cprime_, inv_;
};

inline std::vector<double> solve_tridiagonal(const Tridiagonal& m, std::span<const double> rhs) {
    return TridiagonalLU(m).solve(rhs);
}

}  // namespace lvw
