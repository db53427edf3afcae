#pragma once

#include <algorithm>
#include <array>

#include "lvwaves/model.hpp"

namespace lvw::wave {

/// Entries of dF/dU for the cooperative scaled system.
struct ReactionJacobian {
    double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;

    bool cooperative(double tol = 0.0) const { return a12 >= -tol && a21 >= -tol; }
};

/// F(u1,u2) of the scaled monotone system
///   F1 = u1 (alpha - u1 + r u2),  F2 = (K2 - u2)(b u1 - eps1 (1+eps2) u2),
/// with rest states (0,0) and (1, K2).
class MonotoneSystem {
public:
    explicit MonotoneSystem(const model::ScaledParams& s)
        : alpha_(s.alpha), r_(s.r), b_(s.b), eps1_(s.eps1), e_(s.eps1 * (1.0 + s.eps2)), K2_(s.K2()) {}

    std::array<double, 2> operator()(double u1, double u2) const {
        return {u1 * (alpha_ - u1 + r_ * u2), (K2_ - u2) * (b_ * u1 - e_ * u2)};
    }

    ReactionJacobian jacobian(double u1, double u2) const {
        return {alpha_ - 2.0 * u1 + r_ * u2, r_ * u1, b_ * (K2_ - u2), -b_ * u1 - eps1_ + 2.0 * e_ * u2};
    }

    double K2() const { return K2_; }

    /// 1.1 times the largest of -A11, -A22 over the order box [0,1] x [0,K2].
    /// Both entries are affine in each variable, so corners suffice.
    double penalty() const {
        double worst = 0.0;
        for (double u1 : {0.0, 1.0}) {
            for (double u2 : {0.0, K2_}) {
                const ReactionJacobian j = jacobian(u1, u2);
                worst = std::max({worst, -j.a11, -j.a22});
            }
        }
        return 1.1 * worst;
    }

private:
    double alpha_, r_, b_, eps1_, e_, K2_;
};

}  // namespace lvw::wave
