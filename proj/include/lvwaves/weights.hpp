#pragma once

#include <algorithm>
#include <cmath>

#include "lvwaves/error.hpp"

namespace lvw {

/// Exponential weight w(xi) = e^{sigma1 xi} + e^{-sigma2 xi}.
struct WeightSpec {
    double sigma1 = 0.0;
    double sigma2 = 0.0;

    bool is_zero() const { return sigma1 == 0.0 && sigma2 == 0.0; }

    void validate() const {
        if (!(sigma1 >= 0.0 && sigma2 >= 0.0)) throw PreconditionError("weight exponents must be nonnegative");
    }

    double operator()(double xi) const {
        return std::exp(sigma1 * xi) + std::exp(-sigma2 * xi);
    }

    /// g1 = w'/w and g2 = w''/w, evaluated without overflow.
    double g1(double xi) const {
        const double m = std::max(sigma1 * xi, -sigma2 * xi);
        const double p = std::exp(sigma1 * xi - m), q = std::exp(-sigma2 * xi - m);
        return (sigma1 * p - sigma2 * q) / (p + q);
    }

    double g2(double xi) const {
        const double m = std::max(sigma1 * xi, -sigma2 * xi);
        const double p = std::exp(sigma1 * xi - m), q = std::exp(-sigma2 * xi - m);
        return (sigma1 * sigma1 * p + sigma2 * sigma2 * q) / (p + q);
    }
};

}  // namespace lvw
