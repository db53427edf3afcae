#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lvwaves/spectrum.hpp"

using namespace lvw;
using namespace lvw::spectrum;

namespace {

const model::ScaledParams& ref() {
    static const model::ScaledParams s = model::derive_scaled(model::PhysicalParams::reference());
    return s;
}

const wave::WaveProfile& wave2() {
    static const wave::WaveProfile w = wave::solve_wave(ref(), 2.0, Grid::symmetric(40.0, 0.05));
    return w;
}

}  // namespace

TEST(Vertices, UnweightedReference) {
    const auto v = vertices(ref(), 2.0, WeightSpec{});
    EXPECT_NEAR(v[0], -1.0, 1e-12);
    EXPECT_NEAR(v[1], -0.5, 1e-12);
    EXPECT_NEAR(v[2], 0.75, 1e-12);
    EXPECT_NEAR(v[3], -0.5, 1e-12);
    EXPECT_NEAR(rightmost_essential_bound(ref(), 2.0, WeightSpec{}), 0.75, 1e-12);
}

TEST(Vertices, WeightedReference) {
    const auto v = vertices(ref(), 2.0, WeightSpec{0.1, 1.0});
    EXPECT_NEAR(v[0], -0.79, 1e-12);
    EXPECT_NEAR(v[1], -0.29, 1e-12);
    EXPECT_NEAR(v[2], -0.25, 1e-12);
    EXPECT_NEAR(v[3], -1.5, 1e-12);
}

TEST(Curves, ParabolaIdentityAndVertexAtZeroFrequency) {
    for (const auto& w : {std::optional<WeightSpec>{}, std::optional<WeightSpec>{WeightSpec{0.1, 1.0}}}) {
        const auto curves = essential_curves(ref(), 2.0, w);
        ASSERT_EQ(curves.size(), 4u);
        const auto v = vertices(ref(), 2.0, w.value_or(WeightSpec{}));
        for (std::size_t k = 0; k < 4; ++k) {
            const SpectrumCurve& c = curves[k];
            EXPECT_EQ(c.zeta.size(), 401u);
            EXPECT_NEAR(c.re[200], v[k], 1e-12);
            EXPECT_EQ(c.zeta[200], 0.0);
            for (std::size_t j = 0; j < c.zeta.size(); ++j) {
                if (c.advection != 0.0) {
                    EXPECT_NEAR(c.re[j], -c.im[j] * c.im[j] / (c.advection * c.advection) + c.vertex, 1e-12);
                } else {
                    EXPECT_EQ(c.im[j], 0.0);
                }
            }
        }
    }
    const auto plain = essential_curves(ref(), 2.0);
    EXPECT_EQ(plain[0].label, "plus-u1");
    EXPECT_NEAR(plain[0].re[0], -1.0 - 100.0, 1e-12);  // x = -y^2/c^2 - 1
}

TEST(Window, ReferenceEndpoints) {
    const WeightWindow w = weight_window(ref(), 2.0);
    EXPECT_EQ(w.sigma1_lo, 0.0);
    EXPECT_NEAR(w.sigma1_hi, (std::sqrt(6.0) - 2.0) / 2.0, 1e-12);
    EXPECT_NEAR(w.sigma1_hi, 0.224745, 1e-6);
    EXPECT_NEAR(w.sigma2_lo, 0.5, 1e-12);
    EXPECT_NEAR(w.sigma2_hi, 1.5, 1e-12);
    EXPECT_LT(w.max_sampled_bound, 0.0);
    EXPECT_TRUE(w.contains(WeightSpec{0.1, 1.0}));
    EXPECT_FALSE(w.contains(WeightSpec{0.1, 0.5}));
}

TEST(Window, RejectsCriticalAndShrinks) {
    EXPECT_THROW(weight_window(ref(), std::sqrt(3.0)), PreconditionError);
    EXPECT_THROW(weight_window(ref(), 1.5), PreconditionError);
    const WeightWindow w = weight_window(ref(), std::sqrt(3.0) + 1e-8);
    EXPECT_NEAR(w.sigma2_lo, std::sqrt(3.0) / 2.0, 1e-3);
    EXPECT_NEAR(w.sigma2_hi, std::sqrt(3.0) / 2.0, 1e-3);
}

TEST(Window, SoundnessOnRandomSamples) {
    const WeightWindow w = weight_window(ref(), 2.0);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        const WeightSpec in{w.sigma1_hi * u(rng) * 0.999999, w.sigma2_lo + (w.sigma2_hi - w.sigma2_lo) * (1e-6 + u(rng) * (1 - 2e-6))};
        ASSERT_TRUE(w.contains(in));
        EXPECT_LT(rightmost_essential_bound(ref(), 2.0, in), 0.0);
        const WeightSpec out{w.sigma1_hi * u(rng), w.sigma2_lo * u(rng)};
        EXPECT_GE(vertices(ref(), 2.0, out)[2], 0.0);
    }
}

TEST(Operator, BoundaryEntriesMatchLimitMatrices) {
    const WeightedOperator op = assemble_weighted_operator(wave2(), ref(), WeightSpec{0.1, 1.0});
    const std::size_t n = op.size();
    EXPECT_NEAR(op.g1.back(), 0.1, 1e-10);
    EXPECT_NEAR(op.g2.back(), 0.01, 1e-10);
    EXPECT_NEAR(op.g1.front(), -1.0, 1e-10);
    EXPECT_NEAR(op.g2.front(), 1.0, 1e-10);
    EXPECT_NEAR(op.M[n - 1].a11, -0.79, 1e-9);
    EXPECT_NEAR(op.M[n - 1].a22, -0.29, 1e-9);
    EXPECT_NEAR(op.M[n - 1].a12, 0.5, 1e-9);
    EXPECT_NEAR(op.M[n - 1].a21, 0.0, 1e-9);
    EXPECT_NEAR(op.M[0].a11, -0.25, 1e-7);
    EXPECT_NEAR(op.M[0].a22, -1.5, 1e-7);
    EXPECT_NEAR(op.M[0].a21, 0.5, 1e-7);
    EXPECT_NEAR(op.M[0].a12, 0.0, 1e-7);
}

TEST(Operator, ZeroWeightIsPlainLinearization) {
    const WeightedOperator op = assemble_weighted_operator(wave2(), ref(), WeightSpec{});
    const wave::MonotoneSystem F(ref());
    const auto& w = wave2();
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> a(op.size()), b(op.size());
    for (std::size_t i = 0; i < op.size(); ++i) { a[i] = u(rng); b[i] = u(rng); }
    const auto out = op.apply(a, b);
    const double h = w.grid.h;
    for (std::size_t i = 1; i + 1 < op.size(); ++i) {
        const auto J = F.jacobian(0.5 * (w.u1[i - 1] + w.u1[i + 1]), 0.5 * (w.u2[i - 1] + w.u2[i + 1]));
        const double e1 = (a[i + 1] - 2 * a[i] + a[i - 1]) / (h * h) - 2.0 * (a[i + 1] - a[i - 1]) / (2 * h) + J.a11 * a[i] + J.a12 * b[i];
        const double e2 = (b[i + 1] - 2 * b[i] + b[i - 1]) / (h * h) - 2.0 * (b[i + 1] - b[i - 1]) / (2 * h) + J.a21 * a[i] + J.a22 * b[i];
        EXPECT_NEAR(out[0][i], e1, 1e-9);
        EXPECT_NEAR(out[1][i], e2, 1e-9);
    }
}

TEST(Abscissa, SignDichotomyByTimeEvolution) {
    const auto zero = estimate_spectral_abscissa(assemble_weighted_operator(wave2(), ref(), WeightSpec{}));
    const auto win = estimate_spectral_abscissa(assemble_weighted_operator(wave2(), ref(), WeightSpec{0.1, 1.0}));
    EXPECT_GT(zero.value, 0.0);
    EXPECT_LT(win.value, 0.0);
    EXPECT_NEAR(zero.essential_bound, 0.75, 1e-12);
    EXPECT_NEAR(win.essential_bound, -0.25, 1e-12);
    EXPECT_LE(win.value, win.essential_bound + 0.1);
    EXPECT_GT(win.r2, 0.9);
}

TEST(Abscissa, EigensolveAgreesInsideWindowAndSeesAbsoluteSpectrumAtZeroWeight) {
    AbscissaOptions o;
    o.max_eig_nodes = 401;
    const auto win = estimate_spectral_abscissa(assemble_weighted_operator(wave2(), ref(), WeightSpec{0.1, 1.0}),
                                                AbscissaMethod::eigensolve, o);
    EXPECT_LT(win.value, 0.0);
    EXPECT_EQ(win.nodes_used, 401u);
    // On a truncated Dirichlet domain the unweighted eigenvalues approach the absolute
    // spectrum alpha - c^2/4 = -0.25 rather than the C0 essential vertex 0.75.
    const auto zero = estimate_spectral_abscissa(assemble_weighted_operator(wave2(), ref(), WeightSpec{}),
                                                 AbscissaMethod::eigensolve, o);
    EXPECT_NEAR(zero.value, 0.75 - 1.0, 0.05);
}

TEST(ZeroMode, TranslationModeExcludedByWeight) {
    const ZeroModeReport r = zero_eigenvalue_exclusion(wave2(), ref(), WeightSpec{0.1, 1.0}, -30.0);
    EXPECT_LT(r.unweighted_residual, 1e-6);
    EXPECT_GE(r.log_ratio_probe, 10.0);
    EXPECT_GT(r.log_ratio_left_end, std::log(1e3));
    EXPECT_NEAR(r.growth_exponent / r.expected_exponent, 1.0, 0.02);
    EXPECT_NEAR(r.expected_exponent, -0.5, 1e-12);
    EXPECT_TRUE(r.in_window);
    EXPECT_TRUE(r.mode_unbounded);
}

TEST(ZeroMode, BelowWindowTheModeIsBounded) {
    const ZeroModeReport r = zero_eigenvalue_exclusion(wave2(), ref(), WeightSpec{0.1, 0.3}, -30.0);
    EXPECT_FALSE(r.in_window);
    EXPECT_FALSE(r.mode_unbounded);
    EXPECT_LT(r.log_ratio_probe, 0.0);
}
