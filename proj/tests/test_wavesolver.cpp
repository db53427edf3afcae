#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "generators.hpp"
#include "lvwaves/interpolation.hpp"
#include "lvwaves/wavesolver.hpp"

using namespace lvw;
using namespace lvw::wave;

namespace {

const model::ScaledParams& ref() {
    static const model::ScaledParams s = model::derive_scaled(model::PhysicalParams::reference());
    return s;
}

const Grid& ref_grid() {
    static const Grid g = Grid::symmetric(40.0, 0.05);
    return g;
}

const WaveProfile& wave2() {
    static const WaveProfile w = solve_wave(ref(), 2.0, ref_grid());
    return w;
}

}  // namespace

TEST(ClassifySpeed, ReferenceExamples) {
    EXPECT_EQ(classify_speed(ref(), 1.5).kind, SpeedClassKind::subcritical);
    EXPECT_NEAR(classify_speed(ref(), 1.5).discriminant, 2.25 - 3.0, 1e-15);
    EXPECT_EQ(classify_speed(ref(), std::sqrt(3.0)).kind, SpeedClassKind::critical);
    EXPECT_EQ(classify_speed(ref(), 2.0).kind, SpeedClassKind::supercritical);
    EXPECT_EQ(classify_speed(ref(), 1.732).kind, SpeedClassKind::subcritical);
    EXPECT_EQ(classify_speed(ref(), 1.732, 0.0005).kind, SpeedClassKind::critical);
    EXPECT_THROW(classify_speed(ref(), 0.0), PreconditionError);
}

TEST(Reaction, PenaltyConstantOnReferenceBox) {
    const MonotoneSystem F(ref());
    EXPECT_NEAR(F.penalty(), 1.1 * 1.5, 1e-15);  // min A11 = -1.25, min A22 = -1.5
    EXPECT_LE(F.penalty(), 2.0);
}

TEST(Reaction, JacobianMatchesFiniteDifferencesAndIsCooperative) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const model::ScaledParams s = model::derive_scaled(gen::random_admissible(rng));
        const MonotoneSystem F(s);
        const double x = u(rng), y = s.K2() * u(rng), e = 1e-6;
        const ReactionJacobian J = F.jacobian(x, y);
        const auto fx1 = F(x + e, y), fx0 = F(x - e, y), fy1 = F(x, y + e), fy0 = F(x, y - e);
        EXPECT_NEAR(J.a11, (fx1[0] - fx0[0]) / (2 * e), 1e-8);
        EXPECT_NEAR(J.a21, (fx1[1] - fx0[1]) / (2 * e), 1e-8);
        EXPECT_NEAR(J.a12, (fy1[0] - fy0[0]) / (2 * e), 1e-8);
        EXPECT_NEAR(J.a22, (fy1[1] - fy0[1]) / (2 * e), 1e-8);
        EXPECT_TRUE(J.cooperative());
        // Rest states.
        EXPECT_NEAR(F(1.0, s.K2())[0], 1.0 * (s.alpha - 1.0 + s.r * s.K2()), 1e-15);
        EXPECT_NEAR(F(1.0, s.K2())[0], 0.0, 1e-14);
        EXPECT_NEAR(F(1.0, s.K2())[1], 0.0, 1e-15);
    }
}

TEST(OrderedPair, ReferenceLimitsAndExactScalings) {
    const OrderedPair p = build_ordered_pair(ref(), 2.0, ref_grid());
    EXPECT_NEAR(p.l, 0.8, 1e-15);
    EXPECT_NEAR(p.upper1.back(), 1.0, 1e-6);
    EXPECT_NEAR(p.upper2.back(), 0.5, 1e-6);
    EXPECT_NEAR(p.lower1.back(), 0.9375, 1e-6);
    EXPECT_NEAR(p.lower2.back(), 0.375, 1e-6);
    for (std::size_t i = 0; i < p.grid.size; ++i) {
        EXPECT_EQ(p.upper2[i], ref().K2() * p.upper1[i]);
        EXPECT_EQ(p.lower2[i], p.l * ref().K2() * p.lower1[i]);
        EXPECT_LE(p.lower1[i], p.upper1[i]);
        EXPECT_LE(p.lower2[i], p.upper2[i]);
    }
    EXPECT_TRUE(certify_pair(p, ref()).holds(1e-9));
}

TEST(OrderedPair, SecondUpperInequalityMatchesClosedForm) {
    const OrderedPair p = build_ordered_pair(ref(), 2.0, ref_grid());
    const MonotoneSystem F(ref());
    const double h = p.grid.h;
    const double coef = (ref().alpha + ref().eps1 - ref().b) / (1.0 + ref().eps2);
    EXPECT_NEAR(coef, 0.125, 1e-15);
    for (std::size_t i = 1; i + 1 < p.grid.size; ++i) {
        const double n2 = -(p.upper2[i + 1] - 2 * p.upper2[i] + p.upper2[i - 1]) / (h * h) +
                          2.0 * (p.upper2[i + 1] - p.upper2[i - 1]) / (2 * h);
        const double res = n2 - F(p.upper1[i], p.upper2[i])[1];
        const double Y = p.upper1[i];
        EXPECT_NEAR(res, coef * Y * (1 - Y), 1e-9);
    }
}

TEST(OrderedPair, LOutsideAdmissibleRangeRejected) {
    PairOptions o;
    o.l = 0.81;
    EXPECT_THROW(build_ordered_pair(ref(), 2.0, ref_grid(), o), PreconditionError);
}

TEST(OrderedPair, CertificatesHoldForRandomParametersAndSpeeds) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 12; ++trial) {
        const model::ScaledParams s = model::derive_scaled(gen::random_admissible(rng));
        const double c = s.c_min * (1.1 + 0.6 * u(rng));
        const double mu = 0.5 * (c - std::sqrt(c * c - 4 * s.alpha));
        const double L = std::ceil(std::max(40.0, 16.0 / mu));
        const double h = std::min(0.05, 1.0 / c);
        PairOptions o;
        o.l = s.l_max() * (0.2 + 0.8 * u(rng));
        const OrderedPair p = build_ordered_pair(s, c, Grid::symmetric(L, h), o);
        EXPECT_TRUE(certify_pair(p, s).holds(1e-9)) << "trial " << trial;
    }
}

TEST(MonotoneIterate, ReferenceWave) {
    const WaveProfile& w = wave2();
    const OrderedPair p = build_ordered_pair(ref(), 2.0, ref_grid());
    EXPECT_LT(w.final_delta, 1e-10);
    EXPECT_LT(w.residual, 1e-9);
    EXPECT_LT(wave_residual(w.grid, w.u1, w.u2, 2.0, ref()), 1e-8);
    EXPECT_GT(w.iterates_used, 10u);
    for (std::size_t i = 0; i < w.grid.size; ++i) {
        EXPECT_GE(w.u1[i], p.lower1[i]);
        EXPECT_LE(w.u1[i], p.upper1[i]);
        EXPECT_GE(w.u2[i], p.lower2[i]);
        EXPECT_LE(w.u2[i], p.upper2[i]);
    }
    EXPECT_NEAR(w.u1.front(), 0.0, 1e-5);
    EXPECT_NEAR(w.u2.front(), 0.0, 1e-5);
    EXPECT_NEAR(w.u1.back(), 1.0, 1e-5);
    EXPECT_NEAR(w.u2.back(), 0.5, 1e-5);
    EXPECT_NEAR(interpolate(w.grid, w.u1, 0.0), 0.5, 1e-10);
    const MonotonicityReport m = monotonicity(w);
    EXPECT_TRUE(m.strict());
    EXPECT_TRUE(m.flagged.empty());
}

TEST(MonotoneIterate, LowerStartReachesSameWave) {
    IterateOptions o;
    o.start = Start::lower;
    const WaveProfile w = solve_wave(ref(), 2.0, ref_grid(), {}, o);
    const Alignment a = align_profiles(wave2(), w);
    EXPECT_LT(a.sup_diff, 1e-6);
    EXPECT_LT(std::abs(a.theta), 1e-4);
}

TEST(MonotoneIterate, MaxItersExceeded) {
    IterateOptions o;
    o.max_iters = 3;
    EXPECT_THROW(solve_wave(ref(), 2.0, ref_grid(), {}, o), ConvergenceError);
}

TEST(MonotoneIterate, SubcriticalRefused) {
    EXPECT_THROW(solve_wave(ref(), 1.5, ref_grid()), PreconditionError);
}

TEST(Align, ShiftedCopy) {
    WaveProfile shifted = wave2();
    const std::size_t n = shifted.grid.size;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = std::min(i + 10, n - 1);
        shifted.u1[i] = wave2().u1[j];
        shifted.u2[i] = wave2().u2[j];
    }
    const Alignment a = align_profiles(wave2(), shifted);
    EXPECT_NEAR(a.theta, 10 * ref_grid().h, 1e-8);
    EXPECT_LT(a.sup_diff, 1e-8);
}

TEST(Align, PerturbedStartAgreesAfterShift) {
    PairOptions o;
    o.phase_offset = 27;
    const WaveProfile w = solve_wave(ref(), 2.0, ref_grid(), o);
    // The shifted pair moves the Dirichlet pins relative to the front; compare away from them.
    const Alignment a = align_profiles(wave2(), w, 5.0);
    EXPECT_LT(a.sup_diff, 1e-6);
    EXPECT_GT(align_profiles(wave2(), w).sup_diff, a.sup_diff);
}

TEST(Align, DifferentSpeedsStayApart) {
    const WaveProfile w = solve_wave(ref(), 2.2, ref_grid());
    EXPECT_GT(align_profiles(wave2(), w).sup_diff, 1e-3);
}

TEST(Align, IncompatibleGrids) {
    const WaveProfile w = solve_wave(ref(), 2.0, Grid::symmetric(40.0, 0.1));
    EXPECT_THROW(align_profiles(wave2(), w), PreconditionError);
}
