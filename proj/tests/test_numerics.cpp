#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "lvwaves/fitting.hpp"
#include "lvwaves/grid.hpp"
#include "lvwaves/interpolation.hpp"
#include "lvwaves/tridiagonal.hpp"

using namespace lvw;

namespace {

// Dense Gaussian elimination with partial pivoting; independent oracle for the Thomas solver.
std::vector<double> dense_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a[i][k]) > std::abs(a[p][k])) p = i;
        std::swap(a[k], a[p]);
        std::swap(b[k], b[p]);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a[i][k] / a[k][k];
            for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
            b[i] -= f * b[k];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
        x[i] = s / a[i][i];
    }
    return x;
}

}  // namespace

TEST(Grid, SymmetricNodes) {
    const Grid g = Grid::symmetric(40.0, 0.05);
    EXPECT_EQ(g.size, 1601u);
    EXPECT_DOUBLE_EQ(g.front(), -40.0);
    EXPECT_NEAR(g.back(), 40.0, 1e-12);
    EXPECT_NEAR(g[800], 0.0, 1e-12);
    EXPECT_EQ(g.nearest(0.026), 801u);
    EXPECT_EQ(g.nearest(-1e9), 0u);
}

TEST(Grid, RejectsNonIntegerCellCount) {
    EXPECT_THROW(Grid::symmetric(1.0, 0.3), PreconditionError);
    EXPECT_THROW(Grid::symmetric(-1.0, 0.1), PreconditionError);
}

TEST(Grid, RelabelKeepsSpacing) {
    const Grid g = Grid::symmetric(10.0, 0.5).relabelled(1.25);
    EXPECT_DOUBLE_EQ(g.front(), -11.25);
    EXPECT_DOUBLE_EQ(g.h, 0.5);
}

TEST(Tridiagonal, MatchesDenseEliminationOnRandomDominantSystems) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(trial % 17);
        Tridiagonal t(n);
        std::vector<std::vector<double>> dense(n, std::vector<double>(n, 0.0));
        std::vector<double> rhs(n);
        for (std::size_t i = 0; i < n; ++i) {
            t.lower[i] = i > 0 ? u(rng) : 0.0;
            t.upper[i] = i + 1 < n ? u(rng) : 0.0;
            t.diag[i] = 2.5 + std::abs(u(rng));
            rhs[i] = u(rng);
            dense[i][i] = t.diag[i];
            if (i > 0) dense[i][i - 1] = t.lower[i];
            if (i + 1 < n) dense[i][i + 1] = t.upper[i];
        }
        const auto x = solve_tridiagonal(t, rhs);
        const auto y = dense_solve(dense, rhs);
        for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(x[i], y[i], 1e-13);
        const auto back = t.apply(x);
        for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(back[i], rhs[i], 1e-13);
    }
}

TEST(Tridiagonal, SingularPivotThrows) {
    Tridiagonal t(2);
    t.diag = {0.0, 1.0};
    EXPECT_THROW(TridiagonalLU{t}, ConvergenceError);
}

TEST(Interpolation, ExactForQuinticPolynomials) {
    const Grid g = Grid::symmetric(3.0, 0.25);
    auto p = [](double x) { return 1.0 - 2.0 * x + 0.5 * x * x * x - 0.1 * std::pow(x, 5); };
    std::vector<double> f(g.size);
    for (std::size_t i = 0; i < g.size; ++i) f[i] = p(g[i]);
    for (double x : {-3.0, -2.9, -0.13, 0.0, 1.77, 2.99, 3.0}) EXPECT_NEAR(interpolate(g, f, x), p(x), 1e-11);
    EXPECT_THROW(interpolate(g, f, 3.5), PreconditionError);
}

TEST(Interpolation, CrossingOfTanhFront) {
    const Grid g = Grid::symmetric(10.0, 0.1);
    std::vector<double> f(g.size);
    for (std::size_t i = 0; i < g.size; ++i) f[i] = 0.5 * (1.0 + std::tanh(g[i] - 0.337));
    EXPECT_NEAR(crossing(g, f, 0.5), 0.337, 1e-7);
    EXPECT_THROW(crossing(g, f, 2.0), PreconditionError);
}

TEST(Fitting, LineFitRecoversExactLine) {
    std::vector<double> x{0, 1, 2, 3, 4}, y;
    for (double v : x) y.push_back(3.0 - 0.25 * v);
    const LineFit f = fit_line(x, y);
    EXPECT_NEAR(f.slope, -0.25, 1e-15);
    EXPECT_NEAR(f.intercept, 3.0, 1e-14);
    EXPECT_NEAR(f.r2, 1.0, 1e-14);
}

TEST(Fitting, GoldenSectionFindsParabolaMinimum) {
    const double x = golden_minimize([](double t) { return (t - 0.3) * (t - 0.3) + 1.0; }, -2.0, 2.0, 1e-12);
    EXPECT_NEAR(x, 0.3, 1e-7);
}
