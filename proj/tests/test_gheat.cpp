#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "gnsfde/error.hpp"
#include "gnsfde/gheat.hpp"

using namespace gnsfde;

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double solve_at_zero(const std::function<double(double)>& phi, const VolBounds& b, double t = 1.0,
                     double dx = 0.02, double half_width = 12.0) {
    const auto grid = SpatialGrid::centered(half_width, dx);
    return solve_g_heat(phi, b, t, grid, 0.9 * max_stable_dt(grid.dx(), b)).at(0.0);
}

const VolBounds kPaper(0.8, 1.3);

}  // namespace

TEST(GOf, Formula) {
    EXPECT_EQ(g_of(0.0, kPaper), 0.0);
    EXPECT_NEAR(g_of(1.0, kPaper), 0.845, 1e-15);
    EXPECT_NEAR(g_of(-1.0, kPaper), -0.32, 1e-15);
    EXPECT_NEAR(g_of(2.5, kPaper), 2.5 * 0.845, 1e-14);
}

TEST(VolBounds, Validation) {
    EXPECT_THROW(VolBounds(0.0, 1.0), Error);
    EXPECT_THROW(VolBounds(1.0, 0.5), Error);
    EXPECT_THROW(VolBounds(std::nan(""), 1.0), Error);
    EXPECT_NO_THROW(VolBounds(1.0, 1.0));
}

TEST(SolveGHeat, ClassicalSecondMoment) {
    EXPECT_NEAR(solve_at_zero([](double x) { return x * x; }, VolBounds(1.0, 1.0)), 1.0, 1e-3);
}

TEST(SolveGHeat, AffineDatumIsStationary) {
    const auto grid = SpatialGrid::centered(3.0, 0.05);
    const auto sol = solve_g_heat([](double x) { return 2.0 * x - 1.0; }, kPaper, 1.0, grid,
                                  max_stable_dt(grid.dx(), kPaper));
    for (std::size_t i = 0; i < grid.nodes(); ++i) EXPECT_NEAR(sol.final_level()[i], 2.0 * grid.x(i) - 1.0, 1e-12);
}

TEST(SolveGHeat, UpperAndLowerVariance) {
    EXPECT_NEAR(solve_at_zero([](double x) { return x * x; }, kPaper), 1.69, 1e-2);
    EXPECT_NEAR(solve_at_zero([](double x) { return -x * x; }, kPaper), -0.64, 1e-2);
}

TEST(SolveGHeat, ConvexAndConcaveAbsoluteValue) {
    // Convex data follow sigma_max, concave data sigma_min: E|sZ| = s sqrt(2/pi).
    const double c = std::sqrt(2.0 / std::numbers::pi);
    EXPECT_NEAR(solve_at_zero([](double x) { return std::abs(x); }, kPaper), 1.3 * c, 5e-3);
    EXPECT_NEAR(solve_at_zero([](double x) { return -std::abs(x); }, kPaper), -0.8 * c, 5e-3);
}

TEST(SolveGHeat, StabilityAndInputErrors) {
    const auto grid = SpatialGrid::centered(2.0, 0.1);
    try {
        solve_g_heat([](double x) { return x; }, kPaper, 1.0, grid, 1.01 * max_stable_dt(grid.dx(), kPaper));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Config);
        EXPECT_EQ(e.field().value_or(""), "gheat.dt");
    }
    try {
        solve_g_heat([](double x) { return 1.0 / x; }, kPaper, 1.0, grid, max_stable_dt(grid.dx(), kPaper));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Input);
    }
}

TEST(SolveGHeat, InitialLevelIsDatum) {
    const auto grid = SpatialGrid::centered(2.0, 0.05);
    auto phi = [](double x) { return std::sin(3.0 * x); };
    const auto sol = solve_g_heat(phi, kPaper, 0.5, grid, max_stable_dt(grid.dx(), kPaper));
    for (std::size_t i = 0; i < grid.nodes(); ++i) EXPECT_EQ(sol.level(0)[i], phi(grid.x(i)));
}

TEST(SolveGHeat, MonotoneDatumStaysMonotone) {
    const auto grid = SpatialGrid::centered(4.0, 0.05);
    GHeatOptions opts;
    opts.store_stride = 50;
    const auto sol = solve_g_heat([](double x) { return std::tanh(3.0 * x) + (x > 1.0 ? 0.5 : 0.0); }, kPaper, 1.0,
                                  grid, max_stable_dt(grid.dx(), kPaper), opts);
    ASSERT_GT(sol.level_count(), 3u);
    for (std::size_t j = 0; j < sol.level_count(); ++j) {
        const auto u = sol.level(j);
        for (std::size_t i = 1; i < u.size(); ++i) ASSERT_GE(u[i], u[i - 1] - 1e-14) << "level " << j;
    }
}

TEST(SolveGHeat, ComparisonPrinciple) {
    const auto grid = SpatialGrid::centered(4.0, 0.05);
    auto lo = [](double x) { return std::cos(2.0 * x); };
    auto hi = [](double x) { return std::cos(2.0 * x) + 0.1 * std::exp(-x * x); };
    GHeatOptions opts;
    opts.store_stride = 25;
    const double dt = max_stable_dt(grid.dx(), kPaper);
    const auto a = solve_g_heat(lo, kPaper, 1.0, grid, dt, opts);
    const auto b = solve_g_heat(hi, kPaper, 1.0, grid, dt, opts);
    for (std::size_t j = 0; j < a.level_count(); ++j) {
        for (std::size_t i = 0; i < grid.nodes(); ++i) ASSERT_LE(a.level(j)[i], b.level(j)[i] + 1e-14);
    }
}

TEST(SolveGHeat, ConstantPreserving) {
    const auto grid = SpatialGrid::centered(2.0, 0.05);
    const auto sol = solve_g_heat([](double) { return 0.7; }, kPaper, 1.0, grid, max_stable_dt(grid.dx(), kPaper));
    for (double v : sol.final_level()) EXPECT_EQ(v, 0.7);
}

TEST(SolveGHeat, PositiveHomogeneityOnConvexDatum) {
    auto sq = [](double x) { return x * x; };
    const double base = solve_at_zero(sq, kPaper);
    EXPECT_EQ(solve_at_zero([](double) { return 0.0; }, kPaper), 0.0);
    EXPECT_NEAR(solve_at_zero([&](double x) { return 2.0 * sq(x); }, kPaper), 2.0 * base, 1e-10);
}

TEST(SolveGHeat, SubAdditivity) {
    const std::vector<std::pair<std::function<double(double)>, std::function<double(double)>>> pairs{
        {[](double x) { return x * x; }, [](double x) { return -x * x; }},
        {[](double x) { return std::abs(x); }, [](double x) { return -std::abs(x - 0.5); }},
        {[](double x) { return smoothed_step(x, 0.3, 0.04); }, [](double x) { return -smoothed_step(x, -0.2, 0.04); }},
        {[](double x) { return std::sin(x); }, [](double x) { return std::cos(2.0 * x); }},
    };
    for (const auto& [f, g] : pairs) {
        const double sum = solve_at_zero([&](double x) { return f(x) + g(x); }, kPaper, 1.0, 0.05);
        EXPECT_LE(sum, solve_at_zero(f, kPaper, 1.0, 0.05) + solve_at_zero(g, kPaper, 1.0, 0.05) + 1e-12);
    }
}

TEST(GNormalCdf, ClassicalOracle) {
    const VolBounds unit(1.0, 1.0);
    EXPECT_NEAR(g_normal_upper_cdf(0.0, unit, 1.0), 0.5, 2e-3);
    EXPECT_NEAR(g_normal_upper_cdf(1.96, unit, 1.0), 0.975, 2e-3);
    GNormalOptions o;
    o.half_width = 8.0;
    EXPECT_NEAR(g_normal_upper_cdf(-7.9, unit, 1.0, o), 0.0, 1e-6);
    EXPECT_NEAR(g_normal_upper_cdf(7.9, unit, 1.0, o), 1.0, 1e-6);
}

TEST(GNormalTable, MatchesDirectSolves) {
    const std::vector<double> ys{-1.5, -0.4, 0.0, 0.7, 2.1};
    const auto table = g_normal_table(kPaper, 1.0, ys);
    for (std::size_t i = 0; i < ys.size(); ++i) {
        EXPECT_NEAR(table.cdf[i], g_normal_upper_cdf(ys[i], kPaper, 1.0), 1e-9) << ys[i];
    }
}

TEST(GNormalTable, ClassicalCdfAndDensity) {
    const auto ys = linspace_step(-4.0, 4.0, 0.02);
    const auto table = g_normal_table(VolBounds(1.0, 1.0), 1.0, ys);
    double cdf_err = 0.0;
    double pdf_err = 0.0;
    double mass = 0.0;
    double asym = 0.0;
    for (std::size_t i = 0; i < ys.size(); ++i) {
        cdf_err = std::max(cdf_err, std::abs(table.cdf[i] - normal_cdf(ys[i])));
        pdf_err = std::max(pdf_err, std::abs(table.density[i] - normal_pdf(ys[i])));
        asym = std::max(asym, std::abs(table.density[i] - table.density[ys.size() - 1 - i]));
        if (i > 0) mass += 0.5 * (table.density[i] + table.density[i - 1]) * 0.02;
    }
    EXPECT_LE(cdf_err, 2e-3);
    EXPECT_LE(pdf_err, 5e-3);
    EXPECT_NEAR(mass, 1.0, 1e-2);
    EXPECT_LE(asym, 1e-3);
}

TEST(GNormalTable, UpperDensityMirrorsLowerDensity) {
    // X and -X share the G-normal law, so the upper density at -y is the lower density at y.
    const auto ys = linspace_step(-6.0, 6.0, 0.05);
    const auto up = g_normal_table(kPaper, 1.0, ys);
    GNormalOptions o;
    o.lower = true;
    const auto low = g_normal_table(kPaper, 1.0, ys, o);
    double mass = 0.0;
    for (std::size_t i = 0; i < ys.size(); ++i) {
        EXPECT_NEAR(up.density[i], low.density[ys.size() - 1 - i], 1e-3) << ys[i];
        if (i > 0) mass += 0.5 * (up.density[i] + up.density[i - 1]) * 0.05;
        EXPECT_GE(up.cdf[i], low.cdf[i] - 1e-12);
        if (i > 0) EXPECT_GE(up.cdf[i], up.cdf[i - 1]);
    }
    EXPECT_NEAR(mass, 1.0, 1e-2);
}

TEST(GNormalTable, DominatesEveryConstantVolatility) {
    // Constant volatilities are members of the uncertainty family, so the upper CDF
    // lies above each of their normal CDFs (up to discretization error).
    const auto ys = linspace_step(-3.0, 3.0, 0.25);
    const auto t = g_normal_table(kPaper, 1.0, ys);
    for (std::size_t i = 0; i < ys.size(); ++i) {
        for (double s : {0.8, 1.0, 1.3}) EXPECT_GE(t.cdf[i], normal_cdf(ys[i] / s) - 2e-3) << ys[i] << " " << s;
    }
}

TEST(LinspaceStep, EndpointsIncluded) {
    const auto v = linspace_step(-1.0, 1.0, 0.25);
    ASSERT_EQ(v.size(), 9u);
    EXPECT_EQ(v.front(), -1.0);
    EXPECT_NEAR(v.back(), 1.0, 1e-15);
}
