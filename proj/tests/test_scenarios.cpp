#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "gnsfde/error.hpp"
#include "gnsfde/gheat.hpp"
#include "gnsfde/rng.hpp"
#include "gnsfde/scenarios.hpp"

using namespace gnsfde;

namespace {

const VolBounds kBounds(0.8, 1.3);

TimeGrid unit_grid(std::size_t steps = 100) { return TimeGrid(0.0, 1.0, steps); }

double terminal_square(const GBMPath& p) { return p.b.back() * p.b.back(); }

double pde_at_zero(const std::function<double(double)>& phi) {
    const auto grid = SpatialGrid::centered(12.0, 0.02);
    return solve_g_heat(phi, kBounds, 1.0, grid, 0.9 * max_stable_dt(grid.dx(), kBounds)).at(0.0);
}

}  // namespace

TEST(VolPolicy, LevelsStayInBounds) {
    EXPECT_THROW(VolPolicy::constant(0.5, kBounds), Error);
    EXPECT_THROW(VolPolicy::constant(1.8, kBounds), Error);
    EXPECT_THROW(VolPolicy::piecewise({0.5}, {0.64}, kBounds), Error);
    const auto fam = default_family(kBounds, 10, 3, 4);
    const auto g = unit_grid(200);
    for (const auto& pol : fam.policies) {
        for (std::size_t k = 0; k < 5; ++k) {
            for (double c : pol.realize(g, fam.sample_seed(k))) {
                EXPECT_GE(c, kBounds.var_min());
                EXPECT_LE(c, kBounds.var_max());
            }
        }
    }
}

TEST(VolPolicy, PiecewiseBreakpoints) {
    const auto pol = VolPolicy::piecewise({0.5}, {0.64, 1.69}, kBounds);
    const auto c = pol.realize(unit_grid(10), 0);
    for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(c[j], 0.64);
    for (std::size_t j = 5; j < 10; ++j) EXPECT_EQ(c[j], 1.69);
}

TEST(SampleGbm, PathInvariants) {
    const auto pol = VolPolicy::random_switch(3.0, {0.64, 1.0, 1.69}, 17, kBounds);
    const auto g = unit_grid(50);
    const auto p = sample_gbm(pol, g, 99);
    ASSERT_EQ(p.b.size(), 51u);
    EXPECT_EQ(p.b[0], 0.0);
    EXPECT_EQ(p.qv[0], 0.0);
    for (std::size_t j = 0; j < p.forward_steps(); ++j) {
        EXPECT_GE(p.qv[j + 1], p.qv[j]);
        EXPECT_NEAR(p.dqv(j), p.rate[j] * g.step(), 1e-15);
    }
}

TEST(SampleGbm, ConstantPolicyQuadraticVariationIsDeterministic) {
    const auto pol = VolPolicy::constant(1.21, kBounds);
    for (std::uint64_t s : {1u, 2u, 3u}) EXPECT_NEAR(sample_gbm(pol, unit_grid(), s).qv.back(), 1.21, 1e-12);
}

TEST(SampleGbm, ZeroMeanAndClassicalVariance) {
    const auto pol = VolPolicy::constant(1.69, kBounds);
    const auto g = unit_grid(20);
    RunningStats first;
    RunningStats second;
    for (std::size_t k = 0; k < 10000; ++k) {
        const auto p = sample_gbm(pol, g, derive_seed(5, "t", k));
        first.add(p.b.back());
        second.add(terminal_square(p));
    }
    EXPECT_LE(std::abs(first.mean()), 3.0 * first.se());
    EXPECT_LE(std::abs(second.mean() - 1.69), 3.0 * second.se());
}

TEST(SampleGbm, DeterministicAndCommonRandomNumbers) {
    const auto g = unit_grid();
    const auto lo = VolPolicy::constant(0.64, kBounds);
    const auto hi = VolPolicy::constant(1.69, kBounds);
    const auto a = sample_gbm(hi, g, 42);
    const auto b = sample_gbm(hi, g, 42);
    EXPECT_EQ(a.b, b.b);
    const auto c = sample_gbm(lo, g, 42);
    for (std::size_t j = 0; j < a.forward_steps(); ++j) EXPECT_NEAR(a.db(j) * 0.8, c.db(j) * 1.3, 1e-12);
    EXPECT_NE(sample_gbm(hi, g, 43).b, a.b);
}

TEST(Coarsen, MatchesSubsampledNodes) {
    const auto fine_grid = TimeGrid(0.1, 1.0, 440);
    const auto coarse_grid = TimeGrid(0.1, 1.0, 110);
    const auto pol = VolPolicy::random_switch(2.0, {0.64, 1.69}, 8, kBounds);
    const auto fine = sample_gbm(pol, fine_grid, 7);
    const auto coarse = coarsen(fine, coarse_grid);
    ASSERT_EQ(coarse.b.size(), 101u);
    for (std::size_t j = 0; j < coarse.b.size(); ++j) {
        EXPECT_EQ(coarse.b[j], fine.b[4 * j]);
        EXPECT_EQ(coarse.qv[j], fine.qv[4 * j]);
    }
    for (double c : coarse.rate) {
        EXPECT_GE(c, 0.64 - 1e-12);
        EXPECT_LE(c, 1.69 + 1e-12);
    }
    EXPECT_THROW(coarsen(fine, TimeGrid(0.1, 1.0, 330)), Error);
}

TEST(ScenarioFamily, DefaultContainsExtremes) {
    const auto f = default_family(kBounds, 100, 1);
    ASSERT_EQ(f.policies.size(), 10u);
    EXPECT_EQ(f.policies[0].kind(), VolPolicy::Kind::Constant);
    EXPECT_EQ(f.policies[0].levels()[0], kBounds.var_min());
    EXPECT_EQ(f.policies[1].levels()[0], kBounds.var_max());
    EXPECT_NE(f.policies[2].stream(), f.policies[3].stream());
    ScenarioFamily empty;
    EXPECT_THROW(empty.validate(), Error);
}

TEST(UpperExpectation, ConvexTerminalMatchesPde) {
    const auto f = default_family(kBounds, 10000, 2024, 2);
    const auto g = unit_grid(20);
    const auto est = upper_expectation(terminal_square, f, g);
    const double oracle = pde_at_zero([](double x) { return x * x; });
    EXPECT_NEAR(oracle, 1.69, 1e-2);
    EXPECT_LE(std::abs(est.value - 1.69), 3.0 * est.best_se());
    EXPECT_EQ(est.rows.size(), f.policies.size());
}

TEST(UpperExpectation, ConcaveTerminalPicksLowerVolatility) {
    const auto f = default_family(kBounds, 10000, 2025, 2);
    const auto est = upper_expectation([](const GBMPath& p) { return -terminal_square(p); }, f, unit_grid(20));
    EXPECT_LE(std::abs(est.value + 0.64), 3.0 * est.best_se());
}

TEST(UpperExpectation, ConstantFunctional) {
    const auto f = default_family(kBounds, 50, 1, 3);
    const auto est = upper_expectation([](const GBMPath&) { return 2.5; }, f, unit_grid(10));
    EXPECT_EQ(est.value, 2.5);
}

TEST(UpperExpectation, MonotoneSubadditiveAndSupersetProperties) {
    const auto g = unit_grid(40);
    auto f = default_family(kBounds, 400, 77, 3);
    auto sq = [](const GBMPath& p) { return terminal_square(p); };
    auto sq_plus = [](const GBMPath& p) { return terminal_square(p) + std::abs(p.b[10]); };
    EXPECT_GE(upper_expectation(sq_plus, f, g).value, upper_expectation(sq, f, g).value);

    const std::vector<std::pair<PathFunctional, PathFunctional>> pairs{
        {sq, [](const GBMPath& p) { return -terminal_square(p); }},
        {[](const GBMPath& p) { return p.b.back(); }, [](const GBMPath& p) { return -p.qv.back(); }},
        {[](const GBMPath& p) { return std::abs(p.b[20]); }, [](const GBMPath& p) { return std::cos(p.b.back()); }},
    };
    for (const auto& [x, y] : pairs) {
        const double sum = upper_expectation([&](const GBMPath& p) { return x(p) + y(p); }, f, g).value;
        EXPECT_LE(sum, upper_expectation(x, f, g).value + upper_expectation(y, f, g).value + 1e-12);
    }

    auto small = f;
    small.policies.erase(small.policies.begin() + 2, small.policies.end());
    EXPECT_GE(upper_expectation(sq, f, g).value, upper_expectation(sq, small, g).value);
}

TEST(UpperExpectation, RejectionsAndDeterminism) {
    const auto g = unit_grid(10);
    const auto f = default_family(kBounds, 200, 3, 1);
    std::size_t calls = 0;
    auto sometimes_nan = [&](const GBMPath& p) {
        return (++calls % 100 == 0) ? std::numeric_limits<double>::quiet_NaN() : p.b.back();
    };
    const auto ok = upper_expectation(sometimes_nan, f, g);
    EXPECT_EQ(ok.rows[0].rejected, 2u);
    EXPECT_EQ(ok.rows[0].used, 198u);
    calls = 0;
    auto often_nan = [&](const GBMPath& p) {
        return (++calls % 10 == 0) ? std::numeric_limits<double>::quiet_NaN() : p.b.back();
    };
    try {
        upper_expectation(often_nan, f, g);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Estimation);
    }
    auto sq = [](const GBMPath& p) { return terminal_square(p); };
    EXPECT_EQ(upper_expectation(sq, f, g).value, upper_expectation(sq, f, g).value);
}

TEST(QvIdentity, SingleStepAlgebra) {
    const auto pol = VolPolicy::constant(1.0, kBounds);
    const auto p = sample_gbm(pol, TimeGrid(0.0, 0.25, 1), 11);
    const double db = p.b[1];
    EXPECT_NEAR(check_qv_identity(p), std::abs(0.25 - db * db), 1e-15);
    EXPECT_NEAR(qv_residual_terminal(p), 0.25 - db * db, 1e-15);
}

TEST(QvIdentity, ResidualShrinksUnderRefinement) {
    const auto pol = VolPolicy::constant(1.69, kBounds);
    double prev = 0.0;
    for (std::size_t steps : {16u, 64u, 256u}) {
        double ms = 0.0;
        for (std::size_t k = 0; k < 100; ++k) {
            const double r = qv_residual_terminal(sample_gbm(pol, unit_grid(steps), derive_seed(9, "qv", k)));
            ms += r * r;
        }
        const double rms = std::sqrt(ms / 100.0);
        if (prev > 0.0) EXPECT_GE(prev / rms, 1.7) << steps;
        prev = rms;
    }
}

TEST(Isometry, ZeroIntegrand) {
    const auto g = unit_grid(20);
    const auto c = check_isometry(StepIntegrand(20, 0.0), VolPolicy::constant(1.0, kBounds), g, 100, 1);
    EXPECT_EQ(c.lhs, 0.0);
    EXPECT_EQ(c.rhs, 0.0);
    EXPECT_EQ(c.gap, 0.0);
}

TEST(Isometry, ConstantAndHalfWindowIntegrands) {
    const auto g = unit_grid(50);
    const auto pol = VolPolicy::constant(1.44, kBounds);
    const auto full = check_isometry(make_integrand(g, [](double) { return 1.0; }), pol, g, 10000, 5);
    EXPECT_LE(std::abs(full.lhs - 1.44), 3.0 * full.lhs_se);
    EXPECT_NEAR(full.rhs, 1.44, 1e-12);
    EXPECT_LE(full.gap, 3.0 * full.combined_se());
    const auto half = check_isometry(make_integrand(g, [](double t) { return t < 0.5 ? 1.0 : 0.0; }), pol, g, 10000, 6);
    EXPECT_LE(std::abs(half.lhs - 0.72), 3.0 * half.lhs_se);
    EXPECT_NEAR(half.rhs, 0.72, 1e-12);
}

TEST(Isometry, LengthMismatchIsUsageError) {
    const auto g = unit_grid(20);
    EXPECT_THROW(check_isometry(StepIntegrand(3, 1.0), VolPolicy::constant(1.0, kBounds), g, 10, 1), Error);
}

TEST(Bdg, DoobBoundHolds) {
    const auto g = unit_grid(100);
    const auto pol = VolPolicy::random_switch(4.0, {0.64, 1.69}, 3, kBounds);
    for (auto eta : {std::function<double(double)>([](double) { return 1.0; }),
                     std::function<double(double)>([](double t) { return std::cos(6.0 * t); })}) {
        const auto c = check_bdg(make_integrand(g, eta), pol, g, 0.25, 0.75, 2000, 8);
        EXPECT_TRUE(c.holds()) << c.sup_moment << " vs " << c.qv_moment;
        EXPECT_GE(c.sup_moment, c.qv_moment - 3.0 * (c.sup_se + c.qv_se));
    }
    EXPECT_THROW(check_bdg(StepIntegrand(100, 1.0), pol, g, 0.5, 0.5, 10, 1), Error);
}
