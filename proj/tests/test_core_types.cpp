#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "gnsfde/core_types.hpp"
#include "gnsfde/error.hpp"

using namespace gnsfde;

namespace {

// tau = 0.1, T = 1, h = 0.01.
TimeGrid small_grid() { return TimeGrid(0.1, 1.0, 110); }

template <class F>
void expect_kind(ErrorKind kind, F&& f) {
    try {
        f();
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), kind) << e.what();
    }
}

}  // namespace

TEST(TimeGrid, NodesAndZeroIndex) {
    const auto g = small_grid();
    EXPECT_EQ(g.zero_index(), 10u);
    EXPECT_EQ(g.size(), 111u);
    EXPECT_EQ(g.forward_steps(), 100u);
    EXPECT_EQ(g.time(g.zero_index()), 0.0);
    EXPECT_NEAR(g.time(0), -0.1, 1e-15);
    EXPECT_NEAR(g.time(g.steps()), 1.0, 1e-12);
    for (std::size_t k = 1; k < g.size(); ++k) EXPECT_GT(g.time(k), g.time(k - 1));
}

TEST(TimeGrid, RejectsMisalignedDelay) {
    try {
        TimeGrid(0.1, 1.0, 7);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Config);
        ASSERT_TRUE(e.field().has_value());
        EXPECT_EQ(*e.field(), "grid.steps");
    }
    expect_kind(ErrorKind::Config, [] { TimeGrid(-0.1, 1.0, 10); });
    expect_kind(ErrorKind::Config, [] { TimeGrid(0.1, 0.0, 10); });
    expect_kind(ErrorKind::Config, [] { TimeGrid(0.1, 1.0, 0); });
}

TEST(TimeGrid, ZeroDelayIsAllowed) {
    const TimeGrid g(0.0, 1.0, 64);
    EXPECT_EQ(g.zero_index(), 0u);
    EXPECT_EQ(g.forward_steps(), 64u);
}

TEST(Path, ValidatesLengthAndFiniteness) {
    const auto g = small_grid();
    expect_kind(ErrorKind::Usage, [&] { Path(g, std::vector<double>(5, 0.0)); });
    std::vector<double> v(g.size(), 1.0);
    v[3] = std::numeric_limits<double>::quiet_NaN();
    expect_kind(ErrorKind::Input, [&] { Path(g, v); });
}

TEST(Path, FromHistoryFreezesForwardNodes) {
    const auto g = small_grid();
    const auto p = Path::from_history(g, [](double t) { return std::exp(t); });
    EXPECT_NEAR(p[0], std::exp(-0.1), 1e-15);
    EXPECT_EQ(p.at_zero(), 1.0);
    EXPECT_EQ(p.terminal(), 1.0);
    EXPECT_EQ(p.padded(-1), p[0]);
}

TEST(Segment, ConstantPath) {
    const Path p(small_grid(), 3.0);
    const Segment s(p, 50);
    for (double lambda : {0.0, -0.003, -0.05, -0.1}) EXPECT_EQ(s(lambda), 3.0);
}

TEST(Segment, AffinePathIsInterpolatedExactly) {
    const auto g = small_grid();
    Path p(g);
    for (std::size_t k = 0; k < g.size(); ++k) p[k] = 2.0 + g.time(k);
    const Segment s(p, 40);
    const double t = g.time(40);
    const double h = g.step();
    EXPECT_NEAR(s(-h / 2.0), p[40] - h / 2.0, 1e-12);
    for (double lambda = -0.1; lambda <= 0.0; lambda += 0.0037) EXPECT_NEAR(s(lambda), 2.0 + t + lambda, 1e-12);
}

TEST(Segment, QuarterStepInterpolation) {
    const auto g = small_grid();
    Path p(g, 0.0);
    p[20] = 2.0;
    const Segment s(p, 20);
    EXPECT_DOUBLE_EQ(s(-g.step() / 4.0), 1.5);
}

TEST(Segment, NodeHitsReturnStoredValues) {
    const auto g = small_grid();
    std::mt19937_64 rng(7);
    std::normal_distribution<double> z;
    Path p(g);
    for (std::size_t k = 0; k < g.size(); ++k) p[k] = z(rng);
    const std::size_t anchor = 60;
    const Segment s(p, anchor);
    for (std::size_t j = 0; j <= g.zero_index(); ++j) {
        const double lambda = g.time(anchor - j) - g.time(anchor);
        EXPECT_EQ(s(lambda), p[anchor - j]);
    }
}

TEST(Segment, DomainErrors) {
    const Path p(small_grid(), 1.0);
    const Segment s(p, 30);
    expect_kind(ErrorKind::Domain, [&] { (void)s(0.01); });
    expect_kind(ErrorKind::Domain, [&] { (void)s(-0.11); });
    expect_kind(ErrorKind::Domain, [&] { Segment(p, 5); });
    expect_kind(ErrorKind::Domain, [&] { Segment(p, 111); });
}

TEST(IntegralFunctional, ClosedForms) {
    const auto g = small_grid();
    const Path c(g, 4.0);
    EXPECT_NEAR(Segment(c, 50).integral(), 0.1 * 4.0, 1e-14);
    const Path zero(g, 0.0);
    EXPECT_EQ(Segment(zero, 50).integral(), 0.0);

    // Affine from 0 at t - tau to 1 at t.
    Path ramp(g, 0.0);
    const std::size_t anchor = 70;
    for (std::size_t j = 0; j <= g.zero_index(); ++j) {
        ramp[anchor - g.zero_index() + j] = static_cast<double>(j) / static_cast<double>(g.zero_index());
    }
    EXPECT_NEAR(Segment(ramp, anchor).integral(), 0.05, 1e-14);
}

TEST(IntegralFunctional, LinearAndMonotone) {
    const auto g = small_grid();
    std::mt19937_64 rng(11);
    std::normal_distribution<double> z;
    for (int trial = 0; trial < 50; ++trial) {
        Path x(g), y(g), sum(g), bigger(g);
        const double a = z(rng);
        for (std::size_t k = 0; k < g.size(); ++k) {
            x[k] = z(rng);
            y[k] = z(rng);
            sum[k] = a * x[k] + y[k];
            bigger[k] = x[k] + std::abs(z(rng));
        }
        const std::size_t anchor = 10 + static_cast<std::size_t>(trial) * 2;
        const double ix = Segment(x, anchor).integral();
        const double iy = Segment(y, anchor).integral();
        EXPECT_NEAR(Segment(sum, anchor).integral(), a * ix + iy, 1e-12);
        EXPECT_GE(Segment(bigger, anchor).integral(), ix);
    }
}

TEST(Segment, SupDistance) {
    const auto g = small_grid();
    Path x(g, 1.0), y(g, 1.0);
    y[45] = 1.25;
    EXPECT_DOUBLE_EQ(Segment(x, 50).sup_distance(Segment(y, 50)), 0.25);
    EXPECT_DOUBLE_EQ(Segment(x, 60).sup_distance(Segment(y, 60)), 0.0);
}
