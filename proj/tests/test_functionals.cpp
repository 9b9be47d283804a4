#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <random>

#include "gnsfde/error.hpp"
#include "gnsfde/functionals.hpp"

using namespace gnsfde;

namespace {

TimeGrid grid() { return TimeGrid(0.1, 1.0, 110); }

const ActionRange kActions{-1.0, 1.0};

std::vector<CoeffFunctional> builtin_family() {
    return {
        CoeffFunctional::pointwise(0.7),
        CoeffFunctional::pointwise(-1.5, {0.5, 2.0, 0.3}),
        CoeffFunctional::integral(10.0),
        CoeffFunctional::integral(3.0, {1.0, -0.5, 1.0}),
        CoeffFunctional::affine(2.0, -0.4),
        CoeffFunctional::affine(-0.9, 1.0, {0.0, 1.0, 0.0}),
        CoeffFunctional::integral(5.0, {}, 0.2),
        CoeffFunctional::pointwise(4.0, {1.0, 1.0, 0.0}, 1.5),
    };
}

// Brute-force worst ratio |f(x) - f(y)| / sup|x - y| over probe pairs and sampled actions.
double worst_ratio(const CoeffFunctional& f, const std::vector<std::pair<Path, Path>>& probes, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> anchor(grid().zero_index(), grid().steps());
    std::uniform_real_distribution<double> action(kActions.lo, kActions.hi);
    double worst = 0.0;
    for (const auto& [x, y] : probes) {
        const std::size_t k = anchor(rng);
        const Segment sx(x, k);
        const Segment sy(y, k);
        const double d = sx.sup_distance(sy);
        if (d == 0.0) continue;
        const auto u = f.controlled() ? std::optional<double>(action(rng)) : std::nullopt;
        worst = std::max(worst, std::abs(f(0.0, sx, u) - f(0.0, sy, u)) / d);
    }
    return worst;
}

}  // namespace

TEST(EvalCoeff, ExampleNeutralTermOnConstantSegment) {
    const auto q = CoeffSet::example(0.1).q();
    for (double x : {-2.0, 0.0, 1.0, 3.5}) {
        const Path p(grid(), x);
        EXPECT_NEAR(q(0.0, Segment(p, 60)), 0.03 * x, 1e-14);
    }
}

TEST(EvalCoeff, ZeroSegment) {
    const Path p(grid(), 0.0);
    for (const auto& f : builtin_family()) {
        if (f.offset() != 0.0) continue;
        const auto u = f.controlled() ? std::optional<double>(0.0) : std::nullopt;
        EXPECT_EQ(f(0.0, Segment(p, 40), u), 0.0) << f.describe();
    }
}

TEST(EvalCoeff, CoupledPointwise) {
    const Path p(grid(), 1.0);
    const auto f = CoeffFunctional::pointwise(2.0, {1.0, 1.0, 0.0});
    EXPECT_DOUBLE_EQ(f(0.0, Segment(p, 30), 0.5), 3.0);
}

TEST(EvalCoeff, ControlRequiredIffControlled) {
    const Path p(grid(), 1.0);
    const Segment s(p, 30);
    try {
        CoeffFunctional::integral(1.0, {1.0, 0.0, 1.0})(0.0, s);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Usage);
    }
    EXPECT_THROW(CoeffFunctional::integral(1.0)(0.0, s, 0.5), Error);
}

TEST(EvalCoeff, ClampBoundsExactly) {
    const auto f = CoeffFunctional::pointwise(1.0, {}, 2.0);
    EXPECT_EQ(f(0.0, Segment(Path(grid(), 50.0), 30)), 2.0);
    EXPECT_EQ(f(0.0, Segment(Path(grid(), -50.0), 30)), -2.0);
    EXPECT_EQ(f(0.0, Segment(Path(grid(), 1.25), 30)), 1.25);
    EXPECT_EQ(f.bound(kActions).value_or(-1.0), 2.0);
    EXPECT_FALSE(CoeffFunctional::integral(1.0).bound(kActions).has_value());
    EXPECT_EQ(CoeffFunctional::affine(0.0, -0.7).bound(kActions).value_or(-1.0), 0.7);
}

TEST(EvalCoeff, DiracConsistency) {
    const auto probes = random_probe_pairs(grid(), 20, 4);
    const std::array<double, 3> atoms{-1.0, 0.0, 1.0};
    for (const auto& f : builtin_family()) {
        if (!f.controlled()) continue;
        for (const auto& [x, _] : probes) {
            const Segment s(x, 80);
            for (std::size_t i = 0; i < atoms.size(); ++i) {
                std::array<double, 3> w{0.0, 0.0, 0.0};
                w[i] = 1.0;
                EXPECT_DOUBLE_EQ(f.relaxed(0.0, s, atoms, w), f(0.0, s, atoms[i]));
            }
        }
    }
}

TEST(EvalCoeff, RelaxedIsWeightAverage) {
    const auto f = CoeffFunctional::pointwise(2.0, {1.0, 1.0, 0.5});
    const Segment s(Path(grid(), 1.0), 30);
    const std::array<double, 2> atoms{-1.0, 1.0};
    const std::array<double, 2> w{0.25, 0.75};
    EXPECT_NEAR(f.relaxed(0.0, s, atoms, w), 0.25 * f(0.0, s, -1.0) + 0.75 * f(0.0, s, 1.0), 1e-14);
}

TEST(Lipschitz, ExampleSet) {
    const auto r = lipschitz_constants(CoeffSet::example(0.1));
    EXPECT_NEAR(r.k0, 0.03, 1e-15);
    EXPECT_TRUE(r.k0_ok);
    EXPECT_NEAR(r.k1, 1.0, 1e-14);
    EXPECT_NEAR(r.contraction, std::sqrt(8.0 * 0.03 * 0.03 + 0.5), 1e-15);
    EXPECT_TRUE(r.contraction_ok);
}

TEST(Lipschitz, NeutralTermThreshold) {
    const auto z = CoeffFunctional::zero();
    const CoeffSet ok(CoeffFunctional::pointwise(0.2), z, z, z, 0.1);
    EXPECT_NEAR(lipschitz_constants(ok).k0, 0.2, 1e-15);
    try {
        CoeffSet(CoeffFunctional::pointwise(0.3), z, z, z, 0.1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Config);
    }
    const CoeffSet loose(CoeffFunctional::pointwise(0.3), z, z, z, 0.1, {}, true);
    EXPECT_TRUE(loose.assumption_violating());
    EXPECT_FALSE(lipschitz_constants(loose).k0_ok);
}

TEST(Lipschitz, ControlledNeutralTermOrDiffusionRejected) {
    const auto z = CoeffFunctional::zero();
    const auto u = CoeffFunctional::integral(1.0, {1.0, 0.0, 1.0});
    EXPECT_THROW(CoeffSet(u, z, z, z, 0.1, kActions), Error);
    EXPECT_THROW(CoeffSet(z, z, z, u, 0.1, kActions), Error);
    EXPECT_NO_THROW(CoeffSet(z, u, u, z, 0.1, kActions));
}

TEST(Lipschitz, EmpiricalRatiosNeverExceedDeclared) {
    const auto probes = random_probe_pairs(grid(), 10000, 2026);
    std::uint64_t seed = 1;
    for (const auto& f : builtin_family()) {
        const double declared = f.lipschitz(0.1, kActions);
        EXPECT_LE(worst_ratio(f, probes, seed++), declared * (1.0 + 1e-9)) << f.describe();
    }
}

TEST(ValidateAssumptions, ExampleSetPasses) {
    const auto probes = random_probe_pairs(grid(), 1000, 5);
    const auto rep = validate_assumptions(CoeffSet::example(0.1), CostSpec{}, probes);
    ASSERT_EQ(rep.lipschitz.size(), 4u);
    for (const auto& e : rep.lipschitz) {
        EXPECT_TRUE(e.pass) << e.name;
        EXPECT_LE(e.worst_ratio, e.declared * (1.0 + 1e-9)) << e.name;
        EXPECT_GT(e.probes, 0u);
    }
    EXPECT_FALSE(rep.a4_bounded);
}

TEST(ValidateAssumptions, IdenticalProbesAreSkipped) {
    const Path x(grid(), 0.3);
    const std::vector<std::pair<Path, Path>> same{{x, x}, {x, x}};
    const auto rep = validate_assumptions(CoeffSet::example(0.1), CostSpec{}, same);
    for (const auto& e : rep.lipschitz) {
        EXPECT_TRUE(e.pass);
        EXPECT_EQ(e.worst_ratio, 0.0);
    }
}

TEST(ValidateAssumptions, UnclampedQuadraticCostIsFlagged) {
    const auto probes = random_probe_pairs(grid(), 10, 5);
    CostSpec cost;
    cost.q = 1.0;
    EXPECT_FALSE(validate_assumptions(CoeffSet::example(0.1), cost, probes).a3_running_bounded);
    cost.running_clamp = 100.0;
    EXPECT_TRUE(validate_assumptions(CoeffSet::example(0.1), cost, probes).a3_running_bounded);
    cost.p = 2.0;
    EXPECT_FALSE(validate_assumptions(CoeffSet::example(0.1), cost, probes).a3_terminal_bounded);
}

TEST(CostSpec, Formulas) {
    CostSpec c;
    c.q = 2.0;
    c.r = 0.5;
    c.u_ref = 0.3;
    c.lin = 1.0;
    c.p = 3.0;
    EXPECT_DOUBLE_EQ(c.running(1.5, -0.7), 2.0 * 2.25 + 0.5 * 1.0 - 0.7);
    EXPECT_DOUBLE_EQ(c.terminal(-2.0), 12.0);
    const std::array<double, 2> atoms{-1.0, 1.0};
    const std::array<double, 2> w{0.5, 0.5};
    EXPECT_DOUBLE_EQ(c.running_relaxed(1.0, atoms, w), 0.5 * c.running(1.0, -1.0) + 0.5 * c.running(1.0, 1.0));
    c.running_clamp = 1.0;
    c.terminal_clamp = 4.0;
    EXPECT_EQ(c.running(10.0, 0.0), 1.0);
    EXPECT_EQ(c.terminal(10.0), 4.0);
}
