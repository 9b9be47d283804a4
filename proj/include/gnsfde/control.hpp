#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gnsfde/controls.hpp"
#include "gnsfde/functionals.hpp"
#include "gnsfde/nsfde.hpp"
#include "gnsfde/scenarios.hpp"
#include "gnsfde/stats.hpp"

namespace gnsfde {

/// Everything needed to price a control: dynamics, cost, initial history, solver settings.
struct ControlProblem {
    CoeffSet coeffs;
    CostSpec cost;
    Path eta;
    EulerConfig euler;

    const TimeGrid& grid() const noexcept { return eta.grid(); }
};

/// Phi(u): each block's row is the unit mass on the block's atom.
RelaxedControl dirac_embed(const StrictControl& u);

/**
 * Chattering approximation of a relaxed control. Every macro block is cut into
 * n micro-slots; inside each slot the atoms with positive weight (ascending
 * order) occupy contiguous sub-slots proportional to their weights. Adjacent
 * pieces with the same atom inside a block are merged.
 *
 * Throws a config error if a micro-slot is shorter than `grid_step`.
 */
StrictControl chattering_approx(const RelaxedControl& mu, std::size_t n, double grid_step);

/// Test function f(t, xi) = t^p xi^q.
struct TestMonomial {
    int p = 0;
    int q = 0;
};
/// t^p xi^q for p, q in {0, 1, 2}.
std::vector<TestMonomial> default_test_set();

/// int_{[0,T] x A} f dmu, exact piecewise integration.
double integrate(const RelaxedControl& mu, TestMonomial f);

/// max_f |int f dPhi(u) - int f dmu| over the test set.
double stable_convergence_gap(const RelaxedControl& mu, const StrictControl& u, std::span<const TestMonomial> tests);

/// Per macro block of `blocks` and per atom, fraction of grid steps (by left node) where u takes that atom.
std::vector<std::vector<double>> grid_occupancy(const StrictControl& u, const std::vector<double>& blocks,
                                                const TimeGrid& grid);

/// sum_j h L(X(t_j), row_j) + Psi(X(T)) for one simulated path.
double pathwise_cost(const Path& x, const StepControls& controls, const CostSpec& cost);

/// J^P: Monte-Carlo mean (and SE) of the pathwise cost under one policy. Sample k
/// uses the noise seed ScenarioFamily{.seed = seed}.sample_seed(k).
MeanSe cost_under_P(const StepControls& controls, const VolPolicy& policy, const ControlProblem& problem,
                    std::size_t samples, std::uint64_t seed);
MeanSe cost_under_P(const StrictControl& u, const VolPolicy& policy, const ControlProblem& problem,
                    std::size_t samples, std::uint64_t seed);
MeanSe cost_under_P(const RelaxedControl& mu, const VolPolicy& policy, const ControlProblem& problem,
                    std::size_t samples, std::uint64_t seed);

struct CostEstimate {
    double j = 0.0;
    double se = 0.0;  // of the maximizing policy
    std::size_t best_policy = 0;
    std::vector<MeanSe> per_policy;
    std::vector<double> samples_best;  // pathwise costs under the maximizing policy
};

/// J = max over the family of J^P, common random numbers across policies.
CostEstimate cost(const StepControls& controls, const ScenarioFamily& family, const ScenarioEnsemble& ensemble,
                  const ControlProblem& problem);
CostEstimate cost(const StrictControl& u, const ScenarioFamily& family, const ControlProblem& problem);
CostEstimate cost(const RelaxedControl& mu, const ScenarioFamily& family, const ControlProblem& problem);

struct StabilityPoint {
    std::size_t n = 0;
    double gap = 0.0;  // E^[sup_t |X^n(t) - X^mu(t)|^2]
    double gap_se = 0.0;
    double cost_gap = 0.0;  // |J(u^n) - J(mu)|
    double cost_gap_se = 0.0;
    double j_chattered = 0.0;
    double j_relaxed = 0.0;
    double stable_gap = 0.0;  // stable_convergence_gap on the default test set
};

StabilityPoint stability_gap(const RelaxedControl& mu, std::size_t n, const ScenarioFamily& family,
                             const ControlProblem& problem);
std::vector<StabilityPoint> chattering_convergence(const RelaxedControl& mu, std::span<const std::size_t> ns,
                                                   const ScenarioFamily& family, const ControlProblem& problem);

struct CandidateRow {
    std::string encoding;
    std::vector<double> per_policy;
    double j = 0.0;
    bool dirac = true;
};

struct StrictSearch {
    StrictControl best;
    double j = 0.0;
    double se = 0.0;
    std::vector<CandidateRow> candidates;
};

struct RelaxedSearch {
    RelaxedControl best;
    double j = 0.0;
    double se = 0.0;
    /// Minimum over the Dirac candidates of the search set (the strict controls).
    double strict_j = 0.0;
    double strict_se = 0.0;
    std::vector<CandidateRow> candidates;
};

struct SearchOptions {
    std::size_t max_candidates = 100000;
    bool keep_table = true;
};

/// Exhaustive search over m^K block-wise atom assignments on K uniform blocks.
/// Ties resolve to the lexicographically first assignment.
StrictSearch optimize_strict(const ScenarioFamily& family, const ControlProblem& problem, const ActionGrid& actions,
                             std::size_t blocks, const SearchOptions& options = {});

/// Exhaustive search over the product of per-block simplex grids with weights k/resolution.
RelaxedSearch optimize_relaxed(const ScenarioFamily& family, const ControlProblem& problem, const ActionGrid& actions,
                               std::size_t blocks, std::size_t resolution, const SearchOptions& options = {});

/// All weight vectors over m atoms with entries k/resolution, lexicographic in (k_1, ..., k_m).
std::vector<std::vector<double>> simplex_grid(std::size_t atoms, std::size_t resolution);

}  // namespace gnsfde
