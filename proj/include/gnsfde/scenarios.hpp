#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gnsfde/core_types.hpp"
#include "gnsfde/gheat.hpp"
#include "gnsfde/stats.hpp"

namespace gnsfde {

/**
 * Adapted quadratic-variation rate c_t in [sigma_min^2, sigma_max^2]. Each policy
 * selects one measure of the uncertainty family: under it B is a martingale
 * with d<B>_t = c_t dt.
 */
class VolPolicy {
public:
    enum class Kind { Constant, PiecewiseConstant, RandomSwitch };

    static VolPolicy constant(double rate, const VolBounds& bounds);
    /// Level i holds on [breakpoints[i-1], breakpoints[i]); levels.size() == breakpoints.size() + 1.
    static VolPolicy piecewise(std::vector<double> breakpoints, std::vector<double> levels,
                               const VolBounds& bounds);
    /// Markov switching among `levels` with exponential holding times of the given
    /// rate; the switching stream is derived from `stream` and the sample seed and
    /// is independent of the Brownian increments.
    static VolPolicy random_switch(double rate, std::vector<double> levels, std::uint64_t stream,
                                   const VolBounds& bounds);

    Kind kind() const noexcept { return kind_; }
    const std::vector<double>& levels() const noexcept { return levels_; }
    const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
    double switch_rate() const noexcept { return rate_; }
    std::uint64_t stream() const noexcept { return stream_; }
    std::string label() const;

    /// Rate c_j on each forward step [t_j, t_{j+1}) of the grid.
    std::vector<double> realize(const TimeGrid& grid, std::uint64_t sample_seed) const;

private:
    VolPolicy(Kind kind, std::vector<double> breakpoints, std::vector<double> levels, double rate,
              std::uint64_t stream);

    Kind kind_;
    std::vector<double> breakpoints_;
    std::vector<double> levels_;
    double rate_ = 0.0;
    std::uint64_t stream_ = 0;
};

/// One sampled G-Brownian path on the forward part [0, T] of a grid. Index j
/// corresponds to grid node zero_index() + j.
struct GBMPath {
    TimeGrid grid;
    std::vector<double> b;     // B_{t_j}, size M+1
    std::vector<double> qv;    // <B>_{t_j}, size M+1
    std::vector<double> rate;  // c_j on [t_j, t_{j+1}), size M

    std::size_t forward_steps() const noexcept { return rate.size(); }
    double db(std::size_t j) const noexcept { return b[j + 1] - b[j]; }
    double dqv(std::size_t j) const noexcept { return qv[j + 1] - qv[j]; }
};

/// dB_j = sqrt(c_j h) xi_j, d<B>_j = c_j h. The normals xi depend only on `seed`,
/// so different policies sampled with the same seed share common random numbers.
GBMPath sample_gbm(const VolPolicy& policy, const TimeGrid& grid, std::uint64_t seed);

/// Aggregate a path sampled on a fine grid onto a grid whose step is `factor` times larger.
GBMPath coarsen(const GBMPath& fine, const TimeGrid& coarse);

/// Finite surrogate of the family of measures representing the G-expectation.
struct ScenarioFamily {
    std::vector<VolPolicy> policies;
    std::size_t samples = 1000;
    std::uint64_t seed = 0;

    /// Noise seed of sample k, shared by every policy.
    std::uint64_t sample_seed(std::size_t k) const noexcept;
    void validate() const;
};

/// {c = sigma_min^2, c = sigma_max^2} plus `switchers` random switching policies
/// with independent streams.
ScenarioFamily default_family(const VolBounds& bounds, std::size_t samples, std::uint64_t seed,
                              std::size_t switchers = 8);

/// All sampled paths of a family, grouped by policy.
struct ScenarioEnsemble {
    std::vector<std::vector<GBMPath>> by_policy;
};
ScenarioEnsemble sample_family(const ScenarioFamily& family, const TimeGrid& grid);

using PathFunctional = std::function<double(const GBMPath&)>;

struct PolicyEstimate {
    std::string label;
    double mean = 0.0;
    double se = 0.0;
    std::size_t used = 0;
    std::size_t rejected = 0;
};

struct UpperEstimate {
    double value = 0.0;
    std::size_t best_policy = 0;
    std::vector<PolicyEstimate> rows;

    double best_se() const { return rows.at(best_policy).se; }
};

struct UpperOptions {
    /// Functional values are clamped to [-clamp, clamp].
    double clamp = 1e6;
    /// Maximum fraction of non-finite evaluations tolerated per policy.
    double max_reject_fraction = 0.01;
};

/// max over policies of the Monte-Carlo mean of F. A lower bound of the
/// sublinear expectation over all adapted scenarios.
UpperEstimate upper_expectation(const PathFunctional& f, const ScenarioFamily& family, const TimeGrid& grid,
                                const UpperOptions& options = {});

/// max_k |<B>_{t_k} - (B_{t_k}^2 - 2 sum_{i<k} B_{t_i} (B_{t_{i+1}} - B_{t_i}))|.
double check_qv_identity(const GBMPath& path);
/// Signed residual of the same identity at T.
double qv_residual_terminal(const GBMPath& path);

/// Deterministic step integrand: value on each forward step of the grid.
using StepIntegrand = std::vector<double>;
StepIntegrand make_integrand(const TimeGrid& grid, const std::function<double(double)>& eta);

struct IsometryCheck {
    double lhs = 0.0;  // E[(sum eta dB)^2]
    double lhs_se = 0.0;
    double rhs = 0.0;  // E[sum eta^2 d<B>]
    double rhs_se = 0.0;
    double gap = 0.0;
    double combined_se() const;
};

IsometryCheck check_isometry(const StepIntegrand& eta, const VolPolicy& policy, const TimeGrid& grid,
                             std::size_t samples, std::uint64_t seed);

struct BdgCheck {
    double sup_moment = 0.0;  // E[sup_{s<=u<=t} |int_s^u eta dB|^2]
    double sup_se = 0.0;
    double qv_moment = 0.0;  // E[int_s^t eta^2 d<B>]
    double qv_se = 0.0;
    double constant = 4.0;
    bool holds() const;
};

BdgCheck check_bdg(const StepIntegrand& eta, const VolPolicy& policy, const TimeGrid& grid, double s, double t,
                   std::size_t samples, std::uint64_t seed);

}  // namespace gnsfde
