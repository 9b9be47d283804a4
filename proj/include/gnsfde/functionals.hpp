#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gnsfde/core_types.hpp"

namespace gnsfde {

/// Compact action interval A = [lo, hi].
struct ActionRange {
    double lo = 0.0;
    double hi = 0.0;
};

/// Multiplier (c0 + c1 u) on the state part plus an additive c2 u.
struct ControlCoupling {
    double c0 = 1.0;
    double c1 = 0.0;
    double c2 = 0.0;

    bool controlled() const noexcept { return c1 != 0.0 || c2 != 0.0; }
};

/**
 * One coefficient of the neutral equation, from a closed parametric family:
 *
 *   PointwiseAt0:    scale * x(0)
 *   IntegralKernel:  scale * int_{t-tau}^t X(s) ds
 *   Affine:          scale * x(0) + offset
 *
 * then (c0 + c1 u) * base + c2 u, then an optional clamp to [-M, M].
 */
class CoeffFunctional {
public:
    enum class Kind { PointwiseAt0, IntegralKernel, Affine };

    static CoeffFunctional pointwise(double scale, ControlCoupling coupling = {},
                                     std::optional<double> clamp = std::nullopt);
    static CoeffFunctional integral(double scale, ControlCoupling coupling = {},
                                    std::optional<double> clamp = std::nullopt);
    static CoeffFunctional affine(double scale, double offset, ControlCoupling coupling = {},
                                  std::optional<double> clamp = std::nullopt);
    static CoeffFunctional zero() { return affine(0.0, 0.0); }

    Kind kind() const noexcept { return kind_; }
    double scale() const noexcept { return scale_; }
    double offset() const noexcept { return offset_; }
    const ControlCoupling& coupling() const noexcept { return coupling_; }
    const std::optional<double>& clamp() const noexcept { return clamp_; }
    bool controlled() const noexcept { return coupling_.controlled(); }
    /// True when the value does not depend on the segment at all.
    bool state_free() const noexcept { return scale_ == 0.0; }

    double base(const Segment& seg) const noexcept;
    /// Evaluate at time t. `u` must be given iff the functional is controlled.
    double operator()(double t, const Segment& seg, std::optional<double> u = std::nullopt) const;
    /// Weight average over action atoms (a relaxed control restricted to one instant).
    double relaxed(double t, const Segment& seg, std::span<const double> atoms,
                   std::span<const double> weights) const;

    /// Lipschitz constant w.r.t. the sup-norm on segments of delay `tau`, uniform over u in `range`.
    double lipschitz(double tau, const ActionRange& range) const noexcept;
    /// Bound on |f| independent of the segment, if any.
    std::optional<double> bound(const ActionRange& range) const noexcept;

    std::string describe() const;

private:
    CoeffFunctional(Kind kind, double scale, double offset, ControlCoupling coupling, std::optional<double> clamp);

    Kind kind_;
    double scale_;
    double offset_;
    ControlCoupling coupling_;
    std::optional<double> clamp_;
};

struct LipschitzReport {
    double k1 = 0.0;  // common constant of b, gamma, sigma
    double k0 = 0.0;  // constant of the neutral term Q
    bool k0_ok = false;
    double contraction = 0.0;  // sqrt(8 k0^2 + 1/2)
    bool contraction_ok = false;
};

/// Coefficients Q, b, gamma, sigma of the controlled neutral equation.
class CoeffSet {
public:
    /// Throws a config error unless Q and sigma are uncontrolled and k0 < 1/4;
    /// `allow_violation` accepts k0 >= 1/4 and marks the set as violating.
    CoeffSet(CoeffFunctional q, CoeffFunctional b, CoeffFunctional gamma, CoeffFunctional sigma, double tau,
             ActionRange actions = {}, bool allow_violation = false);

    /// Coefficients of the worked example: Q = 0.3 I, b = 10 I, gamma = 0.4 I,
    /// sigma = 5 I with I = int_{t-tau}^t X(s) ds.
    static CoeffSet example(double tau);
    static CoeffSet zeros(double tau);

    const CoeffFunctional& q() const noexcept { return q_; }
    const CoeffFunctional& b() const noexcept { return b_; }
    const CoeffFunctional& gamma() const noexcept { return gamma_; }
    const CoeffFunctional& sigma() const noexcept { return sigma_; }
    double tau() const noexcept { return tau_; }
    const ActionRange& actions() const noexcept { return actions_; }
    bool assumption_violating() const noexcept { return violating_; }

private:
    CoeffFunctional q_, b_, gamma_, sigma_;
    double tau_;
    ActionRange actions_;
    bool violating_ = false;
};

LipschitzReport lipschitz_constants(const CoeffSet& set) noexcept;

/// L(x, u) = q x^2 + r (u - u_ref)^2 + lin u and Psi(x) = p x^2, each optionally clamped to [-M, M].
struct CostSpec {
    double q = 0.0;
    double r = 0.0;
    double u_ref = 0.0;
    double lin = 0.0;
    double p = 0.0;
    std::optional<double> running_clamp;
    std::optional<double> terminal_clamp;

    double running(double x, double u) const noexcept;
    double running_relaxed(double x, std::span<const double> atoms, std::span<const double> weights) const noexcept;
    double terminal(double x) const noexcept;
    bool running_bounded() const noexcept { return running_clamp.has_value() || q == 0.0; }
    bool terminal_bounded() const noexcept { return terminal_clamp.has_value() || p == 0.0; }
};

struct AssumptionEntry {
    std::string name;
    double declared = 0.0;
    double worst_ratio = 0.0;
    std::size_t probes = 0;
    bool pass = true;
};

struct AssumptionReport {
    std::vector<AssumptionEntry> lipschitz;  // Q, b, gamma, sigma
    bool a3_running_bounded = true;
    bool a3_terminal_bounded = true;
    bool a4_bounded = true;  // b, gamma, sigma all bounded
    bool pass() const;
};

/// Randomized path pairs on `grid` for probing Lipschitz ratios at random anchors.
std::vector<std::pair<Path, Path>> random_probe_pairs(const TimeGrid& grid, std::size_t count, std::uint64_t seed);

/// Empirical check of the Lipschitz inequalities on the probes (tolerance 1e-9
/// relative to the declared constant) plus the boundedness assumptions.
AssumptionReport validate_assumptions(const CoeffSet& set, const CostSpec& cost,
                                      const std::vector<std::pair<Path, Path>>& probes, std::uint64_t seed = 0);

}  // namespace gnsfde
