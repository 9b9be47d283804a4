#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gnsfde/controls.hpp"
#include "gnsfde/core_types.hpp"
#include "gnsfde/functionals.hpp"
#include "gnsfde/scenarios.hpp"

namespace gnsfde {

struct EulerConfig {
    double tolerance = 1e-12;
    std::size_t max_iterations = 50;
    /// |X| above this aborts the march with a divergence error.
    double state_clamp = 1e12;

    void validate() const;
};

/**
 * Euler-Maruyama march of the neutral equation
 *
 *   X(t_{i+1}) - Q(t_{i+1}, X_{t_{i+1}}) = X(t_i) - Q(t_i, X_{t_i})
 *       + b(t_i, X_{t_i}, u) h + gamma(t_i, X_{t_i}, u) d<B>_i + sigma(t_i, X_{t_i}) dB_i
 *
 * with d<B>_i, dB_i the increments over [t_i, t_{i+1}]. When Q reads X(t_{i+1})
 * the step is solved by fixed-point iteration. `controls` may be null for an
 * uncontrolled set; b and gamma are weight-averaged over the atoms of each
 * step's row. The history of `eta` (nodes t <= 0) is copied verbatim.
 *
 * Throws Error(Step) if the neutral solve does not converge and
 * Error(Divergence) if |X| exceeds the clamp; both carry the grid node index.
 */
Path simulate_nsfde(const CoeffSet& coeffs, const Path& eta, const GBMPath& gbm, const StepControls* controls,
                    const EulerConfig& cfg = {});

inline Path simulate_nsfde(const CoeffSet& coeffs, const Path& eta, const GBMPath& gbm,
                           const EulerConfig& cfg = {}) {
    return simulate_nsfde(coeffs, eta, gbm, nullptr, cfg);
}

/// Picard operator evaluated on the frozen input path, left-endpoint sums:
/// Theta(X)(t_k) = eta(0) + Q(t_k, X_{t_k}) - Q(0, eta) + sum_{i<k} [b h + gamma d<B> + sigma dB](X_{t_i}).
/// The history of the result (and of X when read) is eta.
Path picard_apply(const Path& x, const CoeffSet& coeffs, const Path& eta, const GBMPath& gbm,
                  const StepControls* controls);

struct NCNormConfig {
    double c = 0.0;

    /// C = 8 K1^2 (T + T sigma_max^2 + C2).
    static NCNormConfig from(double k1, double horizon, double sigma_max, double c2 = 4.0);
};

/// Paths grouped per policy; group g of X is matched sample-by-sample with group g of Y.
using PathGroups = std::vector<std::vector<Path>>;

/// (int_0^T exp(-2Cs) E^|X(s) - Y(s)|^2 ds)^{1/2}, trapezoid over the forward
/// nodes, with E^ the maximum over groups of the group mean.
double nc_norm(const PathGroups& x, const PathGroups& y, const NCNormConfig& cfg);
double nc_norm(const Path& x, const Path& y, const NCNormConfig& cfg);

using GBMGroups = std::vector<std::vector<GBMPath>>;

/// N_C(Theta X - Theta Y) / N_C(X - Y) with Theta applied to each matched sample
/// under its own noise path. Throws a usage error if N_C(X - Y) <= 1e-9.
double contraction_ratio(const PathGroups& x, const PathGroups& y, const CoeffSet& coeffs, const GBMGroups& gbm,
                         const Path& eta, const StepControls* controls, const NCNormConfig& cfg);

struct PicardTrace {
    std::vector<double> distances;  // N_C(X^{k+1} - X^k), k = 0, 1, ...
    PathGroups last;
};

/// Iterate X^{k+1} = Theta(X^k) from X^0 = 0 on [0, T] (history eta) until the
/// successive distance drops below `stop` or `max_iter` iterations ran.
PicardTrace picard_iterate(const CoeffSet& coeffs, const GBMGroups& gbm, const Path& eta,
                           const StepControls* controls, const NCNormConfig& cfg, std::size_t max_iter,
                           double stop);

}  // namespace gnsfde
