#include "gnsfde/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "gnsfde/error.hpp"
#include "gnsfde/rng.hpp"

namespace gnsfde {

namespace {

void check_levels(const std::vector<double>& levels, const VolBounds& bounds) {
    if (levels.empty()) throw config_error("policy needs at least one level", "family.levels");
    for (double c : levels) {
        if (!std::isfinite(c) || !bounds.contains_rate(c)) {
            throw config_error("rate level " + std::to_string(c) + " outside [sigma_min^2, sigma_max^2]",
                               "family.levels");
        }
    }
}

std::string fmt_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

VolPolicy::VolPolicy(Kind kind, std::vector<double> breakpoints, std::vector<double> levels, double rate,
                     std::uint64_t stream)
    : kind_(kind), breakpoints_(std::move(breakpoints)), levels_(std::move(levels)), rate_(rate), stream_(stream) {}

VolPolicy VolPolicy::constant(double rate, const VolBounds& bounds) {
    check_levels({rate}, bounds);
    return VolPolicy(Kind::Constant, {}, {rate}, 0.0, 0);
}

VolPolicy VolPolicy::piecewise(std::vector<double> breakpoints, std::vector<double> levels,
                               const VolBounds& bounds) {
    check_levels(levels, bounds);
    if (levels.size() != breakpoints.size() + 1) {
        throw config_error("piecewise policy needs one more level than breakpoints", "family.breakpoints");
    }
    if (!std::is_sorted(breakpoints.begin(), breakpoints.end())) {
        throw config_error("breakpoints must be sorted", "family.breakpoints");
    }
    return VolPolicy(Kind::PiecewiseConstant, std::move(breakpoints), std::move(levels), 0.0, 0);
}

VolPolicy VolPolicy::random_switch(double rate, std::vector<double> levels, std::uint64_t stream,
                                   const VolBounds& bounds) {
    check_levels(levels, bounds);
    if (!(rate >= 0.0) || !std::isfinite(rate)) throw config_error("switch rate must be >= 0", "family.rate");
    return VolPolicy(Kind::RandomSwitch, {}, std::move(levels), rate, stream);
}

std::string VolPolicy::label() const {
    switch (kind_) {
        case Kind::Constant: return "const(" + fmt_num(levels_[0]) + ")";
        case Kind::PiecewiseConstant: {
            std::string s = "piecewise(";
            for (std::size_t i = 0; i < levels_.size(); ++i) s += (i ? ";" : "") + fmt_num(levels_[i]);
            return s + ")";
        }
        case Kind::RandomSwitch: return "switch(rate=" + fmt_num(rate_) + ",stream=" + std::to_string(stream_) + ")";
    }
    return "?";
}

std::vector<double> VolPolicy::realize(const TimeGrid& grid, std::uint64_t sample_seed) const {
    const std::size_t m = grid.forward_steps();
    std::vector<double> c(m);
    const double h = grid.step();
    switch (kind_) {
        case Kind::Constant: std::fill(c.begin(), c.end(), levels_[0]); break;
        case Kind::PiecewiseConstant:
            for (std::size_t j = 0; j < m; ++j) {
                const double t = static_cast<double>(j) * h;
                const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t + 1e-12 * h);
                c[j] = levels_[static_cast<std::size_t>(it - breakpoints_.begin())];
            }
            break;
        case Kind::RandomSwitch: {
            Engine eng(derive_seed(stream_, "switch", sample_seed));
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            const std::size_t n = levels_.size();
            auto pick = [&](std::size_t bound) {
                return std::min(bound - 1, static_cast<std::size_t>(unif(eng) * static_cast<double>(bound)));
            };
            std::size_t state = pick(n);
            const double p_switch = 1.0 - std::exp(-rate_ * h);
            for (std::size_t j = 0; j < m; ++j) {
                if (j > 0 && n > 1 && unif(eng) < p_switch) {
                    const std::size_t other = pick(n - 1);
                    state = other >= state ? other + 1 : other;
                }
                c[j] = levels_[state];
            }
            break;
        }
    }
    return c;
}

GBMPath sample_gbm(const VolPolicy& policy, const TimeGrid& grid, std::uint64_t seed) {
    const std::size_t m = grid.forward_steps();
    GBMPath p{grid, std::vector<double>(m + 1, 0.0), std::vector<double>(m + 1, 0.0), policy.realize(grid, seed)};
    NormalStream xi(derive_seed(seed, "noise"));
    const double h = grid.step();
    for (std::size_t j = 0; j < m; ++j) {
        const double dqv = p.rate[j] * h;
        p.b[j + 1] = p.b[j] + std::sqrt(dqv) * xi();
        p.qv[j + 1] = p.qv[j] + dqv;
    }
    return p;
}

GBMPath coarsen(const GBMPath& fine, const TimeGrid& coarse) {
    const auto& g = fine.grid;
    if (coarse.tau() != g.tau() || coarse.horizon() != g.horizon() || g.steps() % coarse.steps() != 0) {
        throw usage_error("coarse grid is not an integer coarsening of the fine grid");
    }
    const std::size_t factor = g.steps() / coarse.steps();
    const std::size_t m = coarse.forward_steps();
    if (m * factor != fine.forward_steps()) throw usage_error("coarse grid misaligned with fine grid");
    GBMPath p{coarse, std::vector<double>(m + 1), std::vector<double>(m + 1), std::vector<double>(m)};
    for (std::size_t j = 0; j <= m; ++j) {
        p.b[j] = fine.b[j * factor];
        p.qv[j] = fine.qv[j * factor];
    }
    for (std::size_t j = 0; j < m; ++j) p.rate[j] = (p.qv[j + 1] - p.qv[j]) / coarse.step();
    return p;
}

std::uint64_t ScenarioFamily::sample_seed(std::size_t k) const noexcept { return derive_seed(seed, "sample", k); }

void ScenarioFamily::validate() const {
    if (policies.empty()) throw config_error("scenario family is empty", "family.policies");
    if (samples == 0) throw config_error("samples per policy must be positive", "samples");
}

ScenarioFamily default_family(const VolBounds& bounds, std::size_t samples, std::uint64_t seed,
                              std::size_t switchers) {
    ScenarioFamily f;
    f.samples = samples;
    f.seed = seed;
    f.policies.push_back(VolPolicy::constant(bounds.var_min(), bounds));
    f.policies.push_back(VolPolicy::constant(bounds.var_max(), bounds));
    const std::vector<double> levels{bounds.var_min(), 0.5 * (bounds.var_min() + bounds.var_max()),
                                      bounds.var_max()};
    for (std::size_t k = 0; k < switchers; ++k) {
        f.policies.push_back(VolPolicy::random_switch(static_cast<double>(k + 1), levels,
                                                      derive_seed(seed, "policy", k), bounds));
    }
    return f;
}

ScenarioEnsemble sample_family(const ScenarioFamily& family, const TimeGrid& grid) {
    family.validate();
    ScenarioEnsemble e;
    e.by_policy.resize(family.policies.size());
    for (std::size_t p = 0; p < family.policies.size(); ++p) {
        e.by_policy[p].reserve(family.samples);
        for (std::size_t k = 0; k < family.samples; ++k) {
            e.by_policy[p].push_back(sample_gbm(family.policies[p], grid, family.sample_seed(k)));
        }
    }
    return e;
}

UpperEstimate upper_expectation(const PathFunctional& f, const ScenarioFamily& family, const TimeGrid& grid,
                                const UpperOptions& options) {
    family.validate();
    UpperEstimate out;
    out.rows.reserve(family.policies.size());
    for (std::size_t p = 0; p < family.policies.size(); ++p) {
        const auto& policy = family.policies[p];
        RunningStats stats;
        std::size_t rejected = 0;
        for (std::size_t k = 0; k < family.samples; ++k) {
            const double v = f(sample_gbm(policy, grid, family.sample_seed(k)));
            if (!std::isfinite(v)) {
                ++rejected;
                continue;
            }
            stats.add(std::clamp(v, -options.clamp, options.clamp));
        }
        if (static_cast<double>(rejected) > options.max_reject_fraction * static_cast<double>(family.samples) ||
            stats.count() == 0) {
            throw Error(ErrorKind::Estimation, "policy " + policy.label() + " rejected " + std::to_string(rejected) +
                                                   " of " + std::to_string(family.samples) + " samples");
        }
        out.rows.push_back({policy.label(), stats.mean(), stats.se(), stats.count(), rejected});
        if (p == 0 || stats.mean() > out.value) {
            out.value = stats.mean();
            out.best_policy = p;
        }
    }
    return out;
}

double check_qv_identity(const GBMPath& path) {
    double ito = 0.0;
    double worst = 0.0;
    for (std::size_t k = 0; k < path.b.size(); ++k) {
        const double residual = path.qv[k] - (path.b[k] * path.b[k] - 2.0 * ito);
        worst = std::max(worst, std::abs(residual));
        if (k + 1 < path.b.size()) ito += path.b[k] * path.db(k);
    }
    return worst;
}

double qv_residual_terminal(const GBMPath& path) {
    double ito = 0.0;
    for (std::size_t k = 0; k + 1 < path.b.size(); ++k) ito += path.b[k] * path.db(k);
    return path.qv.back() - (path.b.back() * path.b.back() - 2.0 * ito);
}

StepIntegrand make_integrand(const TimeGrid& grid, const std::function<double(double)>& eta) {
    StepIntegrand v(grid.forward_steps());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = eta(static_cast<double>(j) * grid.step());
    return v;
}

double IsometryCheck::combined_se() const { return std::sqrt(lhs_se * lhs_se + rhs_se * rhs_se); }

IsometryCheck check_isometry(const StepIntegrand& eta, const VolPolicy& policy, const TimeGrid& grid,
                             std::size_t samples, std::uint64_t seed) {
    if (eta.size() != grid.forward_steps()) throw usage_error("integrand length does not match grid");
    if (samples == 0) throw config_error("samples must be positive", "samples");
    RunningStats lhs;
    RunningStats rhs;
    for (std::size_t k = 0; k < samples; ++k) {
        const auto path = sample_gbm(policy, grid, derive_seed(seed, "isometry", k));
        double ib = 0.0;
        double iq = 0.0;
        for (std::size_t j = 0; j < eta.size(); ++j) {
            ib += eta[j] * path.db(j);
            iq += eta[j] * eta[j] * path.dqv(j);
        }
        lhs.add(ib * ib);
        rhs.add(iq);
    }
    IsometryCheck c{lhs.mean(), lhs.se(), rhs.mean(), rhs.se(), 0.0};
    c.gap = std::abs(c.lhs - c.rhs);
    return c;
}

bool BdgCheck::holds() const {
    return sup_moment <= constant * qv_moment + 3.0 * std::sqrt(sup_se * sup_se + constant * constant * qv_se * qv_se);
}

BdgCheck check_bdg(const StepIntegrand& eta, const VolPolicy& policy, const TimeGrid& grid, double s, double t,
                   std::size_t samples, std::uint64_t seed) {
    if (eta.size() != grid.forward_steps()) throw usage_error("integrand length does not match grid");
    const double h = grid.step();
    const auto js = static_cast<std::size_t>(std::llround(s / h));
    const auto jt = static_cast<std::size_t>(std::llround(t / h));
    if (!(s >= 0.0) || jt > eta.size() || js >= jt) throw domain_error("BDG window must satisfy 0 <= s < t <= T");
    RunningStats sup;
    RunningStats qv;
    for (std::size_t k = 0; k < samples; ++k) {
        const auto path = sample_gbm(policy, grid, derive_seed(seed, "bdg", k));
        double running = 0.0;
        double best = 0.0;
        double iq = 0.0;
        for (std::size_t j = js; j < jt; ++j) {
            running += eta[j] * path.db(j);
            iq += eta[j] * eta[j] * path.dqv(j);
            best = std::max(best, running * running);
        }
        sup.add(best);
        qv.add(iq);
    }
    return {sup.mean(), sup.se(), qv.mean(), qv.se(), 4.0};
}

}  // namespace gnsfde
