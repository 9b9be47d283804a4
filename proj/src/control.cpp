#include "gnsfde/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "gnsfde/error.hpp"

namespace gnsfde {

RelaxedControl dirac_embed(const StrictControl& u) {
    std::vector<std::vector<double>> rows(u.blocks(), std::vector<double>(u.actions().size(), 0.0));
    for (std::size_t b = 0; b < u.blocks(); ++b) rows[b][u.choice()[b]] = 1.0;
    return RelaxedControl(u.actions(), u.boundaries(), std::move(rows));
}

StrictControl chattering_approx(const RelaxedControl& mu, std::size_t n, double grid_step) {
    if (n == 0) throw config_error("chattering refinement must be >= 1", "chattering.n");
    const auto& bounds = mu.boundaries();
    std::vector<double> starts;
    std::vector<std::size_t> choice;
    for (std::size_t b = 0; b < mu.blocks(); ++b) {
        const double s = bounds[b];
        const double e = bounds[b + 1];
        const double micro = (e - s) / static_cast<double>(n);
        if (micro < grid_step * (1.0 - 1e-9)) {
            throw config_error("micro-slot " + std::to_string(micro) + " is shorter than the grid step " +
                                   std::to_string(grid_step) + "; use a finer grid",
                               "grid.steps");
        }
        const auto row = mu.row(b);
        const std::size_t block_begin = choice.size();
        for (std::size_t i = 0; i < n; ++i) {
            const double slot = s + static_cast<double>(i) * micro;
            double cum = 0.0;
            for (std::size_t a = 0; a < row.size(); ++a) {
                if (row[a] == 0.0) continue;
                const double start = (i == 0 && cum == 0.0) ? s : slot + micro * cum;
                cum += row[a];
                if (choice.size() > block_begin && choice.back() == a) continue;
                starts.push_back(start);
                choice.push_back(a);
            }
        }
    }
    starts.push_back(bounds.back());
    return StrictControl(mu.actions(), std::move(starts), std::move(choice));
}

std::vector<TestMonomial> default_test_set() {
    std::vector<TestMonomial> out;
    for (int p = 0; p <= 2; ++p) {
        for (int q = 0; q <= 2; ++q) out.push_back({p, q});
    }
    return out;
}

double integrate(const RelaxedControl& mu, TestMonomial f) {
    const auto& b = mu.boundaries();
    const auto atoms = mu.actions().atoms();
    double total = 0.0;
    for (std::size_t k = 0; k < mu.blocks(); ++k) {
        const double time_part =
            (std::pow(b[k + 1], f.p + 1) - std::pow(b[k], f.p + 1)) / static_cast<double>(f.p + 1);
        double action_part = 0.0;
        const auto row = mu.row(k);
        for (std::size_t a = 0; a < atoms.size(); ++a) action_part += row[a] * std::pow(atoms[a], f.q);
        total += time_part * action_part;
    }
    return total;
}

double stable_convergence_gap(const RelaxedControl& mu, const StrictControl& u, std::span<const TestMonomial> tests) {
    const auto phi = dirac_embed(u);
    double worst = 0.0;
    for (const auto& f : tests) worst = std::max(worst, std::abs(integrate(phi, f) - integrate(mu, f)));
    return worst;
}

std::vector<std::vector<double>> grid_occupancy(const StrictControl& u, const std::vector<double>& blocks,
                                                const TimeGrid& grid) {
    std::vector<std::vector<double>> occ(blocks.size() - 1, std::vector<double>(u.actions().size(), 0.0));
    std::vector<std::size_t> count(blocks.size() - 1, 0);
    const RelaxedControl macro(u.actions(), blocks,
                               std::vector<std::vector<double>>(blocks.size() - 1, [&] {
                                   std::vector<double> r(u.actions().size(), 0.0);
                                   r[0] = 1.0;
                                   return r;
                               }()));
    for (std::size_t j = 0; j < grid.forward_steps(); ++j) {
        const double t = static_cast<double>(j) * grid.step();
        const std::size_t b = macro.block_at(t);
        occ[b][u.choice()[u.block_at(t)]] += 1.0;
        ++count[b];
    }
    for (std::size_t b = 0; b < occ.size(); ++b) {
        for (auto& v : occ[b]) v = count[b] ? v / static_cast<double>(count[b]) : 0.0;
    }
    return occ;
}

double pathwise_cost(const Path& x, const StepControls& controls, const CostSpec& cost) {
    const auto& g = x.grid();
    const std::size_t n0 = g.zero_index();
    if (controls.steps() != g.forward_steps()) throw usage_error("control schedule does not match the grid");
    double running = 0.0;
    for (std::size_t j = 0; j < controls.steps(); ++j) {
        running += cost.running_relaxed(x[n0 + j], controls.atoms(), controls.weights(j));
    }
    return running * g.step() + cost.terminal(x.terminal());
}

namespace {

Path simulate_sample(const ControlProblem& problem, const GBMPath& gbm, const StepControls& controls,
                     std::size_t sample) {
    try {
        return simulate_nsfde(problem.coeffs, problem.eta, gbm, &controls, problem.euler);
    } catch (const Error& e) {
        throw Error(e.kind(), "sample " + std::to_string(sample) + ": " + e.what(), e.field(), e.step());
    }
}

}  // namespace

MeanSe cost_under_P(const StepControls& controls, const VolPolicy& policy, const ControlProblem& problem,
                    std::size_t samples, std::uint64_t seed) {
    if (samples == 0) throw config_error("samples must be positive", "samples");
    ScenarioFamily f{{policy}, samples, seed};
    RunningStats stats;
    for (std::size_t k = 0; k < samples; ++k) {
        const auto gbm = sample_gbm(policy, problem.grid(), f.sample_seed(k));
        stats.add(pathwise_cost(simulate_sample(problem, gbm, controls, k), controls, problem.cost));
    }
    return stats.result();
}

MeanSe cost_under_P(const StrictControl& u, const VolPolicy& policy, const ControlProblem& problem,
                    std::size_t samples, std::uint64_t seed) {
    return cost_under_P(StepControls(u, problem.grid()), policy, problem, samples, seed);
}

MeanSe cost_under_P(const RelaxedControl& mu, const VolPolicy& policy, const ControlProblem& problem,
                    std::size_t samples, std::uint64_t seed) {
    return cost_under_P(StepControls(mu, problem.grid()), policy, problem, samples, seed);
}

CostEstimate cost(const StepControls& controls, const ScenarioFamily& family, const ScenarioEnsemble& ensemble,
                  const ControlProblem& problem) {
    family.validate();
    if (ensemble.by_policy.size() != family.policies.size()) throw usage_error("ensemble does not match family");
    CostEstimate out;
    std::vector<double> values;
    for (std::size_t p = 0; p < ensemble.by_policy.size(); ++p) {
        values.clear();
        RunningStats stats;
        for (std::size_t k = 0; k < ensemble.by_policy[p].size(); ++k) {
            const double v =
                pathwise_cost(simulate_sample(problem, ensemble.by_policy[p][k], controls, k), controls, problem.cost);
            values.push_back(v);
            stats.add(v);
        }
        out.per_policy.push_back(stats.result());
        if (p == 0 || stats.mean() > out.j) {
            out.j = stats.mean();
            out.se = stats.se();
            out.best_policy = p;
            out.samples_best = values;
        }
    }
    return out;
}

CostEstimate cost(const StrictControl& u, const ScenarioFamily& family, const ControlProblem& problem) {
    return cost(StepControls(u, problem.grid()), family, sample_family(family, problem.grid()), problem);
}

CostEstimate cost(const RelaxedControl& mu, const ScenarioFamily& family, const ControlProblem& problem) {
    return cost(StepControls(mu, problem.grid()), family, sample_family(family, problem.grid()), problem);
}

namespace {

StabilityPoint stability_point(const RelaxedControl& mu, std::size_t n, const ScenarioFamily& family,
                               const ScenarioEnsemble& ensemble, const ControlProblem& problem,
                               const std::vector<std::vector<Path>>& relaxed_paths, const CostEstimate& relaxed_cost) {
    const auto& g = problem.grid();
    const auto un = chattering_approx(mu, n, g.step());
    const StepControls ctl_n(un, g);
    const StepControls ctl_mu(mu, g);
    const std::size_t n0 = g.zero_index();

    StabilityPoint pt;
    pt.n = n;
    pt.stable_gap = stable_convergence_gap(mu, un, default_test_set());
    pt.j_relaxed = relaxed_cost.j;

    std::vector<std::vector<double>> costs_n(family.policies.size());
    for (std::size_t p = 0; p < family.policies.size(); ++p) {
        RunningStats gap;
        RunningStats jn;
        for (std::size_t k = 0; k < ensemble.by_policy[p].size(); ++k) {
            const auto xn = simulate_sample(problem, ensemble.by_policy[p][k], ctl_n, k);
            const auto& xm = relaxed_paths[p][k];
            double sup = 0.0;
            for (std::size_t i = n0; i < xn.size(); ++i) sup = std::max(sup, std::abs(xn[i] - xm[i]));
            gap.add(sup * sup);
            const double c = pathwise_cost(xn, ctl_n, problem.cost);
            costs_n[p].push_back(c);
            jn.add(c);
        }
        if (p == 0 || gap.mean() > pt.gap) {
            pt.gap = gap.mean();
            pt.gap_se = gap.se();
        }
        if (p == 0 || jn.mean() > pt.j_chattered) pt.j_chattered = jn.mean();
    }
    pt.cost_gap = std::abs(pt.j_chattered - pt.j_relaxed);
    // SE of the paired difference under the policy attaining J(mu).
    const auto& base = relaxed_cost.samples_best;
    const auto& chat = costs_n[relaxed_cost.best_policy];
    RunningStats diff;
    for (std::size_t k = 0; k < base.size(); ++k) diff.add(chat[k] - base[k]);
    pt.cost_gap_se = diff.se();
    return pt;
}

std::vector<std::vector<Path>> relaxed_paths(const RelaxedControl& mu, const ScenarioEnsemble& ensemble,
                                             const ControlProblem& problem) {
    const StepControls ctl(mu, problem.grid());
    std::vector<std::vector<Path>> out(ensemble.by_policy.size());
    for (std::size_t p = 0; p < ensemble.by_policy.size(); ++p) {
        for (std::size_t k = 0; k < ensemble.by_policy[p].size(); ++k) {
            out[p].push_back(simulate_sample(problem, ensemble.by_policy[p][k], ctl, k));
        }
    }
    return out;
}

}  // namespace

StabilityPoint stability_gap(const RelaxedControl& mu, std::size_t n, const ScenarioFamily& family,
                             const ControlProblem& problem) {
    const std::size_t ns[] = {n};
    return chattering_convergence(mu, ns, family, problem).front();
}

std::vector<StabilityPoint> chattering_convergence(const RelaxedControl& mu, std::span<const std::size_t> ns,
                                                   const ScenarioFamily& family, const ControlProblem& problem) {
    const auto ensemble = sample_family(family, problem.grid());
    const auto paths = relaxed_paths(mu, ensemble, problem);
    const auto jmu = cost(StepControls(mu, problem.grid()), family, ensemble, problem);
    std::vector<StabilityPoint> out;
    for (std::size_t n : ns) out.push_back(stability_point(mu, n, family, ensemble, problem, paths, jmu));
    return out;
}

std::vector<std::vector<double>> simplex_grid(std::size_t atoms, std::size_t resolution) {
    if (atoms == 0 || resolution == 0) throw config_error("simplex grid needs atoms and resolution >= 1", "resolution");
    std::vector<std::vector<double>> out;
    std::vector<std::size_t> k(atoms, 0);
    // Enumerate compositions of `resolution` into `atoms` parts in lexicographic order.
    auto rec = [&](auto&& self, std::size_t i, std::size_t left) -> void {
        if (i + 1 == atoms) {
            k[i] = left;
            std::vector<double> w(atoms);
            for (std::size_t a = 0; a < atoms; ++a) w[a] = static_cast<double>(k[a]) / static_cast<double>(resolution);
            out.push_back(std::move(w));
            return;
        }
        for (std::size_t v = 0; v <= left; ++v) {
            k[i] = v;
            self(self, i + 1, left - v);
        }
    };
    rec(rec, 0, resolution);
    return out;
}

namespace {

std::size_t checked_power(std::size_t base, std::size_t exp, std::size_t limit, const char* what) {
    std::size_t total = 1;
    for (std::size_t i = 0; i < exp; ++i) {
        if (total > limit / std::max<std::size_t>(base, 1)) {
            throw config_error(std::string(what) + " search exceeds the budget of " + std::to_string(limit) +
                                   " candidates; use fewer blocks or atoms",
                               "control.blocks");
        }
        total *= base;
    }
    if (total > limit) {
        throw config_error(std::string(what) + " search exceeds the budget of " + std::to_string(limit) +
                               " candidates; use fewer blocks or atoms",
                           "control.blocks");
    }
    return total;
}

// Digits of `index` in base `base`, block 0 most significant.
std::vector<std::size_t> digits(std::size_t index, std::size_t base, std::size_t blocks) {
    std::vector<std::size_t> d(blocks);
    for (std::size_t b = blocks; b-- > 0;) {
        d[b] = index % base;
        index /= base;
    }
    return d;
}

CandidateRow row_of(std::string encoding, const CostEstimate& c, bool dirac) {
    CandidateRow r{std::move(encoding), {}, c.j, dirac};
    for (const auto& m : c.per_policy) r.per_policy.push_back(m.mean);
    return r;
}

}  // namespace

StrictSearch optimize_strict(const ScenarioFamily& family, const ControlProblem& problem, const ActionGrid& actions,
                             std::size_t blocks, const SearchOptions& options) {
    const std::size_t total = checked_power(actions.size(), blocks, options.max_candidates, "strict");
    const auto bounds = uniform_blocks(problem.grid().horizon(), blocks);
    const auto ensemble = sample_family(family, problem.grid());

    std::optional<StrictControl> best;
    double best_j = std::numeric_limits<double>::infinity();
    double best_se = 0.0;
    std::vector<CandidateRow> rows;
    for (std::size_t c = 0; c < total; ++c) {
        StrictControl u(actions, bounds, digits(c, actions.size(), blocks));
        const auto est = cost(StepControls(u, problem.grid()), family, ensemble, problem);
        if (options.keep_table) rows.push_back(row_of(u.encode(), est, true));
        if (est.j < best_j) {
            best_j = est.j;
            best_se = est.se;
            best = std::move(u);
        }
    }
    return {std::move(*best), best_j, best_se, std::move(rows)};
}

RelaxedSearch optimize_relaxed(const ScenarioFamily& family, const ControlProblem& problem, const ActionGrid& actions,
                               std::size_t blocks, std::size_t resolution, const SearchOptions& options) {
    const auto simplex = simplex_grid(actions.size(), resolution);
    const std::size_t total = checked_power(simplex.size(), blocks, options.max_candidates, "relaxed");
    const auto bounds = uniform_blocks(problem.grid().horizon(), blocks);
    const auto ensemble = sample_family(family, problem.grid());

    std::optional<RelaxedControl> best;
    double best_j = std::numeric_limits<double>::infinity();
    double best_se = 0.0;
    double strict_j = std::numeric_limits<double>::infinity();
    double strict_se = 0.0;
    std::vector<CandidateRow> rows;
    for (std::size_t c = 0; c < total; ++c) {
        const auto idx = digits(c, simplex.size(), blocks);
        std::vector<std::vector<double>> w;
        w.reserve(blocks);
        for (auto i : idx) w.push_back(simplex[i]);
        RelaxedControl mu(actions, bounds, std::move(w));
        const bool dirac = mu.is_dirac();
        const auto est = cost(StepControls(mu, problem.grid()), family, ensemble, problem);
        if (options.keep_table) rows.push_back(row_of(mu.encode(), est, dirac));
        if (dirac && est.j < strict_j) {
            strict_j = est.j;
            strict_se = est.se;
        }
        if (est.j < best_j) {
            best_j = est.j;
            best_se = est.se;
            best = std::move(mu);
        }
    }
    return {std::move(*best), best_j, best_se, strict_j, strict_se, std::move(rows)};
}

}  // namespace gnsfde
