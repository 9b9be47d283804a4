#include "gnsfde/runner.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "csv.hpp"
#include "gnsfde/control.hpp"
#include "gnsfde/error.hpp"
#include "gnsfde/gheat.hpp"
#include "gnsfde/nsfde.hpp"
#include "gnsfde/rng.hpp"
#include "gnsfde/scenarios.hpp"

namespace gnsfde {

namespace {

using json = nlohmann::json;
using detail::Cell;
using detail::CsvWriter;
namespace fs = std::filesystem;

const char* const kBaseDefaults = R"({
  "seed": 20240917,
  "vol": {"sigma_min": 0.65, "sigma_max": 1.0},
  "grid": {"tau": 0.1, "T": 1.0, "steps": 1100},
  "coefficients": {
    "Q": {"kind": "integral", "scale": 0.3},
    "b": {"kind": "integral", "scale": 10.0},
    "gamma": {"kind": "integral", "scale": 0.4},
    "sigma": {"kind": "integral", "scale": 5.0},
    "allow_violation": false
  },
  "initial": {"kind": "random_bm"},
  "family": {"switchers": 8},
  "samples": 1000,
  "paths": 20,
  "euler": {"tolerance": 1e-12, "max_iterations": 50, "state_clamp": 1e12},
  "cost": {"q": 0.0, "r": 0.0, "u_ref": 0.0, "lin": 0.0, "p": 0.0}
})";

json command_defaults(const std::string& command) {
    if (command == "gnormal") {
        return json::parse(R"({"gnormal": {"t": 1.0, "dx": 0.02, "y_min": -4.0, "y_max": 4.0, "y_step": 0.02,
                                           "lower": false, "output": "both", "pairs": []}})");
    }
    if (command == "sample-paths") return json::parse(R"({"paths": 5})");
    if (command == "qv-check") return json::parse(R"({"qv": {"paths": 100, "refinements": 3, "factor": 4}})");
    if (command == "isometry-check") {
        return json::parse(R"({"samples": 10000, "isometry": {"steps": 200, "s": 0.25, "t": 0.75}})");
    }
    if (command == "picard-check") {
        return json::parse(R"({"initial": {"kind": "constant", "value": 1.0},
                               "picard": {"steps": 220, "samples": 100, "iterations": 20, "stop": 1e-6,
                                          "perturbation": 0.5}})");
    }
    if (command == "chattering") {
        return json::parse(R"({"samples": 100, "initial": {"kind": "constant", "value": 1.0},
                               "control": {"atoms": [-1.0, 1.0], "weights": [[0.5, 0.5]]},
                               "chattering": {"ns": [2, 8, 32]}})");
    }
    if (command == "control-opt") {
        return json::parse(R"({"samples": 32, "initial": {"kind": "constant", "value": 1.0},
                               "control": {"atoms": [-1.0, 0.0, 1.0], "blocks": 2, "resolution": 2,
                                           "budget": 100000, "chatter_n": 0}})");
    }
    return json::object();
}

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s{
        {"", {"seed", "preset", "vol", "grid", "coefficients", "initial", "family", "samples", "paths", "euler",
              "cost", "gnormal", "qv", "isometry", "picard", "chattering", "control"}},
        {"vol", {"sigma_min", "sigma_max"}},
        {"grid", {"tau", "T", "steps"}},
        {"coefficients", {"Q", "b", "gamma", "sigma", "allow_violation"}},
        {"initial", {"kind", "value", "lo", "hi"}},
        {"family", {"switchers"}},
        {"euler", {"tolerance", "max_iterations", "state_clamp"}},
        {"cost", {"q", "r", "u_ref", "lin", "p", "clamp_running", "clamp_terminal"}},
        {"gnormal", {"t", "dx", "y_min", "y_max", "y_step", "lower", "output", "pairs"}},
        {"qv", {"paths", "refinements", "factor"}},
        {"isometry", {"steps", "s", "t"}},
        {"picard", {"steps", "samples", "iterations", "stop", "perturbation"}},
        {"chattering", {"ns"}},
        {"control", {"atoms", "blocks", "resolution", "budget", "chatter_n", "weights"}},
    };
    return s;
}

void check_schema(const json& cfg) {
    if (!cfg.is_object()) throw config_error("configuration must be a JSON object", "");
    for (const auto& [section, keys] : schema()) {
        const json* node = &cfg;
        if (!section.empty()) {
            if (!cfg.contains(section)) continue;
            node = &cfg.at(section);
            if (!node->is_object()) throw config_error("expected an object", section);
        }
        for (const auto& item : node->items()) {
            if (!keys.count(item.key())) {
                throw config_error("unknown key", section.empty() ? item.key() : section + "." + item.key());
            }
        }
    }
}

/// Typed, path-addressed reads from the effective configuration.
class Config {
public:
    explicit Config(json root) : root_(std::move(root)) {}

    const json& raw() const noexcept { return root_; }

    bool has(const std::string& path) const { return find(path) != nullptr; }

    const json& node(const std::string& path) const {
        const json* n = find(path);
        if (n == nullptr) throw config_error("missing value", path);
        return *n;
    }

    double num(const std::string& path) const {
        const auto& n = node(path);
        if (!n.is_number()) throw config_error("expected a number", path);
        const double v = n.get<double>();
        if (!std::isfinite(v)) throw config_error("expected a finite number", path);
        return v;
    }
    double num_or(const std::string& path, double fallback) const { return has(path) ? num(path) : fallback; }

    std::size_t count(const std::string& path) const {
        const auto& n = node(path);
        if (!n.is_number_integer() || (n.is_number_integer() && !n.is_number_unsigned() && n.get<long long>() < 0)) {
            throw config_error("expected a nonnegative integer", path);
        }
        return n.get<std::size_t>();
    }
    std::size_t positive(const std::string& path) const {
        const auto v = count(path);
        if (v == 0) throw config_error("expected a positive integer", path);
        return v;
    }
    std::uint64_t seed() const {
        const auto& n = node("seed");
        if (!n.is_number_unsigned()) throw config_error("seed must be a nonnegative integer", "seed");
        return n.get<std::uint64_t>();
    }
    bool flag(const std::string& path) const {
        const auto& n = node(path);
        if (!n.is_boolean()) throw config_error("expected true or false", path);
        return n.get<bool>();
    }
    std::string str(const std::string& path) const {
        const auto& n = node(path);
        if (!n.is_string()) throw config_error("expected a string", path);
        return n.get<std::string>();
    }
    std::vector<double> nums(const std::string& path) const {
        const auto& n = node(path);
        if (!n.is_array()) throw config_error("expected an array of numbers", path);
        std::vector<double> out;
        for (std::size_t i = 0; i < n.size(); ++i) out.push_back(num(path + "[" + std::to_string(i) + "]"));
        return out;
    }

private:
    const json* find(const std::string& path) const {
        const json* n = &root_;
        std::size_t pos = 0;
        while (pos <= path.size()) {
            const auto dot = path.find('.', pos);
            std::string key = path.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
            std::vector<std::size_t> indices;
            if (const auto br = key.find('['); br != std::string::npos) {
                for (auto i = br; i != std::string::npos; i = key.find('[', i + 1)) {
                    indices.push_back(std::stoul(key.substr(i + 1)));
                }
                key = key.substr(0, br);
            }
            if (!n->is_object() || !n->contains(key)) return nullptr;
            n = &n->at(key);
            for (auto index : indices) {
                if (!n->is_array() || index >= n->size()) return nullptr;
                n = &n->at(index);
            }
            if (dot == std::string::npos) break;
            pos = dot + 1;
        }
        return n;
    }

    json root_;
};

std::string fmt(double v) { return Cell::format(v); }

// Re-tag errors raised by library constructors with the config path they came from.
template <class F>
auto at_field(const std::string& field, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Config || e.kind() == ErrorKind::Domain || e.kind() == ErrorKind::Input) {
            throw Error(ErrorKind::Config, e.what(), field);
        }
        throw;
    }
}

struct Context {
    std::string command;
    Config cfg;
    fs::path out_dir;
    std::vector<std::string> files;

    std::vector<std::string> header() const {
        return {"gnsfde " + command, "seed=" + std::to_string(cfg.seed()), "config=" + cfg.raw().dump()};
    }

    CsvWriter open(const std::string& name, const std::vector<std::string>& columns,
                   const std::vector<std::string>& extra = {}) {
        auto comments = header();
        comments.insert(comments.end(), extra.begin(), extra.end());
        files.push_back((out_dir / name).string());
        return CsvWriter(out_dir / name, comments, columns);
    }
};

VolBounds vol_of(const Config& c) { return VolBounds(c.num("vol.sigma_min"), c.num("vol.sigma_max")); }

TimeGrid grid_of(const Config& c) { return TimeGrid(c.num("grid.tau"), c.num("grid.T"), c.positive("grid.steps")); }

ActionRange action_range(const Config& c) {
    if (!c.has("control.atoms")) return {};
    const auto atoms = c.nums("control.atoms");
    if (atoms.empty()) return {};
    return {*std::min_element(atoms.begin(), atoms.end()), *std::max_element(atoms.begin(), atoms.end())};
}

CoeffFunctional coeff_of(const Config& c, const std::string& role) {
    const std::string base = "coefficients." + role;
    const std::string kind = c.str(base + ".kind");
    ControlCoupling coupling;
    if (c.has(base + ".coupling")) {
        const auto& n = c.node(base + ".coupling");
        if (!n.is_object()) throw config_error("expected an object", base + ".coupling");
        for (const auto& item : n.items()) {
            if (item.key() != "c0" && item.key() != "c1" && item.key() != "c2") {
                throw config_error("unknown key", base + ".coupling." + item.key());
            }
        }
        coupling.c0 = c.num_or(base + ".coupling.c0", 1.0);
        coupling.c1 = c.num_or(base + ".coupling.c1", 0.0);
        coupling.c2 = c.num_or(base + ".coupling.c2", 0.0);
    }
    for (const auto& item : c.node(base).items()) {
        static const std::set<std::string> keys{"kind", "scale", "offset", "coupling", "clamp"};
        if (!keys.count(item.key())) throw config_error("unknown key", base + "." + item.key());
    }
    std::optional<double> clamp;
    if (c.has(base + ".clamp")) {
        clamp = c.num(base + ".clamp");
        if (!(*clamp > 0.0)) throw config_error("clamp must be positive", base + ".clamp");
    }
    if (kind == "zero") return CoeffFunctional::affine(0.0, 0.0, coupling, clamp);
    if (kind == "pointwise") return CoeffFunctional::pointwise(c.num(base + ".scale"), coupling, clamp);
    if (kind == "integral") return CoeffFunctional::integral(c.num(base + ".scale"), coupling, clamp);
    if (kind == "affine") {
        return CoeffFunctional::affine(c.num(base + ".scale"), c.num_or(base + ".offset", 0.0), coupling, clamp);
    }
    throw config_error("kind must be one of zero, pointwise, integral, affine", base + ".kind");
}

CoeffSet coeffs_of(const Config& c, const TimeGrid& grid) {
    return CoeffSet(coeff_of(c, "Q"), coeff_of(c, "b"), coeff_of(c, "gamma"), coeff_of(c, "sigma"), grid.tau(),
                    action_range(c), c.flag("coefficients.allow_violation"));
}

CostSpec cost_of(const Config& c) {
    CostSpec s;
    s.q = c.num("cost.q");
    s.r = c.num("cost.r");
    s.u_ref = c.num("cost.u_ref");
    s.lin = c.num("cost.lin");
    s.p = c.num("cost.p");
    if (c.has("cost.clamp_running")) s.running_clamp = c.num("cost.clamp_running");
    if (c.has("cost.clamp_terminal")) s.terminal_clamp = c.num("cost.clamp_terminal");
    return s;
}

EulerConfig euler_of(const Config& c) {
    EulerConfig e;
    e.tolerance = c.num("euler.tolerance");
    e.max_iterations = c.positive("euler.max_iterations");
    e.state_clamp = c.num("euler.state_clamp");
    e.validate();
    return e;
}

ScenarioFamily family_of(const Config& c, const VolBounds& bounds, std::size_t samples) {
    return default_family(bounds, samples, c.seed(), c.count("family.switchers"));
}

/// Initial history of trajectory k out of `paths`.
Path initial_of(const Config& c, const TimeGrid& grid, std::size_t k, std::size_t paths) {
    const std::string kind = c.str("initial.kind");
    if (kind == "constant") {
        const double v = c.num("initial.value");
        return Path::from_history(grid, [v](double) { return v; });
    }
    if (kind == "exp") return Path::from_history(grid, [](double t) { return std::exp(t); });
    if (kind == "spread") {
        const double lo = c.num("initial.lo");
        const double hi = c.num("initial.hi");
        if (!(hi >= lo)) throw config_error("initial.hi must be >= initial.lo", "initial.hi");
        const double v = paths > 1 ? lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(paths - 1)
                                   : 0.5 * (lo + hi);
        return Path::from_history(grid, [v](double) { return v; });
    }
    if (kind == "random_bm") {
        // dX0 = dW on [-tau, 0] with X0(-tau) = 0.
        NormalStream z(derive_seed(c.seed(), "history", k));
        std::vector<double> v(grid.size(), 0.0);
        const double sd = std::sqrt(grid.step());
        for (std::size_t i = 1; i <= grid.zero_index(); ++i) v[i] = v[i - 1] + sd * z();
        for (std::size_t i = grid.zero_index() + 1; i < v.size(); ++i) v[i] = v[grid.zero_index()];
        return Path(grid, std::move(v));
    }
    throw config_error("kind must be one of constant, exp, spread, random_bm", "initial.kind");
}

void require_uncontrolled(const CoeffSet& set) {
    if (set.b().controlled()) throw config_error("this command runs without a control", "coefficients.b.coupling");
    if (set.gamma().controlled()) {
        throw config_error("this command runs without a control", "coefficients.gamma.coupling");
    }
}

// Assumption checks run before any simulation.
void write_assumptions(Context& ctx, const CoeffSet& set, const CostSpec& cost, const TimeGrid& grid) {
    const auto probes = random_probe_pairs(grid, 1000, derive_seed(ctx.cfg.seed(), "probes"));
    const auto report = validate_assumptions(set, cost, probes, derive_seed(ctx.cfg.seed(), "probe-anchors"));
    const auto lip = lipschitz_constants(set);
    auto w = ctx.open("assumptions.csv", {"check", "declared", "observed", "pass"},
                      {"k0=" + fmt(lip.k0) + " k1=" + fmt(lip.k1) + " contraction=" + fmt(lip.contraction)});
    for (const auto& e : report.lipschitz) w.row({"lipschitz_" + e.name, e.declared, e.worst_ratio, e.pass});
    w.row({"running_cost_bounded", 0.0, 0.0, report.a3_running_bounded});
    w.row({"terminal_cost_bounded", 0.0, 0.0, report.a3_terminal_bounded});
    w.row({"coefficients_bounded", 0.0, 0.0, report.a4_bounded});
    for (const auto& e : report.lipschitz) {
        if (!e.pass) {
            throw config_error("empirical Lipschitz ratio " + fmt(e.worst_ratio) + " exceeds declared " +
                                   fmt(e.declared),
                               "coefficients." + e.name);
        }
    }
}

// ---------------------------------------------------------------- gnormal

double pde_moment(const VolBounds& b, double t, double dx, double sign) {
    const double hw = std::max(6.0 * b.sigma_max() * std::sqrt(t), 1.0) + 4.0;
    const auto grid = SpatialGrid::centered(hw, dx);
    const auto sol = solve_g_heat([sign](double x) { return sign * x * x; }, b, t, grid,
                                  0.9 * max_stable_dt(grid.dx(), b));
    return sign * sol.at(0.0);
}

std::string pair_tag(double lo, double hi) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "smin%g_smax%g", lo, hi);
    return buf;
}

void cmd_gnormal(Context& ctx) {
    const auto& c = ctx.cfg;
    std::vector<std::pair<double, double>> pairs;
    const auto& node = c.node("gnormal.pairs");
    if (!node.is_array()) throw config_error("expected an array of [sigma_min, sigma_max]", "gnormal.pairs");
    for (std::size_t i = 0; i < node.size(); ++i) {
        const auto p = c.nums("gnormal.pairs[" + std::to_string(i) + "]");
        if (p.size() != 2) throw config_error("expected [sigma_min, sigma_max]", "gnormal.pairs[" + std::to_string(i) + "]");
        pairs.emplace_back(p[0], p[1]);
    }
    if (pairs.empty()) pairs.emplace_back(c.num("vol.sigma_min"), c.num("vol.sigma_max"));

    const double t = c.num("gnormal.t");
    if (!(t > 0.0)) throw config_error("t must be positive", "gnormal.t");
    GNormalOptions opts;
    opts.dx = c.num("gnormal.dx");
    if (!(opts.dx > 0.0)) throw config_error("dx must be positive", "gnormal.dx");
    opts.lower = c.flag("gnormal.lower");
    const std::string output = c.str("gnormal.output");
    if (output != "both" && output != "density" && output != "cdf") {
        throw config_error("output must be one of both, density, cdf", "gnormal.output");
    }
    const double step = c.num("gnormal.y_step");
    if (!(step > 0.0)) throw config_error("y_step must be positive", "gnormal.y_step");
    const double y_min = c.num("gnormal.y_min");
    const double y_max = c.num("gnormal.y_max");
    if (!(y_max > y_min)) throw config_error("y_max must exceed y_min", "gnormal.y_max");
    const auto ys = linspace_step(y_min, y_max, step);

    auto summary = ctx.open("gnormal_summary.csv", {"sigma_min", "sigma_max", "t", "upper_second_moment",
                                                    "lower_second_moment", "max_err_vs_normal"});
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const std::string field = "gnormal.pairs[" + std::to_string(i) + "]";
        const auto bounds = at_field(field, [&] { return VolBounds(pairs[i].first, pairs[i].second); });
        const auto table = g_normal_table(bounds, t, ys, opts);
        const std::string tag = pair_tag(bounds.sigma_min(), bounds.sigma_max());
        const std::vector<std::string> sig{"sigma_min=" + fmt(bounds.sigma_min()),
                                           "sigma_max=" + fmt(bounds.sigma_max()), "t=" + fmt(t)};
        if (output != "cdf") {
            auto w = ctx.open("density_" + tag + ".csv", {"y", "density"}, sig);
            for (std::size_t j = 0; j < ys.size(); ++j) w.row({table.y[j], table.density[j]});
        }
        if (output != "density") {
            auto w = ctx.open("cdf_" + tag + ".csv", {"y", "cdf"}, sig);
            for (std::size_t j = 0; j < ys.size(); ++j) w.row({table.y[j], table.cdf[j]});
        }
        std::string err;
        if (bounds.sigma_min() == bounds.sigma_max()) {
            const double s = bounds.sigma_max() * std::sqrt(t);
            double worst = 0.0;
            for (std::size_t j = 0; j < ys.size(); ++j) {
                const double phi = 0.5 * std::erfc(-ys[j] / (s * std::numbers::sqrt2));
                worst = std::max(worst, std::abs(table.cdf[j] - phi));
            }
            err = fmt(worst);
        }
        summary.row({bounds.sigma_min(), bounds.sigma_max(), t, pde_moment(bounds, t, opts.dx, 1.0),
                     pde_moment(bounds, t, opts.dx, -1.0), err});
    }
}

// ------------------------------------------------------------ sample-paths

std::vector<std::string> policy_comments(const ScenarioFamily& f) {
    std::vector<std::string> out;
    for (std::size_t p = 0; p < f.policies.size(); ++p) {
        out.push_back("policy " + std::to_string(p) + " = " + f.policies[p].label());
    }
    return out;
}

void cmd_sample_paths(Context& ctx) {
    const auto bounds = vol_of(ctx.cfg);
    const auto grid = grid_of(ctx.cfg);
    const auto family = family_of(ctx.cfg, bounds, ctx.cfg.positive("paths"));
    const auto ensemble = sample_family(family, grid);
    auto w = ctx.open("gbm_paths.csv", {"policy", "path", "t", "B", "QV", "c"}, policy_comments(family));
    for (std::size_t p = 0; p < ensemble.by_policy.size(); ++p) {
        for (std::size_t k = 0; k < ensemble.by_policy[p].size(); ++k) {
            const auto& g = ensemble.by_policy[p][k];
            for (std::size_t j = 0; j < g.b.size(); ++j) {
                const double c = g.rate[std::min(j, g.rate.size() - 1)];
                w.row({p, k, grid.time(grid.zero_index() + j), g.b[j], g.qv[j], c});
            }
        }
    }
}

// ---------------------------------------------------------------- qv-check

void cmd_qv_check(Context& ctx) {
    const auto& c = ctx.cfg;
    const auto bounds = vol_of(c);
    const auto base = grid_of(c);
    const std::size_t paths = c.positive("qv.paths");
    const std::size_t levels = c.positive("qv.refinements");
    const std::size_t factor = c.positive("qv.factor");
    const auto family = family_of(c, bounds, paths);
    auto w = ctx.open("qv_check.csv",
                      {"policy", "steps", "h", "rms_terminal_residual", "mean_max_residual", "ratio_to_previous"},
                      policy_comments(family));
    for (std::size_t p = 0; p < family.policies.size(); ++p) {
        double previous = 0.0;
        std::size_t steps = base.steps();
        for (std::size_t r = 0; r < levels; ++r, steps *= factor) {
            const TimeGrid g(base.tau(), base.horizon(), steps);
            double sq = 0.0;
            RunningStats max_res;
            for (std::size_t k = 0; k < paths; ++k) {
                const auto path = sample_gbm(family.policies[p], g, family.sample_seed(k));
                const double res = qv_residual_terminal(path);
                sq += res * res;
                max_res.add(check_qv_identity(path));
            }
            const double rms = std::sqrt(sq / static_cast<double>(paths));
            w.row({p, steps, g.step(), rms, max_res.mean(), r == 0 ? std::string() : fmt(previous / rms)});
            previous = rms;
        }
    }
}

// ---------------------------------------------------------- isometry-check

struct NamedIntegrand {
    const char* name;
    std::function<double(double)> f;
};

std::vector<NamedIntegrand> builtin_integrands(double horizon) {
    return {{"constant", [](double) { return 1.0; }},
            {"ramp", [](double t) { return t; }},
            {"cosine", [horizon](double t) { return std::cos(2.0 * std::numbers::pi * t / horizon); }}};
}

void cmd_isometry_check(Context& ctx) {
    const auto& c = ctx.cfg;
    const auto bounds = vol_of(c);
    const double horizon = c.num("grid.T");
    const TimeGrid grid = at_field("isometry.steps", [&] { return TimeGrid(0.0, horizon, c.positive("isometry.steps")); });
    const std::size_t samples = c.positive("samples");
    const double s = c.num("isometry.s");
    const double t = c.num("isometry.t");
    if (!(s >= 0.0 && s < t && t <= horizon)) throw config_error("need 0 <= s < t <= T", "isometry.t");
    const auto family = family_of(c, bounds, samples);

    auto iso = ctx.open("isometry.csv",
                        {"integrand", "policy", "lhs", "lhs_se", "rhs", "rhs_se", "gap", "combined_se", "within_3se"},
                        policy_comments(family));
    auto bdg = ctx.open("bdg.csv", {"integrand", "policy", "s", "t", "sup_moment", "sup_se", "qv_moment", "qv_se",
                                    "constant", "holds"},
                        policy_comments(family));
    for (const auto& f : builtin_integrands(horizon)) {
        const auto eta = make_integrand(grid, f.f);
        for (std::size_t p = 0; p < family.policies.size(); ++p) {
            const auto r = check_isometry(eta, family.policies[p], grid, samples, c.seed());
            iso.row({f.name, p, r.lhs, r.lhs_se, r.rhs, r.rhs_se, r.gap, r.combined_se(),
                     r.gap <= 3.0 * r.combined_se()});
            const auto b = check_bdg(eta, family.policies[p], grid, s, t, samples, c.seed());
            bdg.row({f.name, p, s, t, b.sup_moment, b.sup_se, b.qv_moment, b.qv_se, b.constant, b.holds()});
        }
    }
}

// ------------------------------------------------------------ picard-check

void cmd_picard_check(Context& ctx) {
    const auto& c = ctx.cfg;
    const auto bounds = vol_of(c);
    const TimeGrid grid =
        at_field("picard.steps", [&] { return TimeGrid(c.num("grid.tau"), c.num("grid.T"), c.positive("picard.steps")); });
    const auto coeffs = coeffs_of(c, grid);
    require_uncontrolled(coeffs);
    write_assumptions(ctx, coeffs, cost_of(c), grid);

    const std::size_t samples = c.positive("picard.samples");
    const double perturbation = c.num("picard.perturbation");
    if (!(perturbation > 0.0)) throw config_error("perturbation must be positive", "picard.perturbation");
    const auto family = family_of(c, bounds, samples);
    const auto ensemble = sample_family(family, grid);
    const auto eta = initial_of(c, grid, 0, 1);
    const auto euler = euler_of(c);

    PathGroups x(ensemble.by_policy.size());
    PathGroups y(ensemble.by_policy.size());
    for (std::size_t p = 0; p < ensemble.by_policy.size(); ++p) {
        for (std::size_t k = 0; k < samples; ++k) {
            x[p].push_back(simulate_nsfde(coeffs, eta, ensemble.by_policy[p][k], euler));
            Path other = x[p].back();
            NormalStream z(derive_seed(c.seed(), "perturb", p * samples + k));
            // Offset plus Brownian wander on [0, T].
            double d = z();
            for (std::size_t i = grid.zero_index() + 1; i < other.size(); ++i) {
                d += std::sqrt(grid.step()) * z();
                other[i] += perturbation * d;
            }
            y[p].push_back(std::move(other));
        }
    }
    const auto lip = lipschitz_constants(coeffs);
    const auto nc = NCNormConfig::from(lip.k1, grid.horizon(), bounds.sigma_max());
    const double ratio = contraction_ratio(x, y, coeffs, ensemble.by_policy, eta, nullptr, nc);
    {
        auto w = ctx.open("contraction.csv", {"k0", "k1", "C", "pairs", "ratio", "bound"});
        w.row({lip.k0, lip.k1, nc.c, family.policies.size() * samples, ratio, lip.contraction});
    }
    const auto trace = picard_iterate(coeffs, ensemble.by_policy, eta, nullptr, nc, c.positive("picard.iterations"),
                                      c.num("picard.stop"));
    auto w = ctx.open("picard_iterates.csv", {"iteration", "distance"});
    for (std::size_t i = 0; i < trace.distances.size(); ++i) w.row({i + 1, trace.distances[i]});
}

// --------------------------------------------------------------- nsfde-sim

void cmd_nsfde_sim(Context& ctx) {
    const auto& c = ctx.cfg;
    const auto bounds = vol_of(c);
    const auto grid = grid_of(c);
    const auto coeffs = coeffs_of(c, grid);
    require_uncontrolled(coeffs);
    write_assumptions(ctx, coeffs, cost_of(c), grid);
    const auto euler = euler_of(c);
    const std::size_t paths = c.positive("paths");
    const auto family = family_of(c, bounds, paths);

    std::vector<std::string> meta{"h=" + fmt(grid.step()), "sigma_min=" + fmt(bounds.sigma_min()),
                                  "sigma_max=" + fmt(bounds.sigma_max()), "Q=" + coeffs.q().describe(),
                                  "b=" + coeffs.b().describe(), "gamma=" + coeffs.gamma().describe(),
                                  "sigma=" + coeffs.sigma().describe()};
    const auto pc = policy_comments(family);
    meta.insert(meta.end(), pc.begin(), pc.end());
    auto w = ctx.open("trajectories.csv", {"path", "policy", "t", "X"}, meta);
    for (std::size_t k = 0; k < paths; ++k) {
        const std::size_t p = k % family.policies.size();
        const auto gbm = sample_gbm(family.policies[p], grid, family.sample_seed(k));
        const auto x = simulate_nsfde(coeffs, initial_of(c, grid, k, paths), gbm, euler);
        for (std::size_t i = 0; i < x.size(); ++i) w.row({k, p, grid.time(i), x[i]});
    }
}

// ------------------------------------------------------- control commands

ControlProblem problem_of(Context& ctx, const TimeGrid& grid) {
    const auto coeffs = coeffs_of(ctx.cfg, grid);
    const auto cost = cost_of(ctx.cfg);
    write_assumptions(ctx, coeffs, cost, grid);
    return ControlProblem{coeffs, cost, initial_of(ctx.cfg, grid, 0, 1), euler_of(ctx.cfg)};
}

ActionGrid atoms_of(const Config& c) {
    return at_field("control.atoms", [&] { return ActionGrid(c.nums("control.atoms")); });
}

void cmd_chattering(Context& ctx) {
    const auto& c = ctx.cfg;
    const auto bounds = vol_of(c);
    const auto grid = grid_of(c);
    const auto problem = problem_of(ctx, grid);
    const auto actions = atoms_of(c);
    const auto& wnode = c.node("control.weights");
    if (!wnode.is_array() || wnode.empty()) throw config_error("expected one weight row per block", "control.weights");
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < wnode.size(); ++i) rows.push_back(c.nums("control.weights[" + std::to_string(i) + "]"));
    const RelaxedControl mu = at_field("control.weights", [&] {
        return RelaxedControl(actions, uniform_blocks(grid.horizon(), rows.size()), rows);
    });
    std::vector<std::size_t> ns;
    const auto& nnode = c.node("chattering.ns");
    if (!nnode.is_array() || nnode.empty()) throw config_error("expected a list of refinements", "chattering.ns");
    for (std::size_t i = 0; i < nnode.size(); ++i) ns.push_back(c.positive("chattering.ns[" + std::to_string(i) + "]"));

    const auto family = family_of(c, bounds, c.positive("samples"));
    const auto points = at_field("chattering.ns", [&] { return chattering_convergence(mu, ns, family, problem); });
    auto w = ctx.open("chattering.csv", {"n", "stable_gap", "stability_gap", "stability_gap_se", "cost_gap",
                                         "cost_gap_se", "j_chattered", "j_relaxed"},
                      {"mu=" + mu.encode()});
    for (const auto& pt : points) {
        w.row({pt.n, pt.stable_gap, pt.gap, pt.gap_se, pt.cost_gap, pt.cost_gap_se, pt.j_chattered, pt.j_relaxed});
    }
}

void write_candidates(Context& ctx, const std::string& name, const std::vector<CandidateRow>& rows,
                      const ScenarioFamily& family) {
    std::vector<std::string> cols{"encoding", "dirac"};
    for (std::size_t p = 0; p < family.policies.size(); ++p) cols.push_back("J_p" + std::to_string(p));
    cols.push_back("J");
    auto w = ctx.open(name, cols, policy_comments(family));
    for (const auto& r : rows) {
        std::vector<Cell> cells{Cell(r.encoding), Cell(r.dirac)};
        for (double v : r.per_policy) cells.emplace_back(v);
        cells.emplace_back(r.j);
        w.row(cells);
    }
}

void cmd_control_opt(Context& ctx) {
    const auto& c = ctx.cfg;
    const auto bounds = vol_of(c);
    const auto grid = grid_of(c);
    const auto problem = problem_of(ctx, grid);
    const auto actions = atoms_of(c);
    const std::size_t blocks = c.positive("control.blocks");
    const std::size_t resolution = c.positive("control.resolution");
    SearchOptions opts;
    opts.max_candidates = c.positive("control.budget");
    const auto family = family_of(c, bounds, c.positive("samples"));

    const auto strict = optimize_strict(family, problem, actions, blocks, opts);
    const auto relaxed = optimize_relaxed(family, problem, actions, blocks, resolution, opts);
    write_candidates(ctx, "strict_candidates.csv", strict.candidates, family);
    write_candidates(ctx, "relaxed_candidates.csv", relaxed.candidates, family);

    auto w = ctx.open("control_opt.csv", {"kind", "encoding", "J", "se"});
    w.row({"strict", strict.best.encode(), strict.j, strict.se});
    w.row({"relaxed", relaxed.best.encode(), relaxed.j, relaxed.se});
    w.row({"relaxed_dirac", "", relaxed.strict_j, relaxed.strict_se});
    const std::size_t n = c.count("control.chatter_n");
    if (n > 0) {
        const auto un = at_field("control.chatter_n", [&] { return chattering_approx(relaxed.best, n, grid.step()); });
        const auto est = cost(un, family, problem);
        w.row({"chattered_n" + std::to_string(n), un.encode(), est.j, est.se});
    }
}

using Handler = void (*)(Context&);

const std::map<std::string, Handler>& handlers() {
    static const std::map<std::string, Handler> h{
        {"gnormal", cmd_gnormal},           {"sample-paths", cmd_sample_paths},
        {"nsfde-sim", cmd_nsfde_sim},       {"qv-check", cmd_qv_check},
        {"isometry-check", cmd_isometry_check}, {"picard-check", cmd_picard_check},
        {"chattering", cmd_chattering},     {"control-opt", cmd_control_opt},
    };
    return h;
}

json parse_json(const std::string& text, const std::string& what, const std::string& field) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw config_error(what + " is not valid JSON: " + e.what(), field);
    }
}

json build_config(const RunRequest& req) {
    if (!handlers().count(req.command)) throw usage_error("unknown command '" + req.command + "'");
    json cfg = json::parse(kBaseDefaults);
    cfg.merge_patch(command_defaults(req.command));

    json file = json::object();
    if (req.config_path) {
        std::ifstream in(*req.config_path);
        if (!in) throw config_error("cannot read config file " + *req.config_path, "config");
        std::stringstream ss;
        ss << in.rdbuf();
        file = parse_json(ss.str(), "config file", "config");
        if (!file.is_object()) throw config_error("config file must hold a JSON object", "config");
    }
    const json overrides = parse_json(req.overrides, "overrides", "overrides");
    if (!overrides.is_object()) throw config_error("overrides must be a JSON object", "overrides");

    std::optional<std::string> preset = req.preset;
    if (!preset && overrides.contains("preset")) {
        if (!overrides.at("preset").is_string()) throw config_error("expected a string", "preset");
        preset = overrides.at("preset").get<std::string>();
    }
    if (!preset && file.contains("preset")) {
        if (!file.at("preset").is_string()) throw config_error("expected a string", "preset");
        preset = file.at("preset").get<std::string>();
    }
    if (preset) {
        const json p = json::parse(preset_json(*preset));
        if (p.at("command") != req.command) {
            throw config_error("preset '" + *preset + "' belongs to command " + p.at("command").get<std::string>(),
                               "preset");
        }
        cfg.merge_patch(p.at("config"));
        cfg["preset"] = *preset;
    }
    cfg.merge_patch(file);
    cfg.merge_patch(overrides);
    if (preset) cfg["preset"] = *preset;
    check_schema(cfg);
    return cfg;
}

}  // namespace

std::vector<std::string> run_commands() {
    std::vector<std::string> out;
    for (const auto& [name, h] : handlers()) out.push_back(name);
    return out;
}

std::string effective_config(const RunRequest& request) { return build_config(request).dump(2); }

RunResult run(const RunRequest& request) {
    Context ctx{request.command, Config(build_config(request)), fs::path(request.out_dir), {}};
    std::error_code ec;
    fs::create_directories(ctx.out_dir, ec);
    if (ec) throw config_error("cannot create output directory " + request.out_dir + ": " + ec.message(), "out_dir");
    ctx.cfg.seed();

    RunResult result;
    result.effective_config = ctx.cfg.raw().dump(2);
    {
        std::ofstream echo(ctx.out_dir / "config.json", std::ios::binary);
        if (!echo) throw config_error("cannot write config echo", "out_dir");
        echo << result.effective_config << '\n';
        ctx.files.push_back((ctx.out_dir / "config.json").string());
    }
    handlers().at(request.command)(ctx);
    result.files = ctx.files;
    return result;
}

}  // namespace gnsfde
