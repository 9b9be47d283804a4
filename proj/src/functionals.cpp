#include "gnsfde/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "gnsfde/error.hpp"
#include "gnsfde/rng.hpp"

namespace gnsfde {

CoeffFunctional::CoeffFunctional(Kind kind, double scale, double offset, ControlCoupling coupling,
                                 std::optional<double> clamp)
    : kind_(kind), scale_(scale), offset_(offset), coupling_(coupling), clamp_(clamp) {
    if (!std::isfinite(scale) || !std::isfinite(offset) || !std::isfinite(coupling.c0) ||
        !std::isfinite(coupling.c1) || !std::isfinite(coupling.c2)) {
        throw config_error("coefficient parameters must be finite");
    }
    if (clamp && !(*clamp > 0.0)) throw config_error("clamp bound must be positive");
}

CoeffFunctional CoeffFunctional::pointwise(double scale, ControlCoupling coupling, std::optional<double> clamp) {
    return {Kind::PointwiseAt0, scale, 0.0, coupling, clamp};
}

CoeffFunctional CoeffFunctional::integral(double scale, ControlCoupling coupling, std::optional<double> clamp) {
    return {Kind::IntegralKernel, scale, 0.0, coupling, clamp};
}

CoeffFunctional CoeffFunctional::affine(double scale, double offset, ControlCoupling coupling,
                                        std::optional<double> clamp) {
    return {Kind::Affine, scale, offset, coupling, clamp};
}

double CoeffFunctional::base(const Segment& seg) const noexcept {
    switch (kind_) {
        case Kind::PointwiseAt0: return scale_ * seg.at_zero();
        case Kind::IntegralKernel: return scale_ == 0.0 ? 0.0 : scale_ * seg.integral();
        case Kind::Affine: return scale_ * seg.at_zero() + offset_;
    }
    return 0.0;
}

double CoeffFunctional::operator()(double /*t*/, const Segment& seg, std::optional<double> u) const {
    if (controlled() != u.has_value()) {
        throw usage_error(controlled() ? "controlled coefficient evaluated without an action"
                                       : "uncontrolled coefficient evaluated with an action");
    }
    const double a = u.value_or(0.0);
    double v = (coupling_.c0 + coupling_.c1 * a) * base(seg) + coupling_.c2 * a;
    if (clamp_) v = std::clamp(v, -*clamp_, *clamp_);
    return v;
}

double CoeffFunctional::relaxed(double t, const Segment& seg, std::span<const double> atoms,
                                std::span<const double> weights) const {
    if (!controlled()) return (*this)(t, seg);
    const double b = base(seg);
    double v = 0.0;
    for (std::size_t j = 0; j < atoms.size(); ++j) {
        if (weights[j] == 0.0) continue;
        double fj = (coupling_.c0 + coupling_.c1 * atoms[j]) * b + coupling_.c2 * atoms[j];
        if (clamp_) fj = std::clamp(fj, -*clamp_, *clamp_);
        v += weights[j] * fj;
    }
    return v;
}

double CoeffFunctional::lipschitz(double tau, const ActionRange& range) const noexcept {
    const double state = kind_ == Kind::IntegralKernel ? std::abs(scale_) * tau : std::abs(scale_);
    const double mult = controlled() ? std::max(std::abs(coupling_.c0 + coupling_.c1 * range.lo),
                                                std::abs(coupling_.c0 + coupling_.c1 * range.hi))
                                     : std::abs(coupling_.c0);
    return state * mult;
}

std::optional<double> CoeffFunctional::bound(const ActionRange& range) const noexcept {
    if (clamp_) return *clamp_;
    if (scale_ != 0.0) return std::nullopt;
    const double base_value = kind_ == Kind::Affine ? offset_ : 0.0;
    auto at = [&](double u) { return std::abs((coupling_.c0 + coupling_.c1 * u) * base_value + coupling_.c2 * u); };
    return controlled() ? std::max(at(range.lo), at(range.hi)) : at(0.0);
}

std::string CoeffFunctional::describe() const {
    const char* k = kind_ == Kind::PointwiseAt0 ? "pointwise" : kind_ == Kind::IntegralKernel ? "integral" : "affine";
    char buf[192];
    std::snprintf(buf, sizeof buf, "%s(scale=%g,offset=%g,c0=%g,c1=%g,c2=%g%s)", k, scale_, offset_, coupling_.c0,
                  coupling_.c1, coupling_.c2, clamp_ ? ",clamped" : "");
    return buf;
}

CoeffSet::CoeffSet(CoeffFunctional q, CoeffFunctional b, CoeffFunctional gamma, CoeffFunctional sigma, double tau,
                   ActionRange actions, bool allow_violation)
    : q_(q), b_(b), gamma_(gamma), sigma_(sigma), tau_(tau), actions_(actions) {
    if (!(tau >= 0.0)) throw config_error("delay must be >= 0", "grid.tau");
    if (actions.lo > actions.hi) throw config_error("action interval is empty", "actions");
    if (q_.controlled()) throw config_error("the neutral term Q must not depend on the control", "coefficients.Q");
    if (sigma_.controlled()) {
        throw config_error("the diffusion sigma must not depend on the control", "coefficients.sigma");
    }
    const double k0 = q_.lipschitz(tau_, actions_);
    if (!(k0 < 0.25)) {
        if (!allow_violation) {
            throw config_error("Lipschitz constant of Q is " + std::to_string(k0) + ", must be < 1/4",
                               "coefficients.Q.scale");
        }
        violating_ = true;
    }
}

CoeffSet CoeffSet::example(double tau) {
    return {CoeffFunctional::integral(0.3), CoeffFunctional::integral(10.0), CoeffFunctional::integral(0.4),
            CoeffFunctional::integral(5.0), tau};
}

CoeffSet CoeffSet::zeros(double tau) {
    return {CoeffFunctional::zero(), CoeffFunctional::zero(), CoeffFunctional::zero(), CoeffFunctional::zero(), tau};
}

LipschitzReport lipschitz_constants(const CoeffSet& set) noexcept {
    LipschitzReport r;
    const auto& a = set.actions();
    r.k1 = std::max({set.b().lipschitz(set.tau(), a), set.gamma().lipschitz(set.tau(), a),
                     set.sigma().lipschitz(set.tau(), a)});
    r.k0 = set.q().lipschitz(set.tau(), a);
    r.k0_ok = r.k0 < 0.25;
    r.contraction = std::sqrt(8.0 * r.k0 * r.k0 + 0.5);
    r.contraction_ok = r.contraction < 1.0;
    return r;
}

double CostSpec::running(double x, double u) const noexcept {
    const double du = u - u_ref;
    double v = q * x * x + r * du * du + lin * u;
    if (running_clamp) v = std::clamp(v, -*running_clamp, *running_clamp);
    return v;
}

double CostSpec::running_relaxed(double x, std::span<const double> atoms,
                                 std::span<const double> weights) const noexcept {
    double v = 0.0;
    for (std::size_t j = 0; j < atoms.size(); ++j) {
        if (weights[j] != 0.0) v += weights[j] * running(x, atoms[j]);
    }
    return v;
}

double CostSpec::terminal(double x) const noexcept {
    double v = p * x * x;
    if (terminal_clamp) v = std::clamp(v, -*terminal_clamp, *terminal_clamp);
    return v;
}

bool AssumptionReport::pass() const {
    return a3_running_bounded && a3_terminal_bounded && a4_bounded &&
           std::all_of(lipschitz.begin(), lipschitz.end(), [](const AssumptionEntry& e) { return e.pass; });
}

std::vector<std::pair<Path, Path>> random_probe_pairs(const TimeGrid& grid, std::size_t count, std::uint64_t seed) {
    std::vector<std::pair<Path, Path>> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        NormalStream xi(derive_seed(seed, "probe", k));
        std::uniform_real_distribution<double> unif(-2.0, 2.0);
        const double level = unif(xi.engine());
        const double vol = std::exp(unif(xi.engine()));
        const double bump = std::exp(unif(xi.engine())) * 0.1;
        Path x(grid, level);
        Path y(grid, level);
        const double sh = std::sqrt(grid.step());
        for (std::size_t i = 1; i < grid.size(); ++i) {
            x[i] = x[i - 1] + vol * sh * xi();
            y[i] = x[i] + bump * xi();
        }
        y[0] = x[0] + bump * xi();
        out.emplace_back(std::move(x), std::move(y));
    }
    return out;
}

AssumptionReport validate_assumptions(const CoeffSet& set, const CostSpec& cost,
                                      const std::vector<std::pair<Path, Path>>& probes, std::uint64_t seed) {
    if (probes.empty()) throw config_error("probe set must be nonempty", "probes");
    const auto lip = lipschitz_constants(set);
    const auto& range = set.actions();
    struct Role {
        const char* name;
        const CoeffFunctional* f;
        double declared;
    };
    const Role roles[] = {{"Q", &set.q(), lip.k0},
                          {"b", &set.b(), lip.k1},
                          {"gamma", &set.gamma(), lip.k1},
                          {"sigma", &set.sigma(), lip.k1}};

    AssumptionReport report;
    Engine eng(derive_seed(seed, "validate"));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (const auto& role : roles) {
        AssumptionEntry e{role.name, role.declared, 0.0, 0, true};
        for (const auto& [x, y] : probes) {
            const auto& g = x.grid();
            const std::size_t span = g.steps() - g.zero_index() + 1;
            const std::size_t anchor = g.zero_index() + std::min(span - 1, static_cast<std::size_t>(unif(eng) * span));
            const Segment sx(x, anchor);
            const Segment sy(y, anchor);
            const double dist = sx.sup_distance(sy);
            const double t = g.time(anchor);
            std::optional<double> u;
            if (role.f->controlled()) u = range.lo + (range.hi - range.lo) * unif(eng);
            if (dist == 0.0) continue;
            const double ratio = std::abs((*role.f)(t, sx, u) - (*role.f)(t, sy, u)) / dist;
            ++e.probes;
            e.worst_ratio = std::max(e.worst_ratio, ratio);
        }
        e.pass = e.worst_ratio <= role.declared * (1.0 + 1e-9) + 1e-12;
        report.lipschitz.push_back(e);
    }
    report.a3_running_bounded = cost.running_bounded();
    report.a3_terminal_bounded = cost.terminal_bounded();
    report.a4_bounded = set.b().bound(range).has_value() && set.gamma().bound(range).has_value() &&
                        set.sigma().bound(range).has_value();
    return report;
}

}  // namespace gnsfde
