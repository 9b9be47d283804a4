#include "gnsfde/nsfde.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gnsfde/error.hpp"

namespace gnsfde {

namespace {

double eval_role(const CoeffFunctional& f, double t, const Segment& seg, const StepControls* controls,
                 std::size_t step) {
    if (!f.controlled()) return f(t, seg);
    if (controls == nullptr) throw usage_error("controlled coefficient requires a control");
    return f.relaxed(t, seg, controls->atoms(), controls->weights(step));
}

void check_alignment(const Path& eta, const GBMPath& gbm, const StepControls* controls) {
    if (!(eta.grid() == gbm.grid)) throw usage_error("initial history and noise path live on different grids");
    if (controls != nullptr && controls->steps() != gbm.forward_steps()) {
        throw usage_error("control schedule does not match the grid");
    }
}

bool identically_zero(const CoeffFunctional& f) noexcept {
    return f.state_free() && !f.controlled() && f.offset() == 0.0;
}

// b h + gamma d<B> + sigma dB on step j (node k = N0 + j) of the segment-bearing path.
double increment(const CoeffSet& c, const Path& x, std::size_t k, std::size_t j, const GBMPath& gbm,
                 const StepControls* controls) {
    const auto seg = x.segment(k);
    const double t = x.grid().time(k);
    double inc = 0.0;
    if (!identically_zero(c.b())) {
        inc += eval_role(c.b(), t, seg, controls, j) * x.grid().step();
    }
    if (!identically_zero(c.gamma())) {
        inc += eval_role(c.gamma(), t, seg, controls, j) * gbm.dqv(j);
    }
    if (!identically_zero(c.sigma())) {
        inc += c.sigma()(t, seg) * gbm.db(j);
    }
    return inc;
}

}  // namespace

void EulerConfig::validate() const {
    if (!(tolerance > 0.0)) throw config_error("neutral-solve tolerance must be positive", "euler.tolerance");
    if (max_iterations < 1) throw config_error("neutral-solve iteration cap must be >= 1", "euler.max_iterations");
    if (!(state_clamp > 0.0)) throw config_error("state clamp must be positive", "euler.state_clamp");
}

Path simulate_nsfde(const CoeffSet& coeffs, const Path& eta, const GBMPath& gbm, const StepControls* controls,
                    const EulerConfig& cfg) {
    cfg.validate();
    check_alignment(eta, gbm, controls);
    const auto& g = eta.grid();
    const std::size_t n0 = g.zero_index();
    Path x(g);
    for (std::size_t k = 0; k <= n0; ++k) x[k] = eta[k];

    const auto& q = coeffs.q();
    for (std::size_t j = 0; j < gbm.forward_steps(); ++j) {
        const std::size_t k = n0 + j;
        const double rhs = x[k] - q(g.time(k), x.segment(k)) + increment(coeffs, x, k, j, gbm, controls);

        // X(t_{k+1}) = rhs + Q(t_{k+1}, X_{t_{k+1}}); Q may read the unknown itself.
        const double t1 = g.time(k + 1);
        double guess = x[k];
        bool converged = false;
        for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
            x[k + 1] = guess;
            const double next = rhs + q(t1, x.segment(k + 1));
            const bool done = std::abs(next - guess) <= cfg.tolerance * (1.0 + std::abs(next));
            guess = next;
            if (done || !std::isfinite(next)) {
                converged = std::isfinite(next);
                break;
            }
        }
        x[k + 1] = guess;
        if (!std::isfinite(guess) || std::abs(guess) > cfg.state_clamp) {
            throw Error(ErrorKind::Divergence, "state left the clamp at node " + std::to_string(k + 1), std::nullopt,
                        k + 1);
        }
        if (!converged) {
            throw Error(ErrorKind::Step, "neutral solve did not converge at node " + std::to_string(k + 1),
                        std::nullopt, k + 1);
        }
    }
    return x;
}

Path picard_apply(const Path& x, const CoeffSet& coeffs, const Path& eta, const GBMPath& gbm,
                  const StepControls* controls) {
    check_alignment(eta, gbm, controls);
    if (!(x.grid() == eta.grid())) throw usage_error("path and initial history live on different grids");
    const auto& g = eta.grid();
    const std::size_t n0 = g.zero_index();

    Path work(x);
    for (std::size_t k = 0; k <= n0; ++k) work[k] = eta[k];
    Path out(g);
    for (std::size_t k = 0; k <= n0; ++k) out[k] = eta[k];

    const auto& q = coeffs.q();
    const double q0 = q(0.0, eta.segment(n0));
    double acc = 0.0;
    for (std::size_t k = n0; k <= g.steps(); ++k) {
        out[k] = eta[n0] + q(g.time(k), work.segment(k)) - q0 + acc;
        if (k < g.steps()) acc += increment(coeffs, work, k, k - n0, gbm, controls);
    }
    return out;
}

NCNormConfig NCNormConfig::from(double k1, double horizon, double sigma_max, double c2) {
    NCNormConfig cfg;
    cfg.c = 8.0 * k1 * k1 * (horizon + horizon * sigma_max * sigma_max + c2);
    return cfg;
}

double nc_norm(const PathGroups& x, const PathGroups& y, const NCNormConfig& cfg) {
    if (x.size() != y.size() || x.empty()) throw usage_error("path groups do not match");
    if (!(cfg.c >= 0.0)) throw config_error("N_C weight must be >= 0", "nc.c");
    const TimeGrid& g = x.front().at(0).grid();
    for (std::size_t p = 0; p < x.size(); ++p) {
        if (x[p].size() != y[p].size() || x[p].empty()) throw usage_error("path groups do not match");
        for (std::size_t s = 0; s < x[p].size(); ++s) {
            if (!(x[p][s].grid() == g) || !(y[p][s].grid() == g)) throw usage_error("paths live on different grids");
        }
    }
    const std::size_t n0 = g.zero_index();
    const double h = g.step();
    double integral = 0.0;
    for (std::size_t k = n0; k <= g.steps(); ++k) {
        double upper = 0.0;
        for (std::size_t p = 0; p < x.size(); ++p) {
            double sum = 0.0;
            for (std::size_t s = 0; s < x[p].size(); ++s) {
                const double d = x[p][s][k] - y[p][s][k];
                sum += d * d;
            }
            const double mean = sum / static_cast<double>(x[p].size());
            upper = p == 0 ? mean : std::max(upper, mean);
        }
        const double w = (k == n0 || k == g.steps()) ? 0.5 : 1.0;
        integral += w * h * std::exp(-2.0 * cfg.c * g.time(k)) * upper;
    }
    return std::sqrt(integral);
}

double nc_norm(const Path& x, const Path& y, const NCNormConfig& cfg) {
    return nc_norm(PathGroups{{x}}, PathGroups{{y}}, cfg);
}

double contraction_ratio(const PathGroups& x, const PathGroups& y, const CoeffSet& coeffs, const GBMGroups& gbm,
                         const Path& eta, const StepControls* controls, const NCNormConfig& cfg) {
    const double denom = nc_norm(x, y, cfg);
    if (!(denom > 1e-9)) throw usage_error("contraction ratio needs N_C(X - Y) > 1e-9");
    if (gbm.size() != x.size()) throw usage_error("noise groups do not match path groups");
    PathGroups tx(x.size());
    PathGroups ty(y.size());
    for (std::size_t p = 0; p < x.size(); ++p) {
        if (gbm[p].size() != x[p].size()) throw usage_error("noise groups do not match path groups");
        for (std::size_t s = 0; s < x[p].size(); ++s) {
            tx[p].push_back(picard_apply(x[p][s], coeffs, eta, gbm[p][s], controls));
            ty[p].push_back(picard_apply(y[p][s], coeffs, eta, gbm[p][s], controls));
        }
    }
    return nc_norm(tx, ty, cfg) / denom;
}

PicardTrace picard_iterate(const CoeffSet& coeffs, const GBMGroups& gbm, const Path& eta,
                           const StepControls* controls, const NCNormConfig& cfg, std::size_t max_iter,
                           double stop) {
    Path zero(eta);
    for (std::size_t k = eta.grid().zero_index() + 1; k < zero.size(); ++k) zero[k] = 0.0;
    PathGroups current(gbm.size());
    for (std::size_t p = 0; p < gbm.size(); ++p) current[p].assign(gbm[p].size(), zero);

    PicardTrace trace;
    for (std::size_t it = 0; it < max_iter; ++it) {
        PathGroups next(gbm.size());
        for (std::size_t p = 0; p < gbm.size(); ++p) {
            next[p].reserve(gbm[p].size());
            for (std::size_t s = 0; s < gbm[p].size(); ++s) {
                next[p].push_back(picard_apply(current[p][s], coeffs, eta, gbm[p][s], controls));
            }
        }
        trace.distances.push_back(nc_norm(next, current, cfg));
        current = std::move(next);
        if (trace.distances.back() < stop) break;
    }
    trace.last = std::move(current);
    return trace;
}

}  // namespace gnsfde
