#include "gnsfde/gheat.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gnsfde/error.hpp"

namespace gnsfde {

VolBounds::VolBounds(double sigma_min, double sigma_max) : lo_(sigma_min), hi_(sigma_max) {
    if (!(std::isfinite(sigma_min) && sigma_min > 0.0)) {
        throw config_error("sigma_min must be finite and > 0", "vol.sigma_min");
    }
    if (!(std::isfinite(sigma_max) && sigma_max >= sigma_min)) {
        throw config_error("sigma_max must be finite and >= sigma_min", "vol.sigma_max");
    }
}

bool VolBounds::contains_rate(double c) const noexcept {
    const double slack = 1e-12 * var_max();
    return c >= var_min() - slack && c <= var_max() + slack;
}

double g_of(double a, const VolBounds& bounds) noexcept {
    return 0.5 * (bounds.var_max() * std::max(a, 0.0) - bounds.var_min() * std::max(-a, 0.0));
}

SpatialGrid::SpatialGrid(double lo, double hi, std::size_t n) : x_min(lo), x_max(hi), nx(n) {
    if (!(lo < 0.0 && 0.0 < hi)) throw config_error("spatial domain must straddle 0", "gheat.domain");
    if (n < 3) throw config_error("at least 3 interior points required", "gheat.nx");
}

SpatialGrid SpatialGrid::centered(double half_width, double dx) {
    if (!(dx > 0.0) || !(half_width > 0.0)) throw config_error("dx and half-width must be positive", "gheat.dx");
    const auto cells_half = static_cast<std::size_t>(std::ceil(half_width / dx - 1e-9));
    const double l = static_cast<double>(cells_half) * dx;
    return SpatialGrid(-l, l, 2 * cells_half - 1);
}

GHeatSolution::GHeatSolution(SpatialGrid grid, VolBounds bounds, double dt, std::size_t steps,
                             std::vector<std::size_t> level_steps, std::vector<std::vector<double>> levels)
    : grid_(grid), bounds_(bounds), dt_(dt), steps_(steps), level_steps_(std::move(level_steps)),
      levels_(std::move(levels)) {}

double GHeatSolution::at(double x) const {
    const auto u = final_level();
    const double dx = grid_.dx();
    const double r = (x - grid_.x_min) / dx;
    if (r < -1e-9 || r > static_cast<double>(grid_.nx + 1) + 1e-9) {
        throw domain_error("evaluation point " + std::to_string(x) + " outside the spatial grid");
    }
    const double nearest = std::round(r);
    if (std::abs(r - nearest) <= 1e-9) return u[static_cast<std::size_t>(nearest)];
    const auto i = static_cast<std::size_t>(std::floor(r));
    const double frac = r - std::floor(r);
    return u[i] + frac * (u[i + 1] - u[i]);
}

double max_stable_dt(double dx, const VolBounds& bounds) noexcept {
    return dx * dx / (2.0 * bounds.var_max());
}

GHeatSolution solve_g_heat(const std::function<double(double)>& phi, const VolBounds& bounds,
                           double t_end, const SpatialGrid& grid, double dt, const GHeatOptions& options) {
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw config_error("t_end must be finite and >= 0", "gheat.t");
    const double dx = grid.dx();
    if (!(dt > 0.0) || dt > max_stable_dt(dx, bounds) * (1.0 + 1e-12)) {
        throw config_error("time step " + std::to_string(dt) + " violates dt <= dx^2/(2 sigma_max^2) = " +
                               std::to_string(max_stable_dt(dx, bounds)),
                           "gheat.dt");
    }
    const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-12));
    const double dt_used = steps == 0 ? dt : t_end / static_cast<double>(steps);

    const std::size_t n = grid.nodes();
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) {
        u[i] = phi(grid.x(i));
        if (!std::isfinite(u[i])) throw input_error("initial datum is not finite at x = " + std::to_string(grid.x(i)));
    }

    std::vector<std::size_t> level_steps{0};
    std::vector<std::vector<double>> levels{u};

    const double lam = dt_used / (dx * dx);
    const double up = 0.5 * bounds.var_max() * lam;
    const double down = 0.5 * bounds.var_min() * lam;
    std::vector<double> next(u);
    for (std::size_t j = 1; j <= steps; ++j) {
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double d2 = u[i + 1] - 2.0 * u[i] + u[i - 1];
            next[i] = u[i] + (d2 > 0.0 ? up * d2 : down * d2);
        }
        std::swap(u, next);
        if (j == steps || (options.store_stride != 0 && j % options.store_stride == 0)) {
            level_steps.push_back(j);
            levels.push_back(u);
        }
    }
    return GHeatSolution(grid, bounds, dt_used, steps, std::move(level_steps), std::move(levels));
}

double smoothed_step(double x, double y, double eps) noexcept {
    if (x <= y - eps) return 1.0;
    if (x >= y + eps) return 0.0;
    return (y + eps - x) / (2.0 * eps);
}

namespace {

double auto_half_width(const VolBounds& bounds, double t) {
    return std::max(6.0 * bounds.sigma_max() * std::sqrt(t), 1.0) + 4.0;
}

GHeatSolution solve_step(double centre, double half_width, const VolBounds& bounds, double t,
                         const GNormalOptions& o) {
    if (!(o.dx > 0.0)) throw config_error("dx must be positive", "gnormal.dx");
    if (!(o.cfl > 0.0 && o.cfl <= 1.0)) throw config_error("cfl fraction must be in (0, 1]", "gnormal.cfl");
    const double eps = o.eps > 0.0 ? o.eps : 2.0 * o.dx;
    const auto grid = SpatialGrid::centered(half_width, o.dx);
    const double sign = o.lower ? -1.0 : 1.0;
    auto phi = [&](double x) { return sign * smoothed_step(x, centre, eps); };
    return solve_g_heat(phi, bounds, t, grid, o.cfl * max_stable_dt(grid.dx(), bounds));
}

}  // namespace

double g_normal_upper_cdf(double y, const VolBounds& bounds, double t, const GNormalOptions& options) {
    if (!(t > 0.0)) throw config_error("t must be positive", "gnormal.t");
    const double w = options.half_width > 0.0 ? options.half_width : auto_half_width(bounds, t);
    const auto sol = solve_step(y, w, bounds, t, options);
    const double v = options.lower ? -sol.at(0.0) : sol.at(0.0);
    return std::clamp(v, 0.0, 1.0);
}

GNormalTable g_normal_table(const VolBounds& bounds, double t, std::span<const double> y,
                            const GNormalOptions& options) {
    if (!(t > 0.0)) throw config_error("t must be positive", "gnormal.t");
    if (y.empty()) throw config_error("y-grid is empty", "gnormal.y");
    double ymax = 0.0;
    for (double v : y) ymax = std::max(ymax, std::abs(v));
    const double w = (options.half_width > 0.0 ? options.half_width : auto_half_width(bounds, t)) + ymax +
                     options.dx;
    const auto sol = solve_step(0.0, w, bounds, t, options);
    const double sign = options.lower ? -1.0 : 1.0;
    auto cdf_at = [&](double yy) { return std::clamp(sign * sol.at(-yy), 0.0, 1.0); };

    GNormalTable table;
    table.y.assign(y.begin(), y.end());
    table.cdf.reserve(y.size());
    table.density.reserve(y.size());
    const double d = options.dx;
    for (double yy : y) {
        table.cdf.push_back(cdf_at(yy));
        table.density.push_back(std::max(0.0, (cdf_at(yy + d) - cdf_at(yy - d)) / (2.0 * d)));
    }
    return table;
}

std::vector<double> linspace_step(double lo, double hi, double step) {
    if (!(step > 0.0) || hi < lo) throw config_error("invalid y-grid", "gnormal.y");
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = lo + static_cast<double>(i) * step;
    return out;
}

}  // namespace gnsfde
