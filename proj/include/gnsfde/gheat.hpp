#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace gnsfde {

/// Volatility uncertainty interval [sigma_min, sigma_max], 0 < sigma_min <= sigma_max.
class VolBounds {
public:
    VolBounds(double sigma_min, double sigma_max);

    double sigma_min() const noexcept { return lo_; }
    double sigma_max() const noexcept { return hi_; }
    double var_min() const noexcept { return lo_ * lo_; }
    double var_max() const noexcept { return hi_ * hi_; }
    bool contains_rate(double c) const noexcept;

private:
    double lo_;
    double hi_;
};

/// G(a) = (sigma_max^2 a^+ - sigma_min^2 a^-) / 2.
double g_of(double a, const VolBounds& bounds) noexcept;

/// Uniform spatial grid with `nx` interior points; nodes 0 and nx+1 are the
/// Dirichlet boundaries.
struct SpatialGrid {
    double x_min;
    double x_max;
    std::size_t nx;

    SpatialGrid(double x_min, double x_max, std::size_t nx);
    /// Symmetric grid [-half_width, half_width] whose spacing is `dx` (half_width is
    /// rounded up to a multiple of dx so that x = 0 is a node).
    static SpatialGrid centered(double half_width, double dx);

    double dx() const noexcept { return (x_max - x_min) / static_cast<double>(nx + 1); }
    double x(std::size_t i) const noexcept { return x_min + static_cast<double>(i) * dx(); }
    std::size_t nodes() const noexcept { return nx + 2; }
};

/// Stored time levels of an explicit G-heat march.
class GHeatSolution {
public:
    GHeatSolution(SpatialGrid grid, VolBounds bounds, double dt, std::size_t steps,
                  std::vector<std::size_t> level_steps, std::vector<std::vector<double>> levels);

    const SpatialGrid& grid() const noexcept { return grid_; }
    const VolBounds& bounds() const noexcept { return bounds_; }
    double dt() const noexcept { return dt_; }
    std::size_t steps() const noexcept { return steps_; }
    double t_end() const noexcept { return dt_ * static_cast<double>(steps_); }

    std::size_t level_count() const noexcept { return levels_.size(); }
    /// Step index of stored level j (level 0 is the initial datum).
    std::size_t level_step(std::size_t j) const noexcept { return level_steps_[j]; }
    std::span<const double> level(std::size_t j) const noexcept { return levels_[j]; }
    std::span<const double> final_level() const noexcept { return levels_.back(); }

    /// Linear interpolation of the final level at x.
    double at(double x) const;

private:
    SpatialGrid grid_;
    VolBounds bounds_;
    double dt_;
    std::size_t steps_;
    std::vector<std::size_t> level_steps_;
    std::vector<std::vector<double>> levels_;
};

struct GHeatOptions {
    /// Keep every `store_stride`-th level (0 keeps only the initial and final level).
    std::size_t store_stride = 0;
};

/**
 * Explicit finite-difference march of u_t = G(u_xx), u(0, x) = phi(x).
 *
 * u^{j+1}_i = u^j_i + dt * G((u^j_{i+1} - 2u^j_i + u^j_{i-1}) / dx^2), boundary
 * nodes frozen at phi. The requested dt must satisfy dt <= dx^2 / (2 sigma_max^2);
 * the march uses the largest dt' <= dt that divides t_end evenly.
 */
GHeatSolution solve_g_heat(const std::function<double(double)>& phi, const VolBounds& bounds,
                           double t_end, const SpatialGrid& grid, double dt,
                           const GHeatOptions& options = {});

/// Largest explicit step allowed on a grid with spacing dx.
double max_stable_dt(double dx, const VolBounds& bounds) noexcept;

/// Piecewise-linear smoothed indicator of (-inf, y]: 1 below y - eps, 0 above y + eps.
double smoothed_step(double x, double y, double eps) noexcept;

struct GNormalOptions {
    double dx = 0.02;
    /// Smoothing half-width; <= 0 selects 2 * dx.
    double eps = 0.0;
    /// Spatial half-width; <= 0 selects max(6 sigma_max sqrt(t), 1) + 4.
    double half_width = 0.0;
    /// Fraction of the stability bound used as time step.
    double cfl = 0.9;
    /// Lower distribution -E[-1{X <= y}] instead of the upper one.
    bool lower = false;
};

/// E[1{X <= y}] for X ~ N(0, [sigma_min^2 t, sigma_max^2 t]) via one PDE solve with
/// the smoothed indicator centred at y, read at x = 0. Clamped to [0, 1].
double g_normal_upper_cdf(double y, const VolBounds& bounds, double t, const GNormalOptions& options = {});

struct GNormalTable {
    std::vector<double> y;
    std::vector<double> cdf;
    std::vector<double> density;
};

/**
 * CDF and density on a y-grid from a single solve: by translation invariance of
 * the G-heat equation, the solution for a step centred at y read at 0 equals the
 * solution for a step centred at 0 read at -y. Density is the centred
 * difference of the CDF with spacing dx, negative round-off clipped to 0.
 */
GNormalTable g_normal_table(const VolBounds& bounds, double t, std::span<const double> y,
                            const GNormalOptions& options = {});

/// Convenience: grid y_min, y_min + step, ..., y_max.
std::vector<double> linspace_step(double lo, double hi, double step);

}  // namespace gnsfde
