#include "gnsfde/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gnsfde/error.hpp"

namespace gnsfde {

TimeGrid::TimeGrid(double tau, double horizon, std::size_t steps)
    : tau_(tau), horizon_(horizon), steps_(steps), h_(0.0), zero_(0) {
    if (!std::isfinite(tau) || tau < 0.0) throw config_error("delay length must be finite and >= 0", "grid.tau");
    if (!std::isfinite(horizon) || horizon <= 0.0) throw config_error("horizon must be finite and > 0", "grid.T");
    if (steps == 0) throw config_error("step count must be positive", "grid.steps");
    h_ = (horizon + tau) / static_cast<double>(steps);
    const double ratio = tau / h_;
    const double n0 = std::round(ratio);
    if (std::abs(n0 * h_ - tau) > 1e-9 * std::max(1.0, tau)) {
        throw config_error("delay " + std::to_string(tau) + " is not an integer multiple of h = " +
                               std::to_string(h_),
                           "grid.steps");
    }
    zero_ = static_cast<std::size_t>(n0);
    if (zero_ >= steps_) throw config_error("grid has no forward steps", "grid.steps");
}

Path::Path(TimeGrid grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

Path::Path(TimeGrid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw usage_error("path length does not match grid");
    if (!all_finite()) throw input_error("path values must be finite");
}

Path Path::from_history(const TimeGrid& grid, const std::function<double(double)>& eta) {
    Path p(grid);
    const std::size_t n0 = grid.zero_index();
    for (std::size_t k = 0; k <= n0; ++k) p.values_[k] = eta(grid.time(k));
    std::fill(p.values_.begin() + static_cast<std::ptrdiff_t>(n0) + 1, p.values_.end(), p.values_[n0]);
    if (!p.all_finite()) throw input_error("initial history must be finite");
    return p;
}

bool Path::all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

Segment Path::segment(std::size_t k) const { return Segment(*this, k); }

Segment::Segment(const Path& path, std::size_t anchor) : path_(&path), anchor_(anchor) {
    const auto& g = path.grid();
    if (anchor < g.zero_index() || anchor > g.steps()) {
        throw domain_error("segment anchor must be a grid node in [0, T]");
    }
}

double Segment::operator()(double lambda) const {
    const auto& g = path_->grid();
    const double h = g.step();
    const double slack = 1e-12 * std::max(1.0, g.tau());
    if (!(lambda >= -g.tau() - slack && lambda <= slack)) {
        throw domain_error("segment offset " + std::to_string(lambda) + " outside [-tau, 0]");
    }
    const double r = lambda / h;
    const double nearest = std::round(r);
    const auto& x = *path_;
    if (std::abs(r - nearest) <= 1e-9) {
        return x[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(anchor_) + static_cast<std::ptrdiff_t>(nearest))];
    }
    const double lower = std::floor(r);
    const double frac = r - lower;
    const auto k = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(anchor_) + static_cast<std::ptrdiff_t>(lower));
    return x[k] + frac * (x[k + 1] - x[k]);
}

std::span<const double> Segment::window() const noexcept {
    const std::size_t n0 = path_->grid().zero_index();
    return path_->values().subspan(anchor_ - n0, n0 + 1);
}

double Segment::integral() const noexcept {
    const auto w = window();
    if (w.size() < 2) return 0.0;
    double sum = 0.5 * (w.front() + w.back());
    for (std::size_t i = 1; i + 1 < w.size(); ++i) sum += w[i];
    return sum * path_->grid().step();
}

double Segment::sup_distance(const Segment& other) const {
    if (!(path_->grid() == other.path_->grid())) throw usage_error("segments live on different grids");
    const auto a = window();
    const auto b = other.window();
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

}  // namespace gnsfde
