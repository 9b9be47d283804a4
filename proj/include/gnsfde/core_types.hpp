#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace gnsfde {

/**
 * Uniform grid on [-tau, T] with step h = (T + tau) / N.
 *
 * Nodes are t_k = (k - N0) * h so that t_{N0} = 0 exactly. The delay length
 * must be an integer multiple of h; segments then never extrapolate.
 */
class TimeGrid {
public:
    TimeGrid(double tau, double horizon, std::size_t steps);

    double tau() const noexcept { return tau_; }
    double horizon() const noexcept { return horizon_; }
    std::size_t steps() const noexcept { return steps_; }
    double step() const noexcept { return h_; }
    /// Index N0 of the node t = 0 (number of steps inside the delay window).
    std::size_t zero_index() const noexcept { return zero_; }
    std::size_t size() const noexcept { return steps_ + 1; }
    /// Number of steps on [0, T].
    std::size_t forward_steps() const noexcept { return steps_ - zero_; }

    double time(std::size_t k) const noexcept {
        return (static_cast<double>(k) - static_cast<double>(zero_)) * h_;
    }

    bool operator==(const TimeGrid& other) const noexcept {
        return tau_ == other.tau_ && horizon_ == other.horizon_ && steps_ == other.steps_;
    }

private:
    double tau_;
    double horizon_;
    std::size_t steps_;
    double h_;
    std::size_t zero_;
};

class Segment;

/// Trajectory sampled at every node of a TimeGrid.
class Path {
public:
    explicit Path(TimeGrid grid, double fill = 0.0);
    Path(TimeGrid grid, std::vector<double> values);

    /// Path whose history nodes (t <= 0) hold `eta(t)`; forward nodes hold eta(0).
    static Path from_history(const TimeGrid& grid, const std::function<double(double)>& eta);

    const TimeGrid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t k) const noexcept { return values_[k]; }
    double& operator[](std::size_t k) noexcept { return values_[k]; }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    /// Node value with the pre-history pad: index -1 returns X(t_0) = eta(-tau).
    double padded(std::ptrdiff_t k) const noexcept {
        return values_[k < 0 ? 0 : static_cast<std::size_t>(k)];
    }

    double at_zero() const noexcept { return values_[grid_.zero_index()]; }
    double terminal() const noexcept { return values_.back(); }

    bool all_finite() const noexcept;

    /// Delay window anchored at node `k` (requires k >= N0).
    Segment segment(std::size_t k) const;

private:
    TimeGrid grid_;
    std::vector<double> values_;
};

/// Non-owning view of X_t = {X(t + lambda) : -tau <= lambda <= 0} for a grid
/// node t >= 0. The backing Path must outlive the view.
class Segment {
public:
    Segment(const Path& path, std::size_t anchor);

    const Path& path() const noexcept { return *path_; }
    std::size_t anchor() const noexcept { return anchor_; }
    double anchor_time() const noexcept { return path_->grid().time(anchor_); }
    double tau() const noexcept { return path_->grid().tau(); }

    /// Linear interpolation of X(t + lambda); throws a domain error outside [-tau, 0].
    double operator()(double lambda) const;
    /// X(t), i.e. the segment evaluated at lambda = 0.
    double at_zero() const noexcept { return (*path_)[anchor_]; }

    /// Trapezoidal quadrature of X over [t - tau, t] on the grid nodes.
    double integral() const noexcept;

    /// sup over the window nodes of |X - Y|. Both segments must share the grid.
    double sup_distance(const Segment& other) const;

    std::span<const double> window() const noexcept;

private:
    const Path* path_;
    std::size_t anchor_;
};

}  // namespace gnsfde
