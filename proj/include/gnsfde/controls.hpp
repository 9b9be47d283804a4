#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gnsfde/core_types.hpp"

namespace gnsfde {

/// Finite discretization a_1 < ... < a_m of the action interval.
class ActionGrid {
public:
    explicit ActionGrid(std::vector<double> atoms);

    std::size_t size() const noexcept { return atoms_.size(); }
    double operator[](std::size_t i) const noexcept { return atoms_[i]; }
    std::span<const double> atoms() const noexcept { return atoms_; }
    double lo() const noexcept { return atoms_.front(); }
    double hi() const noexcept { return atoms_.back(); }

private:
    std::vector<double> atoms_;
};

/// Block boundaries 0 = s_0 < s_1 < ... < s_K = T.
std::vector<double> uniform_blocks(double horizon, std::size_t blocks);

/// Piecewise-constant A-valued control: atom index per block.
class StrictControl {
public:
    StrictControl(ActionGrid actions, std::vector<double> boundaries, std::vector<std::size_t> choice);
    /// u(t) = a_index on all of [0, T].
    static StrictControl constant(ActionGrid actions, double horizon, std::size_t index);

    const ActionGrid& actions() const noexcept { return actions_; }
    const std::vector<double>& boundaries() const noexcept { return bounds_; }
    const std::vector<std::size_t>& choice() const noexcept { return choice_; }
    std::size_t blocks() const noexcept { return choice_.size(); }
    double horizon() const noexcept { return bounds_.back(); }

    std::size_t block_at(double t) const noexcept;
    double value_at(double t) const noexcept { return actions_[choice_[block_at(t)]]; }
    /// Compact text encoding, e.g. "0|2|1|1".
    std::string encode() const;

private:
    ActionGrid actions_;
    std::vector<double> bounds_;
    std::vector<std::size_t> choice_;
};

/// Deterministic relaxed control: per block, probability weights over the atoms.
class RelaxedControl {
public:
    RelaxedControl(ActionGrid actions, std::vector<double> boundaries, std::vector<std::vector<double>> weights);

    const ActionGrid& actions() const noexcept { return actions_; }
    const std::vector<double>& boundaries() const noexcept { return bounds_; }
    std::size_t blocks() const noexcept { return weights_.size(); }
    double horizon() const noexcept { return bounds_.back(); }
    std::span<const double> row(std::size_t block) const noexcept { return weights_[block]; }

    std::size_t block_at(double t) const noexcept;
    bool is_dirac() const noexcept;
    /// Rows joined by '|', weights by ';'.
    std::string encode() const;

private:
    ActionGrid actions_;
    std::vector<double> bounds_;
    std::vector<std::vector<double>> weights_;
};

/**
 * Control evaluated on the forward steps of a TimeGrid: for step j (left node
 * t_j) the weights over the atoms. Strict controls give one-hot rows.
 */
class StepControls {
public:
    StepControls(const StrictControl& u, const TimeGrid& grid);
    StepControls(const RelaxedControl& mu, const TimeGrid& grid);

    std::span<const double> atoms() const noexcept { return atoms_; }
    std::span<const double> weights(std::size_t step) const noexcept {
        return std::span<const double>(weights_).subspan(step * atoms_.size(), atoms_.size());
    }
    std::size_t steps() const noexcept { return steps_; }

private:
    std::vector<double> atoms_;
    std::vector<double> weights_;
    std::size_t steps_ = 0;
};

}  // namespace gnsfde
