#include "gnsfde/controls.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "gnsfde/error.hpp"

namespace gnsfde {

namespace {

void check_boundaries(const std::vector<double>& b) {
    if (b.size() < 2 || b.front() != 0.0) throw config_error("control blocks must start at 0", "control.blocks");
    for (std::size_t i = 1; i < b.size(); ++i) {
        if (!(b[i] > b[i - 1])) throw config_error("control block boundaries must increase", "control.blocks");
    }
}

// Block containing t; node times within a rounding error of a boundary belong to
// the block starting there.
std::size_t locate(const std::vector<double>& b, double t) noexcept {
    const double slack = 1e-9 * (b.back() - b.front()) / static_cast<double>(b.size());
    const auto it = std::upper_bound(b.begin(), b.end() - 1, t + slack);
    const auto i = static_cast<std::size_t>(it - b.begin());
    return i == 0 ? 0 : i - 1;
}

}  // namespace

ActionGrid::ActionGrid(std::vector<double> atoms) : atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw config_error("action grid needs at least one atom", "actions.atoms");
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        if (!std::isfinite(atoms_[i])) throw config_error("atoms must be finite", "actions.atoms");
        if (i > 0 && !(atoms_[i] > atoms_[i - 1])) {
            throw config_error("atoms must be strictly increasing", "actions.atoms");
        }
    }
}

std::vector<double> uniform_blocks(double horizon, std::size_t blocks) {
    if (blocks == 0) throw config_error("block count must be positive", "control.blocks");
    std::vector<double> b(blocks + 1);
    for (std::size_t i = 0; i <= blocks; ++i) b[i] = horizon * static_cast<double>(i) / static_cast<double>(blocks);
    b.back() = horizon;
    return b;
}

StrictControl::StrictControl(ActionGrid actions, std::vector<double> boundaries, std::vector<std::size_t> choice)
    : actions_(std::move(actions)), bounds_(std::move(boundaries)), choice_(std::move(choice)) {
    check_boundaries(bounds_);
    if (choice_.size() + 1 != bounds_.size()) throw config_error("one atom per block required", "control.choice");
    for (auto c : choice_) {
        if (c >= actions_.size()) throw config_error("atom index out of range", "control.choice");
    }
}

StrictControl StrictControl::constant(ActionGrid actions, double horizon, std::size_t index) {
    return StrictControl(std::move(actions), {0.0, horizon}, {index});
}

std::size_t StrictControl::block_at(double t) const noexcept { return locate(bounds_, t); }

std::string StrictControl::encode() const {
    std::string s;
    for (std::size_t i = 0; i < choice_.size(); ++i) s += (i ? "|" : "") + std::to_string(choice_[i]);
    return s;
}

RelaxedControl::RelaxedControl(ActionGrid actions, std::vector<double> boundaries,
                               std::vector<std::vector<double>> weights)
    : actions_(std::move(actions)), bounds_(std::move(boundaries)), weights_(std::move(weights)) {
    check_boundaries(bounds_);
    if (weights_.size() + 1 != bounds_.size()) throw config_error("one weight row per block required", "control.weights");
    for (const auto& row : weights_) {
        if (row.size() != actions_.size()) throw config_error("weight row length must match atoms", "control.weights");
        double sum = 0.0;
        for (double w : row) {
            if (!(w >= 0.0)) throw config_error("weights must be nonnegative", "control.weights");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-12) throw config_error("weight rows must sum to 1", "control.weights");
    }
}

std::size_t RelaxedControl::block_at(double t) const noexcept { return locate(bounds_, t); }

bool RelaxedControl::is_dirac() const noexcept {
    return std::all_of(weights_.begin(), weights_.end(), [](const std::vector<double>& row) {
        return std::count_if(row.begin(), row.end(), [](double w) { return w != 0.0; }) == 1;
    });
}

std::string RelaxedControl::encode() const {
    std::string s;
    char buf[32];
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        if (i) s += '|';
        for (std::size_t j = 0; j < weights_[i].size(); ++j) {
            std::snprintf(buf, sizeof buf, "%s%.6g", j ? ";" : "", weights_[i][j]);
            s += buf;
        }
    }
    return s;
}

StepControls::StepControls(const StrictControl& u, const TimeGrid& grid)
    : atoms_(u.actions().atoms().begin(), u.actions().atoms().end()), steps_(grid.forward_steps()) {
    if (std::abs(u.horizon() - grid.horizon()) > 1e-12 * grid.horizon()) {
        throw usage_error("control horizon does not match the grid");
    }
    weights_.assign(steps_ * atoms_.size(), 0.0);
    for (std::size_t j = 0; j < steps_; ++j) {
        const double t = static_cast<double>(j) * grid.step();
        weights_[j * atoms_.size() + u.choice()[u.block_at(t)]] = 1.0;
    }
}

StepControls::StepControls(const RelaxedControl& mu, const TimeGrid& grid)
    : atoms_(mu.actions().atoms().begin(), mu.actions().atoms().end()), steps_(grid.forward_steps()) {
    if (std::abs(mu.horizon() - grid.horizon()) > 1e-12 * grid.horizon()) {
        throw usage_error("control horizon does not match the grid");
    }
    weights_.resize(steps_ * atoms_.size());
    for (std::size_t j = 0; j < steps_; ++j) {
        const auto row = mu.row(mu.block_at(static_cast<double>(j) * grid.step()));
        std::copy(row.begin(), row.end(), weights_.begin() + static_cast<std::ptrdiff_t>(j * atoms_.size()));
    }
}

}  // namespace gnsfde
