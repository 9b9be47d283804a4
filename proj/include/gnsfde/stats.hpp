#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace gnsfde {

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

// Welford accumulator; se is the standard error of the mean.
class RunningStats {
public:
    void add(double x) noexcept {
        ++n_;
        const double d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (x - mean_);
    }
    std::size_t count() const noexcept { return n_; }
    double mean() const noexcept { return mean_; }
    double variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    double se() const noexcept { return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }
    MeanSe result() const noexcept { return {mean(), se()}; }

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

inline MeanSe mean_se(std::span<const double> xs) noexcept {
    RunningStats s;
    for (double x : xs) s.add(x);
    return s.result();
}

}  // namespace gnsfde
