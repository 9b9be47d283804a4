#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace gnsfde {

// splitmix64 finalizer; used to derive independent child seeds from a root.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t tag_hash(std::string_view tag) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Seed for the child stream `(tag, index)` of `root`. Deterministic and
/// independent of evaluation order, so partial re-runs reproduce.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::string_view tag,
                                    std::uint64_t index = 0) noexcept {
    return mix64(mix64(root ^ tag_hash(tag)) + mix64(index + 0x51ed2701ULL));
}

using Engine = std::mt19937_64;

class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : engine_(seed) {}
    double operator()() { return dist_(engine_); }
    Engine& engine() { return engine_; }

private:
    Engine engine_;
    std::normal_distribution<double> dist_{0.0, 1.0};
};

}  // namespace gnsfde
