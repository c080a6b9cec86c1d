#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace dgsim {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Purposes for which an object draws randomness. Each (object, purpose)
/// pair gets its own child stream of the master seed.
enum class StreamPurpose : std::uint32_t {
    Cpu = 1,
    Network = 2,
    Workload = 3,
    ThinkTime = 4,
    Protocol = 5,
};

class RandomStream {
public:
    using Engine = std::mt19937_64;

    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    /// Child stream for one simulation object. Independent of the order in
    /// which objects are created.
    static RandomStream child(std::uint64_t master, std::uint32_t object_id,
                              StreamPurpose purpose) {
        std::uint64_t s = splitmix64(master);
        s = splitmix64(s ^ (static_cast<std::uint64_t>(object_id) << 20));
        s = splitmix64(s ^ static_cast<std::uint64_t>(purpose));
        return RandomStream(s);
    }

    /// Uniform in [0, 1).
    double uniform() { return std::generate_canonical<double, 53>(engine_); }

    double exponential(double mean) {
        return -mean * std::log1p(-uniform());
    }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
    }

    std::uint64_t between(std::uint64_t lo, std::uint64_t hi) {
        return std::uniform_int_distribution<std::uint64_t>(lo, hi)(engine_);
    }

    Engine& engine() noexcept { return engine_; }

private:
    Engine engine_;
};

} // namespace dgsim
