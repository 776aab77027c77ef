#pragma once

// Counter-based random streams. A stream is fully determined by a 64-bit key
// and a position counter, so draws for trial i never depend on how many
// draws other trials consumed or on which thread ran them.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace rwave {

constexpr std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t hash64(std::uint64_t seed, std::uint64_t trial_id) {
    return splitmix64(seed ^ splitmix64(trial_id ^ 0xD1B54A32D192ED03ULL));
}

class CounterStream {
public:
    using result_type = std::uint64_t;

    explicit CounterStream(std::uint64_t key, std::uint64_t start = 0) : key_(key), counter_(start) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() { return splitmix64(key_ + 0x9E3779B97F4A7C15ULL * counter_++); }

    // Uniform on (0, 1), never exactly 0.
    double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

    // Box-Muller; the second variate of each pair is kept for the next call.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double theta = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    std::uint64_t key() const { return key_; }
    std::uint64_t position() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

inline CounterStream trial_stream(std::uint64_t seed, std::uint64_t trial_id) {
    return CounterStream(hash64(seed, trial_id));
}

} // namespace rwave
