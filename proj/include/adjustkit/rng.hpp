#pragma once

#include <cstdint>
#include <limits>

namespace adjustkit {

/// Counter-based 64-bit generator (SplitMix64 finalizer over key + counter).
/// The n-th output depends only on (key, n), so independent streams are
/// obtained by choosing different keys; see `stream`.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t key = 0) noexcept : key_(mix(key)) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()() noexcept {
        return mix(key_ + kGamma * ++counter_);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept {
        return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    }

    std::uint64_t counter() const noexcept { return counter_; }

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Per-trial stream: seed XOR trial index.
inline CounterRng stream(std::uint64_t seed, std::uint64_t index) noexcept {
    return CounterRng(seed ^ index);
}

}  // namespace adjustkit
