#pragma once

#include <bit>
#include <cstdint>
#include <limits>
#include <span>

namespace polyheat {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) noexcept
{
    return mix64(h ^ (v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2)));
}

/// Counter-based generator: output i is mix64(key + (i + 1) * golden). Any stream position
/// can be reached in O(1), so independent queries never share state.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t key, std::uint64_t counter = 0) noexcept : key_(key), counter_(counter) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept { return mix64(key_ + (++counter_) * 0x9E3779B97F4A7C15ULL); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    void seek(std::uint64_t counter) noexcept { counter_ = counter; }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

/// Generator key for a query identified by a point and a radius.
inline std::uint64_t query_key(std::uint64_t seed, std::span<const double> x, double r) noexcept
{
    std::uint64_t h = mix64(seed);
    for (const double v : x) {
        h = hash_combine(h, std::bit_cast<std::uint64_t>(v));
    }
    return hash_combine(h, std::bit_cast<std::uint64_t>(r));
}

} // namespace polyheat
