#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace fedrisk {

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

} // namespace detail

// Derives a seed for the (id, round) stream of a master seed. Streams for
// distinct (id, round) pairs are statistically independent, so per-device
// work can run in any order, or in parallel, without changing results.
// Convention used throughout: id >= 0 is a device, id = -1 is the server,
// id <= -2 is reserved for setup plumbing (data splits, weight init).
inline std::uint64_t stream_seed(std::uint64_t master, std::int64_t id, std::int64_t round) {
    std::uint64_t h = detail::mix64(master + detail::kGolden);
    h = detail::mix64(h ^ (static_cast<std::uint64_t>(id) + detail::kGolden));
    h = detail::mix64(h ^ (static_cast<std::uint64_t>(round) + 0x632be59bd9b4e019ull));
    return h;
}

// Small counter-based generator (splitmix64). All randomness in this project
// goes through it: standard-library distributions are implementation-defined
// and would break the byte-identical reproducibility contract.
class SplitRng {
public:
    explicit SplitRng(std::uint64_t seed) : state_(seed) {}

    static SplitRng stream(std::uint64_t master, std::int64_t id, std::int64_t round) {
        return SplitRng(stream_seed(master, id, round));
    }

    std::uint64_t next_u64() {
        state_ += detail::kGolden;
        return detail::mix64(state_);
    }

    // Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [0, bound). Lemire's multiply-shift; bias is < 2^-64.
    std::uint64_t next_below(std::uint64_t bound) {
        const unsigned __int128 wide = static_cast<unsigned __int128>(next_u64()) * bound;
        return static_cast<std::uint64_t>(wide >> 64);
    }

    // Standard normal via Box-Muller. Draws two uniforms per call.
    double next_normal() {
        const double u1 = 1.0 - next_double(); // (0, 1]
        const double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.28318530717958647692 * u2);
    }

    // Fisher-Yates.
    template <class T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(values[i - 1], values[j]);
        }
    }

    // k distinct values from {0, ..., n-1}, returned in ascending order.
    std::vector<int> sample_without_replacement(int n, int k) {
        std::vector<int> pool(static_cast<std::size_t>(n));
        std::iota(pool.begin(), pool.end(), 0);
        k = std::min(k, n);
        // Partial Fisher-Yates: the first k slots end up uniform without replacement.
        for (int i = 0; i < k; ++i) {
            const int j = i + static_cast<int>(next_below(static_cast<std::uint64_t>(n - i)));
            std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
        }
        pool.resize(static_cast<std::size_t>(k));
        std::sort(pool.begin(), pool.end());
        return pool;
    }

private:
    std::uint64_t state_;
};

} // namespace fedrisk
