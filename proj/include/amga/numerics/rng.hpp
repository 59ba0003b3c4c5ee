#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace amga {

/// xoshiro256** (Blackman & Vigna, 2018) seeded through splitmix64.
///
/// Every distribution below is derived from next_u64() with fixed
/// arithmetic, so a seed yields the same stream on every platform. The
/// <random> distributions are deliberately not used: their output is
/// implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) { reseed(seed); }

    void reseed(std::uint64_t seed)
    {
        seed_ = seed;
        std::uint64_t sm = seed;
        for (auto& s : state_) s = splitmix64(sm);
    }

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64()
    {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, bound) via Lemire's multiply-shift with rejection.
    std::uint64_t below(std::uint64_t bound)
    {
        if (bound <= 1) return 0;
        unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                m = static_cast<unsigned __int128>(next_u64()) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Uniform integer in [lo, hi] inclusive.
    std::int64_t between(std::int64_t lo, std::int64_t hi)
    {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    /// Standard normal via Box-Muller; the second variate is discarded so the
    /// stream position depends only on the number of calls.
    double normal()
    {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Derive an independent child stream, e.g. one per episode.
    Rng fork(std::uint64_t salt)
    {
        std::uint64_t sm = next_u64() ^ (salt * 0x9E3779B97F4A7C15ull);
        return Rng(splitmix64(sm));
    }

    static std::uint64_t splitmix64(std::uint64_t& x)
    {
        std::uint64_t z = (x += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Stateless seed derivation: mix(base, index) for per-item streams.
    static std::uint64_t derive(std::uint64_t base, std::uint64_t index)
    {
        std::uint64_t x = base ^ (index * 0xD1B54A32D192ED03ull);
        return splitmix64(x);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t seed_ = 0;
    std::array<std::uint64_t, 4> state_{};
};

template <typename Seq>
void shuffle(Seq& seq, Rng& rng)
{
    for (std::size_t i = seq.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        using std::swap;
        swap(seq[i - 1], seq[j]);
    }
}

} // namespace amga
