#pragma once

#include <cmath>
#include <cstdint>

namespace tcsim {

// Counter-based substreams: every random decision in a run is drawn from a
// stream keyed by (master seed, purpose, a, b), so populations, per-day
// choices and design samples are independently reproducible.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

enum class Stream : std::uint64_t {
    population = 1,
    choice = 2,
    lhs_design = 3,
    acquisition = 4,
    test = 99,
};

inline std::uint64_t substream_seed(std::uint64_t master, Stream purpose,
                                    std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t s = mix64(master ^ 0x6a09e667f3bcc908ULL);
    s = mix64(s ^ mix64(static_cast<std::uint64_t>(purpose)));
    s = mix64(s ^ mix64(a));
    s = mix64(s ^ mix64(b));
    return s;
}

// splitmix64 generator; cheap to construct, one mix per draw.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0,1)
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in (0,1), safe for logs
    double next_open() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    // standard normal, Box-Muller
    double next_normal() {
        const double u1 = next_open();
        const double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    // Gumbel(location 0, given scale)
    double next_gumbel(double scale) { return -scale * std::log(-std::log(next_open())); }

private:
    std::uint64_t state_;
};

}  // namespace tcsim
