#pragma once

#include <cstdint>
#include <cmath>
#include <random>

namespace kinuq {

// 64-bit mixer (splitmix64 finalizer). Used to derive well-separated engine
// seeds from a (user seed, stream index) pair.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Reproducible random stream. Stream k of a given seed produces the same
// sequence no matter how many other streams exist or which thread runs it,
// which keeps multi-node runs bitwise deterministic under any parallel
// schedule. Variate transforms are hand-rolled on top of the (standard-pinned)
// mt19937_64 output so results do not depend on library internals.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream)
        : engine_(mix64(seed ^ mix64(stream))) {}

    // uniform on [0,1), 53-bit resolution
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double a, double b) {
        return a + (b - a) * uniform01();
    }

    // standard normal via Box-Muller; stateless (second variate discarded)
    double normal() {
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(6.283185307179586476925286766559 * u2);
    }

    // +a or -a with equal probability
    double two_point(double a) {
        return (engine_() >> 63) ? a : -a;
    }

    std::uint64_t raw() { return engine_(); }

    // uniform integer in [0, n); multiply-shift reduction (bias ~ n / 2^64)
    std::uint64_t bounded(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(engine_()) * n) >> 64);
    }

private:
    std::mt19937_64 engine_;
};

} // namespace kinuq
