#ifndef DECO_RNG_HPP
#define DECO_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>

namespace deco {

/// Counter-based random numbers built on the splitmix64 bijection.
/// Every draw is addressed by (seed, stream, counter), which makes
/// realizations reproducible independently of thread scheduling.
/// Algorithm name recorded in output metadata: "splitmix64+box-muller".
namespace rng {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Mixes a stream id into a seed; streams index realizations, qubits, ...
inline uint64_t substream(uint64_t seed, uint64_t stream) {
    return splitmix64(seed ^ splitmix64(stream * 0x9e3779b97f4a7c15ULL + 0x243f6a8885a308d3ULL));
}

/// Uniform in (0, 1), never exactly 0.
inline double uniform(uint64_t seed, uint64_t counter) {
    uint64_t bits = splitmix64(splitmix64(seed + counter) ^ counter);
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal via Box-Muller; each draw consumes two counters.
inline double gaussian(uint64_t seed, uint64_t counter) {
    double u1 = uniform(seed, 2 * counter);
    double u2 = uniform(seed, 2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline constexpr const char* algorithm_name = "splitmix64+box-muller";

}  // namespace rng
}  // namespace deco

#endif
