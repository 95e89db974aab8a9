#ifndef JPAIS_RNG_HPP
#define JPAIS_RNG_HPP

#include <complex>
#include <cstdint>
#include <random>

namespace jpais {

using Rng = std::mt19937_64;

namespace detail {
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
}  // namespace detail

/// Independent substream for (seed, path...).  Runs and grid points draw
/// from disjoint streams so they can execute in any order or in parallel.
inline Rng make_stream(uint64_t seed, std::initializer_list<uint64_t> path) {
    uint64_t s = detail::splitmix64(seed ^ 0x6a09e667f3bcc908ULL);
    for (uint64_t p : path) s = detail::splitmix64(s ^ detail::splitmix64(p + 0x3c6ef372fe94f82bULL));
    return Rng(s);
}

inline double uniform01(Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double gaussian(Rng& rng) {
    return std::normal_distribution<double>(0.0, 1.0)(rng);
}

/// Circular complex Gaussian with E|z|^2 = 1.
inline std::complex<double> complex_gaussian(Rng& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    const double s = 1.0 / std::sqrt(2.0);
    return {s * n(rng), s * n(rng)};
}

}  // namespace jpais

#endif
