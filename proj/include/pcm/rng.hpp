// SPDX-License-Identifier: Apache-2.0
//
// Counter-based RNG: a stateless hash of (seed, stream, counter) so that
// per-cell draws are independent of iteration order and reproducible under
// any partitioning of the update loop.

#ifndef PCM_RNG_HPP
#define PCM_RNG_HPP

#include <cstdint>

namespace pcm {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
}  // namespace detail

// Hash of a (seed, stream, counter) triple; two mixing rounds decorrelate
// nearby counters.
inline std::uint64_t hash_counter(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    std::uint64_t h = detail::splitmix64(seed ^ 0x243f6a8885a308d3ULL);
    h = detail::splitmix64(h ^ stream);
    h = detail::splitmix64(h ^ counter);
    return h;
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    return static_cast<double>(hash_counter(seed, stream, counter) >> 11) * 0x1.0p-53;
}

// Small sequential generator for setup tasks (grain seeding); deterministic
// per seed, cheap to fork.
class SequentialRng {
  public:
    explicit SequentialRng(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(seed), stream_(stream) {}
    double next01() { return uniform01(seed_, stream_, counter_++); }
    std::uint64_t next_u64() { return hash_counter(seed_, stream_, counter_++); }
    // Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  private:
    std::uint64_t seed_, stream_;
    std::uint64_t counter_ = 0;
};

}  // namespace pcm

#endif
