#pragma once

#include <cstdint>

namespace strongfaith {

// Counter-based generator: one independent stream per (seed, stream) pair.
// Monte Carlo sample k draws from stream k, so results do not depend on how
// samples are partitioned across worker threads. The core is the splitmix64
// finalizer, which is cheap and passes the usual statistical batteries.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) {
    state_ = mix(seed) ^ mix(stream ^ 0x5851f42d4c957f2dULL);
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  // Uniform on [0, 1), 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on {0, ..., n-1}. Multiply-shift keeps the bias at n / 2^64.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

// Reserved stream ids. Sample streams use indices below 2^40 shifted by the
// cube index, so anything at or above 2^63 cannot collide with them.
inline constexpr std::uint64_t kStructureStream = 1ULL << 63;

}  // namespace strongfaith
