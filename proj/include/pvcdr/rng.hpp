#pragma once

#include <cmath>
#include <cstdint>

namespace pvcdr {

// Identifies one reproducible random stream. The same (master_seed,
// stream_id) pair always yields the same stream; distinct stream_ids give
// statistically independent streams, so per-trial substreams can be drawn
// concurrently without coordination.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;
};

namespace detail {

// SplitMix64 finalizer, used to decorrelate derived stream ids.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Stream for sub-task `index` of a parent seed (outer trial, multistart, ...).
inline SeedSpec substream(const SeedSpec& seed, std::uint64_t index) {
  return SeedSpec{seed.master_seed,
                  detail::mix64(seed.stream_id ^ detail::mix64(index))};
}

// Counter-based generator: PCG32 (O'Neill), 64-bit state with the odd
// increment selecting one of 2^63 streams. Output is platform-independent,
// so streams are bit-reproducible across runs and thread schedules.
class RandomStream {
 public:
  explicit RandomStream(const SeedSpec& seed) {
    inc_ = (seed.stream_id << 1u) | 1u;
    next_u32();
    state_ += detail::mix64(seed.master_seed);
    next_u32();
  }

  std::uint32_t next_u32() {
    const std::uint64_t old = state_;
    state_ = old * 6364136223846793005ULL + inc_;
    const auto xorshifted =
        static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    const auto rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
  }

  /// Uniform on [0, 1), 53 random bits.
  double uniform() {
    const std::uint64_t hi = next_u32() >> 5;  // 27 bits
    const std::uint64_t lo = next_u32() >> 6;  // 26 bits
    return (static_cast<double>(hi) * 67108864.0 + static_cast<double>(lo)) *
           (1.0 / 9007199254740992.0);
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; values are produced in pairs and the
  /// spare is cached, so consumption per call is fixed given the stream.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t state_ = 0;
  std::uint64_t inc_ = 1;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace pvcdr
