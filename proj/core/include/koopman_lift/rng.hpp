#pragma once

#include <cstdint>
#include <functional>

namespace klift {

// splitmix64 finalizer; used to derive independent sub-stream seeds.
std::uint64_t mix64(std::uint64_t x);

/// Seed for sub-stream `index` of a base seed. Streams are counter-based so
/// results never depend on how work is split across threads.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index);

/// xoshiro256** generator with platform-independent real conversions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);
  /// Uniform on (0, hi].
  double uniform_open_closed(double hi);
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t s_[4];
};

/// Runs body(i) for i in [0, count) over `threads` workers (contiguous
/// blocks). body must only write to per-index state.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

}  // namespace klift
