#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace fdakit {

/// Seeded random stream with platform-independent output.
///
/// Bits come from std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The std distributions are implementation-defined, so uniform,
/// normal and integer draws are derived here:
///  - uniform(): top 53 bits of one engine output, scaled to [0, 1).
///  - normal(): Marsaglia polar method on pairs of uniforms; the second
///    variate of each accepted pair is cached and returned on the next call.
///  - index(n): rejection sampling on 64-bit outputs, no modulo bias.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream for (seed, stream) pairs, e.g. one per bootstrap replicate.
  static Rng substream(std::uint64_t seed, std::uint64_t stream);

  double uniform();
  /// Uniform on the open interval (0, 1).
  double uniform_open();
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n);
  /// Uniform integer in [lo, hi].
  std::size_t between(std::size_t lo, std::size_t hi) { return lo + index(hi - lo + 1); }

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace fdakit
