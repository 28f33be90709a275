#pragma once

#include <cstdint>
#include <random>

#include "irsdetect/types.hpp"

namespace irsdetect {

/// One splitmix64 output step; used only to spread seed entropy.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Seed for the stream (base_seed, stream_id). Streams with distinct
/// ids are statistically independent; the mapping is pure, so any
/// degree of parallelism reproduces the same draws per stream.
constexpr std::uint64_t derive_stream_seed(std::uint64_t base_seed,
                                           std::uint64_t stream_id) {
  return mix64(mix64(base_seed) ^ mix64(stream_id + 0x632BE59BD9B4E019ull));
}

/// Deterministic random stream. All variate transforms are implemented
/// here rather than through std:: distributions so that output is
/// bit-identical across standard library implementations. A stream must
/// not be shared across concurrent callers; use one substream per task.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  static RngStream substream(std::uint64_t base_seed, std::uint64_t stream_id) {
    return RngStream(derive_stream_seed(base_seed, stream_id));
  }

  /// Uniform on [0,1) with 53-bit resolution.
  double uniform() {
    return double(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; the paired deviate is cached.
  double normal();

  /// Circularly symmetric CN(0,1): real and imaginary parts N(0, 1/2).
  Complex complex_normal();

  /// Gamma(shape, 1) by Marsaglia-Tsang squeeze, boosted for shape < 1.
  double gamma(double shape);

  /// Nakagami-m amplitude with unit second moment (Omega = 1).
  double nakagami_amplitude(double m);

  /// Nakagami-m amplitude times a uniform phase; E|h|^2 = 1.
  Complex nakagami_fading(double m);

 private:
  std::mt19937_64 engine_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace irsdetect
