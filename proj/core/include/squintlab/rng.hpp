#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace squintlab {

/// Deterministic random stream with keyed substreams.
///
/// Substreams are derived from the parent key, not from engine state, so
/// `base.substream(i)` yields the same stream no matter how many draws the
/// parent has made and no matter which thread asks. The uniform and normal
/// transforms are implemented here (rather than with std distributions) so a
/// stream's output is fully specified by the mt19937_64 sequence.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Independent child stream; deterministic function of (parent key, index).
  Rng substream(std::uint64_t index) const;

  std::uint64_t key() const { return key_; }

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform01();
  double uniform(double lo, double hi);

  /// Standard normal via Box-Muller (pairs cached).
  double normal();

  /// Circularly symmetric complex normal CN(0, 1).
  std::complex<double> cnormal();

 private:
  std::uint64_t key_ = 0;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// SplitMix64 finalizer; used to decorrelate seeds and substream keys.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace squintlab
