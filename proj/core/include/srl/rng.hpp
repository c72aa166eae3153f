#pragma once

#include <cstdint>
#include <random>

namespace srl {

// Reproducible random stream.
//
// Engine: std::mt19937_64 (bit-exact across standard libraries).
// Uniform: top 53 bits of one engine draw, scaled by 2^-53, giving [0, 1).
// Gaussian: Marsaglia polar method on uniforms mapped to (-1, 1); the second
// variate of each accepted pair is cached and returned by the next call.
// Signs: the top bit of one raw engine draw (1 -> -1, 0 -> +1).
//
// std::normal_distribution and std::uniform_real_distribution are not used
// because their output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double gaussian();
  int sign();

  // Drops a cached polar-method spare so the next draw starts a fresh pair.
  void discard_spare() { has_spare_ = false; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t z);

// Child seed for (stream, index) under a root seed. Distinct (stream, index)
// pairs give distinct children for all practical purposes; this is the single
// splitting rule used for trials, sweep cells, and per-run substreams.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream,
                          std::uint64_t index = 0);

// Named substreams of a run seed.
namespace stream {
inline constexpr std::uint64_t kNetwork = 1;
inline constexpr std::uint64_t kData = 2;
inline constexpr std::uint64_t kEvaluation = 3;
inline constexpr std::uint64_t kReference = 4;
inline constexpr std::uint64_t kTrial = 5;
inline constexpr std::uint64_t kCell = 6;
inline constexpr std::uint64_t kProbe = 7;
}  // namespace stream

}  // namespace srl
