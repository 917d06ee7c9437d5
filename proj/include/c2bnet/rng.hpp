#pragma once

#include <cstdint>

namespace c2bnet::numkit {

/// Deterministic cross-platform random generator.
///
/// Algorithm (fixed for reproducibility of datasets and training runs):
/// xoshiro256** with its 256-bit state seeded by four successive splitmix64
/// outputs of the 64-bit seed. split(label) derives an independent child
/// generator from (seed, label) alone — it does not consume or depend on the
/// parent's stream position. The same seed yields the same stream on every
/// platform; doubles are built from the top 53 bits so they are
/// bit-reproducible too.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform on [0, 1), 53-bit resolution.
  double next_double();

  /// Uniform on [a, b).
  double uniform(double a, double b);

  /// Standard normal via Box-Muller (two uniform draws per sample; the first
  /// is offset by half an ulp-unit so log(0) cannot occur).
  double normal();

  /// Independent child stream identified by (this generator's seed, label).
  Rng split(std::uint64_t label) const;

  std::uint64_t seed() const { return seed_; }

  static std::uint64_t splitmix64(std::uint64_t& state);

 private:
  std::uint64_t seed_;
  std::uint64_t s_[4];
};

} // namespace c2bnet::numkit
