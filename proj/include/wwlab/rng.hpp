#pragma once

#include <array>
#include <cstdint>

namespace wwlab {

/// Identifies one reproducible random stream. The pair (seed, stream_id)
/// fully determines the sample sequence on every platform; callers that need
/// independent streams (Monte Carlo ensembles, restarts) derive them up front
/// with substream() instead of sharing one generator.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  /// Child stream for ensemble member / restart `tag`. Distinct tags give
  /// statistically independent streams; the mapping is a fixed bijective mix,
  /// so it is stable across runs.
  [[nodiscard]] RngStream substream(std::uint64_t tag) const;
  [[nodiscard]] RngStream substream(std::uint64_t tag_a, std::uint64_t tag_b) const;
};

/// xoshiro256++ with splitmix64 seeding.
///
/// The generator is fixed by the project rather than taken from <random>
/// because std::normal_distribution and friends are implementation-defined;
/// this one produces bit-identical sequences everywhere. Gaussians come from
/// an explicit Box-Muller transform for the same reason.
class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(RngStream stream);

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform01();

  /// One pair of independent standard normals.
  void gaussian_pair(double& z0, double& z1);

 private:
  std::array<std::uint64_t, 4> state_{};
};

}  // namespace wwlab
