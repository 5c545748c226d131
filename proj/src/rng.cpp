#include "wwlab/rng.hpp"

#include <cmath>

namespace wwlab {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t splitmix64(std::uint64_t& x) {
  x += kGolden;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

}  // namespace

RngStream RngStream::substream(std::uint64_t tag) const {
  // splitmix64 is a bijection on the counter, so distinct tags cannot
  // collide for a fixed parent stream_id.
  std::uint64_t x = stream_id ^ (tag * kGolden + 0x1ULL);
  return RngStream{seed, splitmix64(x)};
}

RngStream RngStream::substream(std::uint64_t tag_a, std::uint64_t tag_b) const {
  return substream(tag_a).substream(tag_b);
}

Xoshiro256pp::Xoshiro256pp(RngStream stream) {
  std::uint64_t x = stream.seed ^ (stream.stream_id * kGolden + 0xD2B74407B1CE6E93ULL);
  for (auto& word : state_) word = splitmix64(x);
  if (state_[0] == 0 && state_[1] == 0 && state_[2] == 0 && state_[3] == 0) {
    state_[0] = 1;  // all-zero state is the one invalid seed
  }
}

std::uint64_t Xoshiro256pp::next_u64() {
  const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double Xoshiro256pp::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

void Xoshiro256pp::gaussian_pair(double& z0, double& z1) {
  const double u1 = 1.0 - uniform01();  // (0, 1], keeps the log finite
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  z0 = r * std::cos(theta);
  z1 = r * std::sin(theta);
}

}  // namespace wwlab
