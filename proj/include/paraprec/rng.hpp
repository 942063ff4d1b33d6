#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace paraprec {

// SplitMix64 used as a counter-based generator: the k-th draw is
// mix(seed + k * golden), so streams are reproducible on every platform and
// independent of the standard library implementation.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next();
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  // Uniform integer in [0, bound), bound > 0, by rejection (no modulo bias).
  std::uint64_t below(std::uint64_t bound);
  // +1 or -1 with probability 1/2.
  int sign();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix_mix(std::uint64_t z);

// Child seed for a named component; all randomness in an experiment flows
// from one root seed through this function.
std::uint64_t derive_seed(std::uint64_t root, std::string_view component);

// First k entries of a uniformly random permutation of {0..s-1}
// (partial Fisher-Yates, i.e. sampling without replacement).
std::vector<std::uint64_t> sample_without_replacement(std::uint64_t s, std::uint64_t k,
                                                      SplitMix64& rng);

}  // namespace paraprec
