#include "paraprec/rng.hpp"

#include <numeric>
#include <unordered_map>

#include "paraprec/error.hpp"

namespace paraprec {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t splitmix_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t SplitMix64::next() {
  ++counter_;
  return splitmix_mix(seed_ + counter_ * kGolden);
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::uint64_t SplitMix64::below(std::uint64_t bound) {
  if (bound == 0) throw InvalidArgument("SplitMix64::below needs a positive bound");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = next();
  } while (x >= limit);
  return x % bound;
}

int SplitMix64::sign() { return (next() >> 63) ? -1 : 1; }

std::uint64_t derive_seed(std::uint64_t root, std::string_view component) {
  std::uint64_t h = 0xCBF29CE484222325ULL;  // FNV-1a
  for (unsigned char c : component) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return splitmix_mix(splitmix_mix(root) ^ h);
}

std::vector<std::uint64_t> sample_without_replacement(std::uint64_t s, std::uint64_t k,
                                                      SplitMix64& rng) {
  if (k > s) throw InvalidSize("cannot sample " + std::to_string(k) + " of " + std::to_string(s));
  // Sparse Fisher-Yates: only touched slots are stored, so s may be large.
  std::unordered_map<std::uint64_t, std::uint64_t> swapped;
  auto at = [&](std::uint64_t i) {
    auto it = swapped.find(i);
    return it == swapped.end() ? i : it->second;
  };
  std::vector<std::uint64_t> out(k);
  for (std::uint64_t i = 0; i < k; ++i) {
    const std::uint64_t j = i + rng.below(s - i);
    const std::uint64_t vi = at(i), vj = at(j);
    out[i] = vj;
    swapped[j] = vi;
    swapped[i] = vj;
  }
  return out;
}

}  // namespace paraprec
