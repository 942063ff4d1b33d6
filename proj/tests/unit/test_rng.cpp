#include <set>

#include "doctest.h"
#include "paraprec/rng.hpp"

using namespace paraprec;

TEST_SUITE("rng") {
  TEST_CASE("same seed gives the same stream") {
    SplitMix64 a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
  }

  TEST_CASE("the k-th draw depends only on seed and k") {
    SplitMix64 a(7);
    for (int i = 0; i < 5; ++i) a.next();
    CHECK(a.next() == splitmix_mix(7 + 6 * 0x9E3779B97F4A7C15ULL));
  }

  TEST_CASE("uniform and below stay in range") {
    SplitMix64 r(1);
    for (int i = 0; i < 1000; ++i) {
      const double u = r.uniform();
      CHECK(u >= 0.0);
      CHECK(u < 1.0);
      CHECK(r.below(7) < 7u);
      const int s = r.sign();
      CHECK((s == 1 || s == -1));
    }
  }

  TEST_CASE("component seeds differ") {
    CHECK(derive_seed(0, "sketch") != derive_seed(0, "grid"));
    CHECK(derive_seed(0, "sketch") != derive_seed(1, "sketch"));
    CHECK(derive_seed(3, "x") == derive_seed(3, "x"));
  }

  TEST_CASE("sampling without replacement") {
    SplitMix64 r(9);
    const auto s = sample_without_replacement(1024, 128, r);
    CHECK(s.size() == 128);
    std::set<std::uint64_t> u(s.begin(), s.end());
    CHECK(u.size() == 128);
    CHECK(*u.rbegin() < 1024u);
    SplitMix64 r2(9);
    CHECK(sample_without_replacement(1024, 128, r2) == s);
    SplitMix64 r3(2);
    const auto all = sample_without_replacement(10, 10, r3);
    CHECK(std::set<std::uint64_t>(all.begin(), all.end()).size() == 10);
  }
}
