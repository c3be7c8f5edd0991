#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "cardmix/rng.hpp"

using namespace cardmix;

TEST_CASE("same seed reproduces the stream") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("below stays in range and covers it") {
  Rng rng(1);
  std::set<uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const uint64_t v = rng.below(7);
    CHECK(v < 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);
}

TEST_CASE("uniform_int is inclusive on both ends") {
  Rng rng(3);
  bool lo = false, hi = false;
  for (int i = 0; i < 5000; ++i) {
    const int64_t v = rng.uniform_int(-2, 2);
    CHECK(v >= -2);
    CHECK(v <= 2);
    lo = lo || v == -2;
    hi = hi || v == 2;
  }
  CHECK(lo);
  CHECK(hi);
}

TEST_CASE("forks are independent of draw position") {
  Rng a(9);
  a.next_u64();
  a.next_u64();
  Rng b(9);
  CHECK(a.fork("x").next_u64() == b.fork("x").next_u64());
  CHECK(a.fork("x").next_u64() != b.fork("y").next_u64());
}

TEST_CASE("sample_indices returns distinct sorted indices") {
  Rng rng(5);
  const auto s = rng.sample_indices(50, 10);
  CHECK(s.size() == 10);
  CHECK(std::is_sorted(s.begin(), s.end()));
  CHECK(std::adjacent_find(s.begin(), s.end()) == s.end());
  for (size_t i : s) CHECK(i < 50);
}

TEST_CASE("weighted_choice respects zero weights") {
  Rng rng(7);
  const std::vector<double> w = {0.0, 1.0, 0.0};
  for (int i = 0; i < 100; ++i) CHECK(rng.weighted_choice(w) == 1);
}
