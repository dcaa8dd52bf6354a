#include "doctest.h"
#include "trend/common.hpp"

#include <algorithm>
#include <cmath>
#include <set>

using namespace trend;

TEST_CASE("rng: same seed gives same stream") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.bits() == b.bits());
  }
}

TEST_CASE("rng: uniform stays in [0,1)") {
  Rng r(7);
  for (int i = 0; i < 10000; ++i) {
    double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("rng: bernoulli rate roughly matches p") {
  Rng r(123);
  int hits = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i)
    if (r.bernoulli(0.3)) ++hits;
  CHECK(std::abs(hits / double(n) - 0.3) < 0.02);
}

TEST_CASE("rng: integer respects bound and covers range") {
  Rng r(9);
  std::set<uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    uint64_t v = r.integer(5);
    CHECK(v < 5);
    seen.insert(v);
  }
  CHECK(seen.size() == 5);
}

TEST_CASE("rng: fork is deterministic and does not consume the parent") {
  Rng a(42);
  uint64_t before = Rng(42).bits();
  Rng c1 = a.fork(1);
  Rng c2 = a.fork(1);
  Rng c3 = a.fork(2);
  CHECK(a.bits() == before);
  CHECK(c1.bits() == c2.bits());
  CHECK(c1.bits() != c3.bits());
}

TEST_CASE("rng: shuffle is a permutation") {
  Rng r(5);
  std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  auto orig = v;
  r.shuffle(v);
  auto sorted = v;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == orig);
}

TEST_CASE("rng: normal has sane moments") {
  Rng r(11);
  double sum = 0, sumsq = 0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    double x = r.normal();
    sum += x;
    sumsq += x * x;
  }
  CHECK(std::abs(sum / n) < 0.02);
  CHECK(std::abs(sumsq / n - 1.0) < 0.03);
}

TEST_CASE("fnv1a64 known vectors") {
  // Reference values for the 64-bit FNV-1a parameters.
  CHECK(fnv1a64("", 0) == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a", 1) == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar", 6) == 0x85944171f73967e8ULL);
}

TEST_CASE("hex64 pads to 16 digits") {
  CHECK(hex64(0) == "0000000000000000");
  CHECK(hex64(0xdeadbeefULL) == "00000000deadbeef");
}

TEST_CASE("string helpers") {
  CHECK(lower_ascii("AbC-09") == "abc-09");
  CHECK(starts_with("hello", "he"));
  CHECK(!starts_with("h", "he"));
  CHECK(ends_with("hello", "lo"));
  CHECK(!ends_with("o", "lo"));
  CHECK(trim("  x y \t\n") == "x y");
  CHECK(trim(" \t ") == "");
  auto lines = split_lines("a\r\nb\nc");
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "a");
  CHECK(lines[1] == "b");
  CHECK(lines[2] == "c");
}

TEST_CASE("read_file on a missing path throws InputError") {
  CHECK_THROWS_AS(read_file("/nonexistent/definitely/missing"), InputError);
}
