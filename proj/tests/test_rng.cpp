#include <cmath>
#include <vector>

#include "doctest.h"
#include "gpilab/rng.hpp"

using gpilab::rng::Stream;

TEST_CASE("streams are reproducible and slot-separated") {
  Stream a = Stream::keyed(42, 7, 0);
  Stream b = Stream::keyed(42, 7, 0);
  for (int i = 0; i < 64; ++i) CHECK(a.next_u64() == b.next_u64());

  Stream c = Stream::keyed(42, 7, 1);
  Stream d = Stream::keyed(42, 8, 0);
  Stream e = Stream::keyed(43, 7, 0);
  Stream base = Stream::keyed(42, 7, 0);
  const std::uint64_t first = base.next_u64();
  CHECK(c.next_u64() != first);
  CHECK(d.next_u64() != first);
  CHECK(e.next_u64() != first);
}

TEST_CASE("uniform variates stay inside (0,1)") {
  Stream s = Stream::keyed(1, 0, 0);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = s.next_unit();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / 100000 - 0.5) < 0.005);
}

TEST_CASE("normal variates have the right first two moments") {
  Stream s = Stream::keyed(2, 0, 0);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = s.next_normal();
    sum += z;
    sumsq += z * z;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) < 5.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("gamma variates match shape/scale moments") {
  for (double shape : {0.35, 1.0, 2.5, 6.0}) {
    Stream s = Stream::keyed(3, static_cast<std::uint64_t>(shape * 100), 0);
    const int n = 200000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double g = s.next_gamma(shape);
      REQUIRE(g > 0.0);
      sum += g;
      sumsq += g * g;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    // mean = shape, var = shape for unit scale
    CHECK(std::abs(mean - shape) < 6.0 * std::sqrt(shape / n));
    CHECK(std::abs(var - shape) < 0.05 * (1.0 + shape));
  }
}

TEST_CASE("chi-square is gamma(dof/2, 2)") {
  Stream s = Stream::keyed(4, 0, 0);
  const int n = 100000;
  double sum = 0.0;
  const double dof = 3.7;
  for (int i = 0; i < n; ++i) sum += s.next_chisq(dof);
  CHECK(std::abs(sum / n - dof) < 0.05);
}
