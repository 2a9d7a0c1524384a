#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "volcp/rng.hpp"

using namespace volcp;

TEST_CASE("normal quantile matches reference values") {
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-10));
  CHECK(normal_quantile(0.95) == doctest::Approx(1.6448536269514722).epsilon(1e-10));
  CHECK(normal_quantile(0.025) == doctest::Approx(-1.959963984540054).epsilon(1e-10));
  CHECK(normal_quantile(0.84134474606854293) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(normal_quantile(1e-10) == doctest::Approx(-6.361340902404056).epsilon(1e-8));
}

TEST_CASE("normal quantile and cdf are inverse") {
  for (double p = 0.001; p < 0.9995; p += 0.0007) {
    CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-11));
  }
}

TEST_CASE("normal quantile rejects p outside (0,1)") {
  CHECK_THROWS(normal_quantile(0.0));
  CHECK_THROWS(normal_quantile(1.0));
  CHECK_THROWS(normal_quantile(-0.1));
}

TEST_CASE("generator is deterministic and seed-sensitive") {
  Xoshiro256pp a(42), b(42), c(43);
  bool all_equal = true;
  bool any_diff_seed = false;
  for (int i = 0; i < 1000; ++i) {
    const auto va = a.next_u64();
    if (va != b.next_u64()) all_equal = false;
    if (va != c.next_u64()) any_diff_seed = true;
  }
  CHECK(all_equal);
  CHECK(any_diff_seed);
}

TEST_CASE("derived stream seeds are distinct") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t r = 0; r < 10000; ++r) seen.insert(derive_seed(99, r));
  CHECK(seen.size() == 10000);
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}

TEST_CASE("uniform draws stay strictly inside (0,1)") {
  Xoshiro256pp rng(7);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform01();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("gaussian draws have standard moments") {
  Xoshiro256pp rng(2024);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.gaussian();
    sum += g;
    sum2 += g * g;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::fabs(mean) < 5.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::fabs(var - 1.0) < 5.0 * std::sqrt(2.0 / n));
}
