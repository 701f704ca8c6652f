#include <doctest.h>

#include <cmath>
#include <random>

#include "bpmeval/stats.hpp"
#include "support/oracles.hpp"

using namespace bpmeval;

TEST_SUITE_BEGIN("stats");

TEST_CASE("normal quantile hits reference values") {
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::fabs(normal_quantile(0.975) - 1.9599639845400545) < 1.2e-8);
  CHECK(std::fabs(normal_quantile(0.995) - 2.5758293035489004) < 1.2e-8);
  CHECK(normal_quantile(0.025) == doctest::Approx(-normal_quantile(0.975)).epsilon(1e-10));
  CHECK_THROWS_AS(normal_quantile(0.0), InvalidCounts);
}

TEST_CASE("wilson interval worked examples") {
  const Interval all = wilson_interval(179, 179, 0.95);
  CHECK(all.high == 1.0);  // exactly, by the p-hat = 1 closed form
  CHECK(all.point == 1.0);
  CHECK(all.low < 1.0);
  CHECK(all.low == doctest::Approx(0.97903).epsilon(1e-3));

  const Interval mid = wilson_interval(79, 179, 0.95);
  CHECK(mid.low == doctest::Approx(0.37059).epsilon(1e-4));
  CHECK(mid.high == doctest::Approx(0.51456).epsilon(1e-4));

  const Interval none = wilson_interval(0, 179, 0.95);
  CHECK(none.low == 0.0);
  CHECK(none.high == doctest::Approx(0.021009).epsilon(1e-3));

  CHECK_THROWS_AS(wilson_interval(1, 0), InvalidCounts);
  CHECK_THROWS_AS(wilson_interval(5, 4), InvalidCounts);
  CHECK_THROWS_AS(wilson_interval(-1, 4), InvalidCounts);
}

TEST_CASE("wilson interval properties") {
  const long n = 137;
  double prev_low = -1.0, prev_high = -1.0;
  for (long k = 0; k <= n; ++k) {
    const Interval ci = wilson_interval(k, n, 0.95);
    CHECK(ci.low >= 0.0);
    CHECK(ci.high <= 1.0);
    CHECK(ci.low <= ci.point);
    CHECK(ci.point <= ci.high);
    CHECK(ci.low >= prev_low);   // monotone in successes
    CHECK(ci.high >= prev_high);
    prev_low = ci.low;
    prev_high = ci.high;

    const Interval mirrored = wilson_interval(n - k, n, 0.95);
    CHECK(ci.low == doctest::Approx(1.0 - mirrored.high).epsilon(1e-12));
    CHECK(ci.high == doctest::Approx(1.0 - mirrored.low).epsilon(1e-12));
  }
}

TEST_CASE("bootstrap on constant data is degenerate") {
  const Interval ci = bootstrap_ci({5.0, 5.0, 5.0}, 1000, 0.95, 99);
  CHECK(ci.point == 5.0);
  CHECK(ci.low == 5.0);
  CHECK(ci.high == 5.0);
  CHECK(ci.point_contained);
}

TEST_CASE("bootstrap is deterministic per seed") {
  const std::vector<double> values{1.0, 2.5, 7.0, 4.0, 3.0};
  const Interval a = bootstrap_ci(values, 2000, 0.95, 4242);
  const Interval b = bootstrap_ci(values, 2000, 0.95, 4242);
  CHECK(a.low == b.low);
  CHECK(a.high == b.high);
  CHECK(a.point == b.point);
}

TEST_CASE("bootstrap endpoints follow the exact n=2 resample distribution") {
  // For values {0, 10} each resample mean is 0, 5, or 10 with probabilities
  // 1/4, 1/2, 1/4. Both 0 and 10 lie far outside the 2.5% tails, so the 95%
  // interval must be [0, 10] and bracket 5.
  const Interval ci = bootstrap_ci({0.0, 10.0}, 10000, 0.95, 7);
  CHECK(ci.point == 5.0);
  CHECK(ci.low == 0.0);
  CHECK(ci.high == 10.0);

  // Repeating the data 10x concentrates the mean; the interval must narrow.
  std::vector<double> repeated;
  for (int i = 0; i < 10; ++i) {
    repeated.push_back(0.0);
    repeated.push_back(10.0);
  }
  const Interval tight = bootstrap_ci(repeated, 10000, 0.95, 7);
  CHECK(tight.low > 0.0);
  CHECK(tight.high < 10.0);
  CHECK(tight.low <= 5.0);
  CHECK(tight.high >= 5.0);
}

TEST_CASE("narrower confidence nests inside wider confidence") {
  const std::vector<double> values{0.0, 1.0, 3.0, 9.0, 2.0, 5.0};
  const Interval wide = bootstrap_ci(values, 5000, 0.95, 11);
  const Interval narrow = bootstrap_ci(values, 5000, 0.80, 11);
  CHECK(narrow.low >= wide.low);
  CHECK(narrow.high <= wide.high);
}

TEST_CASE("bootstrap input validation") {
  CHECK_THROWS_AS(bootstrap_ci({}, 100, 0.95, 1), EmptyInput);
  CHECK_THROWS_AS(bootstrap_ci({1.0}, 0, 0.95, 1), EmptyInput);
}

TEST_CASE("friedman on perfectly concordant blocks") {
  const FriedmanResult r = friedman_test({{1.0, 2.0, 3.0}, {10.0, 20.0, 30.0}});
  CHECK(r.chi2 == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(r.w == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.df == 2);
  CHECK(r.n_blocks == 2);
  CHECK(r.k_treatments == 3);
}

TEST_CASE("friedman all-tied convention") {
  const FriedmanResult r = friedman_test({{7.0, 7.0, 7.0}, {3.0, 3.0, 3.0}});
  CHECK(r.chi2 == 0.0);
  CHECK(r.w == 0.0);
  CHECK(r.p_value == 1.0);
}

TEST_CASE("friedman shape validation") {
  CHECK_THROWS_AS(friedman_test({{1.0, 2.0}}), ShapeError);
  CHECK_THROWS_AS(friedman_test({{1.0}, {2.0}}), ShapeError);
  CHECK_THROWS_AS(friedman_test({{1.0, 2.0}, {1.0, 2.0, 3.0}}), ShapeError);
}

TEST_CASE("kendalls w identity holds on every output") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + (int)(rng() % 8), k = 2 + (int)(rng() % 6);
    std::vector<std::vector<double>> m(n, std::vector<double>(k));
    for (auto& row : m)
      for (auto& v : row) v = (double)(rng() % 5);
    const FriedmanResult r = friedman_test(m);
    CHECK(r.w == kendalls_w(r.chi2, r.n_blocks, r.k_treatments));
    CHECK(r.w >= 0.0);
    CHECK(r.w <= 1.0 + 1e-12);
  }
}

TEST_CASE("friedman is invariant under monotone per-block transforms") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 3 + (int)(rng() % 5), k = 3 + (int)(rng() % 4);
    std::vector<std::vector<double>> m(n, std::vector<double>(k));
    for (auto& row : m)
      for (auto& v : row) v = (double)(rng() % 6) - 2.0;

    std::vector<std::vector<double>> transformed = m;
    for (auto& row : transformed) {
      const double scale = 0.5 + (double)(rng() % 10);
      const double shift = (double)(rng() % 100) - 50.0;
      for (auto& v : row) v = scale * (v * v * v) + shift;  // x^3 is strictly increasing
    }
    const FriedmanResult a = friedman_test(m);
    const FriedmanResult b = friedman_test(transformed);
    CHECK(a.chi2 == doctest::Approx(b.chi2).epsilon(1e-12));
    CHECK(a.w == doctest::Approx(b.w).epsilon(1e-12));
  }
}

TEST_CASE("chi-square survival function") {
  CHECK(chi_square_sf(0.0, 1) == 1.0);
  CHECK(chi_square_sf(0.0, 13) == 1.0);
  CHECK(chi_square_sf(2.0 * std::log(2.0), 2) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(chi_square_sf(3.841, 1) == doctest::Approx(0.0500).epsilon(1e-3));
}

TEST_CASE("chi-square sf matches the quadrature oracle") {
  for (const auto& [x, df] : std::vector<std::pair<double, int>>{
           {3.841, 1}, {0.5, 1}, {1.0, 2}, {5.0, 3}, {10.0, 7}, {25.0, 13}, {2.3, 4}}) {
    CHECK(chi_square_sf(x, df) ==
          doctest::Approx(oracles::chi_square_sf_quadrature(x, df)).epsilon(1e-8));
  }
}

TEST_CASE("chi-square sf is monotone decreasing in x") {
  double prev = 1.0;
  for (double x = 0.0; x < 30.0; x += 0.5) {
    const double v = chi_square_sf(x, 5);
    CHECK(v <= prev + 1e-15);
    prev = v;
  }
}

TEST_SUITE_END();
