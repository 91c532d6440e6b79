#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "stableweb/error.hpp"
#include "stableweb/stats.hpp"

using namespace stableweb;

TEST_CASE("batch means of 1..40 in 20 batches") {
  std::vector<double> v(40);
  std::iota(v.begin(), v.end(), 1.0);
  const std::vector<double> m = batch_means(v, 20);
  REQUIRE(m.size() == 20);
  CHECK(m.front() == 1.5);
  CHECK(m.back() == 39.5);
  // batch means step by 2: sample variance 4 * 20 * 21 / 12 = 140
  const Estimate e = batch_mean(v, 20);
  CHECK(e.value == doctest::Approx(20.5));
  CHECK(e.se == doctest::Approx(std::sqrt(140.0 / 20.0)));
}

TEST_CASE("uneven batches are contiguous blocks") {
  const std::vector<double> v{1, 2, 3, 4, 5};
  const std::vector<double> m = batch_means(v, 2);
  REQUIRE(m.size() == 2);
  CHECK(m[0] == 1.5);  // {1, 2}
  CHECK(m[1] == 4.0);  // {3, 4, 5}
  CHECK_THROWS_AS(batch_means(v, 6), ArgumentError);
  CHECK_THROWS_AS(batch_means(v, 1), ArgumentError);
}

TEST_CASE("constant data has zero standard error") {
  const Estimate e = batch_mean(std::vector<double>(100, 0.25), 20);
  CHECK(e.value == 0.25);
  CHECK(e.se == 0.0);
}

TEST_CASE("least squares") {
  const LinearFit exact = least_squares({0, 1, 2, 3}, {1, 3, 5, 7});
  CHECK(exact.slope == doctest::Approx(2.0));
  CHECK(exact.intercept == doctest::Approx(1.0));
  CHECK(exact.r_squared == doctest::Approx(1.0));
  // sxx = 2, sxy = 1, syy = 2/3
  const LinearFit f = least_squares({0, 1, 2}, {0, 1, 1});
  CHECK(f.slope == doctest::Approx(0.5));
  CHECK(f.intercept == doctest::Approx(1.0 / 6.0));
  CHECK(f.r_squared == doctest::Approx(0.75));
  CHECK_THROWS_AS(least_squares({1, 1}, {0, 1}), ArgumentError);
  CHECK_THROWS_AS(least_squares({1}, {0}), ArgumentError);
}

TEST_CASE("percentile interpolates linearly") {
  const std::vector<double> v{5, 1, 4, 2, 3};
  CHECK(percentile(v, 0.5) == 3.0);
  CHECK(percentile(v, 0.25) == 2.0);
  CHECK(percentile(v, 0.1) == doctest::Approx(1.4));
  CHECK(percentile(v, 1.0) == 5.0);
}

TEST_CASE("Kolmogorov-Smirnov distance") {
  CHECK(ks_distance({1, 2, 3}, {3, 2, 1}) == 0.0);
  CHECK(ks_distance({1, 2}, {5, 6, 7}) == 1.0);
  CHECK(ks_distance({1, 2, 3}, {2, 3, 4}) == doctest::Approx(1.0 / 3.0));
  // ties across samples are handled at the shared value
  CHECK(ks_distance({0, 0, 1, 1}, {0, 1, 1, 1}) == doctest::Approx(0.25));
  CHECK_THROWS_AS(ks_distance({}, {1}), ArgumentError);
}

TEST_CASE("batch bootstrap") {
  // two x points with constant batches: every resample gives the same slope
  const std::vector<std::vector<double>> flat{std::vector<double>(20, 1.0),
                                              std::vector<double>(20, 3.0)};
  auto slope = [](const std::vector<double>& m) -> std::optional<double> { return m[1] - m[0]; };
  const Interval95 c = batch_bootstrap(flat, slope, 50, 7);
  CHECK(c.lo == 2.0);
  CHECK(c.hi == 2.0);
  CHECK(c.sd == 0.0);

  std::vector<std::vector<double>> noisy(2, std::vector<double>(20));
  for (int i = 0; i < 20; ++i) {
    noisy[0][static_cast<std::size_t>(i)] = i % 3;
    noisy[1][static_cast<std::size_t>(i)] = 2.0 + (i % 5);
  }
  const Interval95 a = batch_bootstrap(noisy, slope, 200, 11);
  const Interval95 b = batch_bootstrap(noisy, slope, 200, 11);
  CHECK(a.lo == b.lo);
  CHECK(a.hi == b.hi);
  CHECK(a.lo < a.hi);
  CHECK(a.sd > 0.0);
  // the point estimate sits inside its interval
  const double point = (2.0 + 2.0) - 0.95;  // mean(2 + i%5) - mean(i%3) over i < 20
  CHECK(point >= a.lo);
  CHECK(point <= a.hi);

  auto never = [](const std::vector<double>&) -> std::optional<double> { return std::nullopt; };
  CHECK_THROWS_AS(batch_bootstrap(noisy, never, 10, 1), ExperimentError);
  CHECK_THROWS_AS(batch_bootstrap({}, slope, 10, 1), ArgumentError);
}
