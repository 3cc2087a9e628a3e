#include "doctest.h"

#include <cmath>

#include "lerwlab/stats.hpp"

using namespace lerwlab;

TEST_CASE("chi-square survival function against frozen reference values") {
  // reference values computed independently with scipy.stats.chi2.sf
  CHECK(chi_square_sf(3.841458820694124, 1) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(chi_square_sf(11.0705, 5) == doctest::Approx(0.0499999554280436).epsilon(1e-9));
  CHECK(chi_square_sf(2.0, 4) == doctest::Approx(0.735758882342885).epsilon(1e-9));
  CHECK(chi_square_sf(30.0, 20) == doctest::Approx(0.0698536606994099).epsilon(1e-9));
  CHECK(chi_square_sf(100.0, 89) == doctest::Approx(0.199817127109273).epsilon(1e-9));
}

TEST_CASE("two-sample chi-square: identical counts give statistic 0") {
  std::vector<std::int64_t> a = {10, 20, 30, 40};
  auto res = chi_square_two_sample(a, a);
  CHECK(res.statistic == doctest::Approx(0.0));
  CHECK(res.p_value == doctest::Approx(1.0));
}

TEST_CASE("two-sample chi-square flags a gross difference") {
  std::vector<std::int64_t> a = {100, 100, 100, 100};
  std::vector<std::int64_t> b = {400, 10, 10, 10};
  auto res = chi_square_two_sample(a, b);
  CHECK(res.p_value < 1e-10);
}

TEST_CASE("KS distance on a frozen example and simple bounds") {
  CHECK(ks_distance({1, 2, 3, 4, 5}, {1.5, 2.5, 3.5, 4.5, 5.5}) ==
        doctest::Approx(0.2));
  CHECK(ks_distance({1, 1, 1}, {2, 2, 2}) == doctest::Approx(1.0));
  std::vector<double> same = {0.3, 0.7, 1.1, 2.2};
  CHECK(ks_distance(same, same) == doctest::Approx(0.0));
}

TEST_CASE("linear fit recovers an exact line") {
  std::vector<double> x = {1, 2, 3, 4, 5};
  std::vector<double> y;
  for (double v : x) y.push_back(2.5 * v - 1.0);
  auto f = linear_fit(x, y);
  CHECK(f.slope == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(f.r2 == doctest::Approx(1.0));
  CHECK(f.slope_stderr == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("loglog inverse slope on synthetic power law") {
  // obs means follow n^{1/2}; the regression of log n on log mean gives 2
  std::vector<double> ns = {16, 64, 256, 1024};
  std::vector<std::vector<double>> obs;
  for (double n : ns) obs.push_back({std::sqrt(n), std::sqrt(n), std::sqrt(n)});
  CHECK(loglog_inverse_slope(ns, obs) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("bootstrap slope CI brackets the point estimate") {
  RngStream rng(5, 5);
  std::vector<double> ns = {16, 64, 256, 1024};
  std::vector<std::vector<double>> obs(ns.size());
  for (size_t i = 0; i < ns.size(); ++i)
    for (int k = 0; k < 60; ++k)
      obs[i].push_back(std::sqrt(ns[i]) * (0.8 + 0.4 * rng.uniform01()));
  double point = loglog_inverse_slope(ns, obs);
  auto ci = bootstrap_loglog_slope_ci(ns, obs, 300, 0.95, rng);
  CHECK(ci.lo <= point);
  CHECK(point <= ci.hi);
  CHECK(ci.hi - ci.lo < 0.5);
}

TEST_CASE("MeanAcc merge equals direct accumulation") {
  MeanAcc a, b, all;
  for (int i = 0; i < 10; ++i) {
    double v = 0.1 * i * i - 1.0;
    (i < 5 ? a : b).add(v);
    all.add(v);
  }
  a.merge(b);
  CHECK(a.mean() == doctest::Approx(all.mean()).epsilon(1e-15));
  CHECK(a.variance() == doctest::Approx(all.variance()).epsilon(1e-15));
}

TEST_CASE("wilson interval sanity") {
  double lo = 0, hi = 0;
  wilson_interval(50, 100, 1.96, &lo, &hi);
  CHECK(lo > 0.39);
  CHECK(hi < 0.61);
  CHECK(lo < 0.5);
  CHECK(hi > 0.5);
  wilson_interval(0, 30, 3.0, &lo, &hi);
  CHECK(lo == doctest::Approx(0.0));
  CHECK(hi < 0.35);
}

TEST_CASE("quantile of a sorted vector") {
  std::vector<double> v = {1, 2, 3, 4, 5};
  CHECK(quantile_sorted(v, 0.0) == 1);
  CHECK(quantile_sorted(v, 1.0) == 5);
  CHECK(quantile_sorted(v, 0.5) == doctest::Approx(3.0));
  CHECK(quantile_sorted(v, 0.25) == doctest::Approx(2.0));
}
