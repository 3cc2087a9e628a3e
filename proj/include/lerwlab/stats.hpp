// Small statistics toolbox: accumulators, chi-square and KS tests, linear
// regression, bootstrap confidence intervals.
#pragma once

#include <cstdint>
#include <vector>

#include "lerwlab/rng.hpp"

namespace lerwlab {

// Plain-sum accumulator; merging is associative so block-ordered parallel
// reduction stays deterministic.
struct MeanAcc {
  double sum = 0, sumsq = 0;
  std::int64_t n = 0;

  void add(double x) {
    sum += x;
    sumsq += x * x;
    ++n;
  }
  void merge(const MeanAcc& o) {
    sum += o.sum;
    sumsq += o.sumsq;
    n += o.n;
  }
  double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
  double variance() const;  // unbiased sample variance
  double stderr_mean() const;
};

// Regularized upper incomplete gamma Q(a, x); classic series/continued
// fraction evaluation, good to ~1e-12 for the a used here.
double gamma_q(double a, double x);

// Survival function of the chi-square distribution with k dof.
double chi_square_sf(double stat, int dof);

struct ChiSquareResult {
  double statistic = 0;
  int dof = 0;
  double p_value = 1;
};

// Two-sample chi-square homogeneity test over matched count vectors.
// Cells where both samples are empty are dropped.
ChiSquareResult chi_square_two_sample(const std::vector<std::int64_t>& a,
                                      const std::vector<std::int64_t>& b);

// One-sample chi-square against given probabilities.
ChiSquareResult chi_square_goodness(const std::vector<std::int64_t>& counts,
                                    const std::vector<double>& probs);

// Two-sample Kolmogorov-Smirnov distance (inputs need not be sorted).
double ks_distance(std::vector<double> a, std::vector<double> b);

struct LinearFit {
  double slope = 0, intercept = 0;
  double slope_stderr = 0;
  double r2 = 0;
};

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

// Slope of the regression of log(rung_n) on log(mean of rung observations);
// this is the growth-exponent estimator when obs are displacement norms.
double loglog_inverse_slope(const std::vector<double>& rung_n,
                            const std::vector<std::vector<double>>& rung_obs);

// Percentile bootstrap CI for loglog_inverse_slope: resamples each rung's
// observations with replacement.
struct BootstrapCI {
  double lo = 0, hi = 0;
};
BootstrapCI bootstrap_loglog_slope_ci(const std::vector<double>& rung_n,
                                      const std::vector<std::vector<double>>& rung_obs,
                                      int n_boot, double level, RngStream& rng);

// Wilson score interval for a binomial proportion.
void wilson_interval(std::int64_t successes, std::int64_t trials, double z,
                     double* lo, double* hi);

double quantile_sorted(const std::vector<double>& sorted, double q);

}  // namespace lerwlab
