#include "lerwlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lerwlab {

double MeanAcc::variance() const {
  if (n < 2) return 0;
  double m = mean();
  double v = (sumsq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1);
  return v > 0 ? v : 0;
}

double MeanAcc::stderr_mean() const {
  return n ? std::sqrt(variance() / static_cast<double>(n)) : 0.0;
}

namespace {

// Lower regularized gamma by series (x < a+1).
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 500; ++i) {
    ap += 1;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper regularized gamma by Lentz continued fraction (x >= a+1).
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1 - a;
  double c = 1 / tiny;
  double d = 1 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_q(double a, double x) {
  if (a <= 0 || x < 0) throw std::invalid_argument("gamma_q: bad arguments");
  if (x == 0) return 1;
  if (x < a + 1) return 1 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double chi_square_sf(double stat, int dof) {
  if (dof <= 0) throw std::invalid_argument("chi_square_sf: dof <= 0");
  if (stat <= 0) return 1;
  return gamma_q(0.5 * dof, 0.5 * stat);
}

ChiSquareResult chi_square_two_sample(const std::vector<std::int64_t>& a,
                                      const std::vector<std::int64_t>& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("chi_square_two_sample: size mismatch");
  double na = 0, nb = 0;
  for (auto v : a) na += static_cast<double>(v);
  for (auto v : b) nb += static_cast<double>(v);
  if (na == 0 || nb == 0)
    throw std::invalid_argument("chi_square_two_sample: empty sample");
  double ka = std::sqrt(nb / na), kb = std::sqrt(na / nb);
  double stat = 0;
  int cells = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    double ai = static_cast<double>(a[i]), bi = static_cast<double>(b[i]);
    if (ai + bi == 0) continue;
    double diff = ka * ai - kb * bi;
    stat += diff * diff / (ai + bi);
    ++cells;
  }
  ChiSquareResult r;
  r.statistic = stat;
  r.dof = cells - 1;
  r.p_value = r.dof > 0 ? chi_square_sf(stat, r.dof) : 1.0;
  return r;
}

ChiSquareResult chi_square_goodness(const std::vector<std::int64_t>& counts,
                                    const std::vector<double>& probs) {
  if (counts.size() != probs.size())
    throw std::invalid_argument("chi_square_goodness: size mismatch");
  double n = 0;
  for (auto v : counts) n += static_cast<double>(v);
  double stat = 0;
  for (size_t i = 0; i < counts.size(); ++i) {
    double e = n * probs[i];
    if (e <= 0) throw std::invalid_argument("chi_square_goodness: zero expectation");
    double diff = static_cast<double>(counts[i]) - e;
    stat += diff * diff / e;
  }
  ChiSquareResult r;
  r.statistic = stat;
  r.dof = static_cast<int>(counts.size()) - 1;
  r.p_value = r.dof > 0 ? chi_square_sf(stat, r.dof) : 1.0;
  return r;
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("ks_distance: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  size_t i = 0, j = 0;
  double d = 0;
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("linear_fit: need >= 2 matched points");
  double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double denom = n * sxx - sx * sx;
  if (denom == 0) throw std::invalid_argument("linear_fit: degenerate x");
  LinearFit f;
  f.slope = (n * sxy - sx * sy) / denom;
  f.intercept = (sy - f.slope * sx) / n;
  double ss_res = 0, ss_tot = 0, ymean = sy / n;
  for (size_t i = 0; i < x.size(); ++i) {
    double e = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += e * e;
    double t = y[i] - ymean;
    ss_tot += t * t;
  }
  f.r2 = ss_tot > 0 ? 1 - ss_res / ss_tot : 1;
  if (x.size() > 2) {
    double se2 = ss_res / (n - 2) / (sxx - sx * sx / n);
    f.slope_stderr = se2 > 0 ? std::sqrt(se2) : 0;
  }
  return f;
}

double loglog_inverse_slope(const std::vector<double>& rung_n,
                            const std::vector<std::vector<double>>& rung_obs) {
  if (rung_n.size() != rung_obs.size() || rung_n.size() < 2)
    throw std::invalid_argument("loglog_inverse_slope: bad ladder");
  std::vector<double> xs, ys;
  for (size_t i = 0; i < rung_n.size(); ++i) {
    double m = 0;
    if (rung_obs[i].empty())
      throw std::invalid_argument("loglog_inverse_slope: empty rung");
    for (double v : rung_obs[i]) m += v;
    m /= static_cast<double>(rung_obs[i].size());
    if (m <= 0) throw std::invalid_argument("loglog_inverse_slope: nonpositive mean");
    xs.push_back(std::log(m));
    ys.push_back(std::log(rung_n[i]));
  }
  return linear_fit(xs, ys).slope;
}

BootstrapCI bootstrap_loglog_slope_ci(const std::vector<double>& rung_n,
                                      const std::vector<std::vector<double>>& rung_obs,
                                      int n_boot, double level, RngStream& rng) {
  std::vector<double> slopes;
  slopes.reserve(static_cast<size_t>(n_boot));
  std::vector<std::vector<double>> resampled(rung_obs.size());
  for (int b = 0; b < n_boot; ++b) {
    for (size_t i = 0; i < rung_obs.size(); ++i) {
      const auto& obs = rung_obs[i];
      auto& dst = resampled[i];
      dst.resize(obs.size());
      for (size_t k = 0; k < obs.size(); ++k)
        dst[k] = obs[rng.below(obs.size())];
    }
    slopes.push_back(loglog_inverse_slope(rung_n, resampled));
  }
  std::sort(slopes.begin(), slopes.end());
  BootstrapCI ci;
  double alpha = (1 - level) / 2;
  ci.lo = quantile_sorted(slopes, alpha);
  ci.hi = quantile_sorted(slopes, 1 - alpha);
  return ci;
}

void wilson_interval(std::int64_t successes, std::int64_t trials, double z,
                     double* lo, double* hi) {
  if (trials <= 0) throw std::invalid_argument("wilson_interval: trials <= 0");
  double n = static_cast<double>(trials);
  double p = static_cast<double>(successes) / n;
  double z2 = z * z;
  double denom = 1 + z2 / n;
  double center = (p + z2 / (2 * n)) / denom;
  double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom;
  if (lo) *lo = std::max(0.0, center - half);
  if (hi) *hi = std::min(1.0, center + half);
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile_sorted: empty");
  if (q <= 0) return sorted.front();
  if (q >= 1) return sorted.back();
  double pos = q * static_cast<double>(sorted.size() - 1);
  size_t lo = static_cast<size_t>(pos);
  double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] * (1 - frac) + sorted[lo + 1] * frac;
}

}  // namespace lerwlab
