#include "lerwlab/twosided.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lerwlab/stats.hpp"

namespace lerwlab {

bool two_sided_accepts(const Path& s1, const Path& s2) {
  if (s1.pts.empty() || s2.pts.empty())
    throw std::invalid_argument("two_sided_accepts: empty walk");
  // the erasure of s1 must avoid the range of s2 from index 1 on; since
  // LE(s2) is contained in that range, the two erasures then meet only at 0
  PointSet range2;
  for (size_t i = 1; i < s2.pts.size(); ++i) range2.insert(s2.pts[i]);
  LoopErasedPath le1 = loop_erase(s1);
  for (size_t i = 1; i < le1.path.pts.size(); ++i)
    if (range2.contains(le1.path.pts[i])) return false;
  return true;
}

TwoSidedPath two_sided_sample_highdim(int d, std::int64_t side_len,
                                      std::int64_t horizon, RngStream& rng,
                                      AcceptanceStats* stats) {
  if (d < 5 || d > kMaxDim)
    throw std::invalid_argument("two_sided_sample_highdim: requires 5 <= d <= 8");
  if (side_len < 1) throw std::invalid_argument("two_sided_sample_highdim: side_len < 1");
  if (horizon < side_len)
    throw std::invalid_argument("two_sided_sample_highdim: horizon < side_len");

  while (true) {
    if (stats) ++stats->attempts;
    Path s1 = srw_sample(d, horizon, rng);
    Path s2 = srw_sample(d, horizon, rng);
    if (!two_sided_accepts(s1, s2)) continue;
    LoopErasedPath le1 = loop_erase(s1);
    LoopErasedPath le2 = loop_erase(s2);
    if (static_cast<std::int64_t>(le1.path.pts.size()) < side_len + 1 ||
        static_cast<std::int64_t>(le2.path.pts.size()) < side_len + 1)
      continue;  // erasure too short: also a rejection
    if (stats) ++stats->accepted;

    if (stats) {
      // extend both walks to 3x their joint radius and re-test: an upper
      // bound on how often the finite-horizon acceptance was premature
      double rad = 1;
      for (const auto& p : s1.pts) rad = std::max(rad, euclidean_norm(p));
      for (const auto& p : s2.pts) rad = std::max(rad, euclidean_norm(p));
      double target2 = 9.0 * rad * rad;
      Path e1 = s1, e2 = s2;
      for (Path* w : {&e1, &e2}) {
        Point x = w->pts.back();
        while (static_cast<double>(norm2(x)) <= target2) {
          x = step(x, rng.direction(2 * d));
          w->pts.push_back(x);
        }
      }
      if (!two_sided_accepts(e1, e2)) ++stats->extension_violations;
    }

    TwoSidedPath out;
    LoopEraser tmp1(d), tmp2(d);
    for (const auto& p : s1.pts) tmp1.feed(p);
    for (const auto& p : s2.pts) tmp2.feed(p);
    out.forward = tmp1.take_prefix(side_len + 1);
    out.backward = tmp2.take_prefix(side_len + 1);
    // sides meet only at the origin
    PointSet fwd;
    for (size_t i = 1; i < out.forward.path.pts.size(); ++i)
      fwd.insert(out.forward.path.pts[i]);
    for (size_t i = 1; i < out.backward.path.pts.size(); ++i)
      if (fwd.contains(out.backward.path.pts[i]))
        throw std::runtime_error("two_sided_sample_highdim: sides intersect");
    return out;
  }
}

namespace {

struct EscapeCounts {
  std::int64_t excl = 0;  // walks avoiding the [1,n] window
  std::int64_t incl = 0;  // walks also avoiding the origin
  void merge(const EscapeCounts& o) {
    excl += o.excl;
    incl += o.incl;
  }
};

}  // namespace

ScaledEscape scaled_escape_estimate(const LoopErasedPath& eta, std::int64_t n,
                                    std::int64_t w_trials,
                                    EscapeScalingVariant variant,
                                    const RngStream& rng, const McOptions& opt) {
  if (n < 2) throw std::invalid_argument("scaled_escape_estimate: n must be >= 2");
  if (w_trials < 1) throw std::invalid_argument("scaled_escape_estimate: trials < 1");
  const int d = eta.path.dim;
  const auto& pts = eta.path.pts;
  int threads = opt.threads > 0 ? opt.threads : default_thread_count();
  double scale = std::cbrt(std::log(static_cast<double>(n)));

  ScaledEscape out;
  out.trials = w_trials;

  if (variant == EscapeScalingVariant::kWalkTruncated) {
    // n-step walk against every sampled point of eta (finite stand-in for
    // the infinite path; the sampled length is part of the provenance)
    PointSet full;
    for (const auto& p : pts) full.insert(p);
    std::int64_t max_n2 = full.max_norm2();
    std::int64_t ok = parallel_block_reduce<std::int64_t>(
        static_cast<std::uint64_t>(w_trials), threads, opt.block, std::int64_t{0},
        [&](std::uint64_t lo, std::uint64_t hi, std::uint64_t) {
          std::int64_t cnt = 0;
          for (std::uint64_t i = lo; i < hi; ++i) {
            RngStream r = rng.substream(i);
            Point x = origin();
            std::int64_t n2 = 0;
            bool good = true;
            for (std::int64_t t = 0; t < n && good; ++t) {
              int dir = r.direction(2 * d);
              int axis = dir >> 1;
              std::int64_t delta = (dir & 1) ? -1 : 1;
              n2 += 2 * x[axis] * delta + 1;
              x[axis] += delta;
              if (n2 <= max_n2 && full.contains(x)) good = false;
            }
            if (good) ++cnt;
          }
          return cnt;
        },
        [](std::int64_t a, std::int64_t b) { return a + b; });
    out.unscaled = static_cast<double>(ok) / static_cast<double>(w_trials);
    out.lower = out.upper = out.unscaled;
    out.value = scale * out.unscaled;
    return out;
  }

  // kPathTruncated: kill-radius walk against eta[0,n]
  if (static_cast<std::int64_t>(pts.size()) < n + 1)
    throw std::invalid_argument("scaled_escape_estimate: path shorter than n");
  PointSet prefix;
  for (std::int64_t i = 0; i <= n; ++i) prefix.insert(pts[static_cast<size_t>(i)]);
  double R = 10.0 * std::max(prefix.radius(), 1.0);
  double R2 = R * R;
  std::int64_t max_n2 = prefix.max_norm2();
  std::int64_t ok = parallel_block_reduce<std::int64_t>(
      static_cast<std::uint64_t>(w_trials), threads, opt.block, std::int64_t{0},
      [&](std::uint64_t lo, std::uint64_t hi, std::uint64_t) {
        std::int64_t cnt = 0;
        for (std::uint64_t i = lo; i < hi; ++i) {
          RngStream r = rng.substream(i);
          Point x = origin();
          std::int64_t n2 = 0;
          bool good = true;
          while (true) {
            int dir = r.direction(2 * d);
            int axis = dir >> 1;
            std::int64_t delta = (dir & 1) ? -1 : 1;
            n2 += 2 * x[axis] * delta + 1;
            x[axis] += delta;
            if (n2 <= max_n2 && prefix.contains(x)) {
              good = false;
              break;
            }
            if (static_cast<double>(n2) > R2) break;
          }
          if (good) ++cnt;
        }
        return cnt;
      },
      [](std::int64_t a, std::int64_t b) { return a + b; });
  out.unscaled = static_cast<double>(ok) / static_cast<double>(w_trials);
  out.upper = out.unscaled;
  double shrink = 1.0 - truncation_bracket_coeff(d) *
                            static_cast<double>(prefix.size()) / std::pow(R, d - 2);
  out.lower = std::clamp(out.upper * std::max(shrink, 0.0), 0.0, 1.0);
  out.value = scale * 0.5 * (out.lower + out.upper);
  return out;
}

ScaledEscapePair two_sided_scaled_escape(const LoopErasedPath& forward_side,
                                         std::int64_t n, std::int64_t w_trials,
                                         const RngStream& rng,
                                         const McOptions& opt) {
  if (n < 2) throw std::invalid_argument("two_sided_scaled_escape: n must be >= 2");
  const auto& pts = forward_side.path.pts;
  if (static_cast<std::int64_t>(pts.size()) < n + 1)
    throw std::invalid_argument("two_sided_scaled_escape: side shorter than n");
  const int d = forward_side.path.dim;
  int threads = opt.threads > 0 ? opt.threads : default_thread_count();

  PointSet window;  // pts[1..n]; the origin is tracked separately
  for (std::int64_t i = 1; i <= n; ++i) window.insert(pts[static_cast<size_t>(i)]);
  double R = 10.0 * std::max(std::sqrt(static_cast<double>(window.max_norm2())), 1.0);
  double R2 = R * R;
  std::int64_t max_n2 = std::max<std::int64_t>(window.max_norm2(), 0);

  EscapeCounts counts = parallel_block_reduce<EscapeCounts>(
      static_cast<std::uint64_t>(w_trials), threads, opt.block, EscapeCounts{},
      [&](std::uint64_t lo, std::uint64_t hi, std::uint64_t) {
        EscapeCounts local;
        for (std::uint64_t i = lo; i < hi; ++i) {
          RngStream r = rng.substream(i);
          Point x = origin();
          std::int64_t n2 = 0;
          bool avoided_window = true, avoided_origin = true;
          while (true) {
            int dir = r.direction(2 * d);
            int axis = dir >> 1;
            std::int64_t delta = (dir & 1) ? -1 : 1;
            n2 += 2 * x[axis] * delta + 1;
            x[axis] += delta;
            if (n2 == 0) avoided_origin = false;  // revisit of the root
            if (n2 <= max_n2 && window.contains(x)) {
              avoided_window = false;
              break;
            }
            if (static_cast<double>(n2) > R2) break;
          }
          if (avoided_window) {
            ++local.excl;
            if (avoided_origin) ++local.incl;
          }
        }
        return local;
      },
      [](EscapeCounts a, const EscapeCounts& b) {
        a.merge(b);
        return a;
      });

  double scale = std::cbrt(std::log(static_cast<double>(n)));
  auto finish = [&](std::int64_t ok, std::int64_t set_size) {
    ScaledEscape e;
    e.trials = w_trials;
    e.unscaled = static_cast<double>(ok) / static_cast<double>(w_trials);
    e.upper = e.unscaled;
    double shrink = 1.0 - truncation_bracket_coeff(d) *
                              static_cast<double>(set_size) / std::pow(R, d - 2);
    e.lower = std::clamp(e.upper * std::max(shrink, 0.0), 0.0, 1.0);
    e.value = scale * 0.5 * (e.lower + e.upper);
    return e;
  };
  ScaledEscapePair pair;
  pair.excl_origin = finish(counts.excl, n);
  pair.incl_origin = finish(counts.incl, n + 1);
  return pair;
}

WeightedSample d4_weighted_two_sided(std::int64_t side_len,
                                     std::int64_t n_weight,
                                     std::int64_t w_trials, RngStream& rng,
                                     const McOptions& opt) {
  if (side_len < n_weight)
    throw std::invalid_argument("d4_weighted_two_sided: side_len < n_weight");
  WeightedSample s;
  s.path = lerw_sample(4, side_len, rng);
  RngStream wrng = rng.substream(hash_stream_name("d4-weight"));
  s.weight = scaled_escape_estimate(s.path, n_weight, w_trials,
                                    EscapeScalingVariant::kPathTruncated, wrng, opt)
                 .value;
  return s;
}

double effective_sample_size(const std::vector<double>& weights) {
  double s = 0, s2 = 0;
  for (double w : weights) {
    if (w < 0) throw std::invalid_argument("effective_sample_size: negative weight");
    s += w;
    s2 += w * w;
  }
  return s2 > 0 ? s * s / s2 : 0.0;
}

namespace {

// Cell index for the 2-step increment pattern at offset k: first and second
// step directions, the immediate reversal being impossible on a self-avoiding
// path.
int two_step_cell(const Path& p, size_t k, int d) {
  auto dir_of = [&](const Point& delta) {
    for (int dir = 0; dir < 2 * d; ++dir)
      if (step(origin(), dir) == delta) return dir;
    throw std::runtime_error("two_step_cell: non unit increment");
  };
  int a = dir_of(sub(p.pts[k + 1], p.pts[k]));
  int b = dir_of(sub(p.pts[k + 2], p.pts[k + 1]));
  int reverse_a = a ^ 1;
  int b_slot = b - (b > reverse_a ? 1 : 0);
  return a * (2 * d - 1) + b_slot;
}

}  // namespace

nlohmann::json StationarityReport::to_json() const {
  return nlohmann::json{{"k_shifts", k_shifts},
                        {"p_values", p_values},
                        {"statistics", statistics},
                        {"samples_per_batch", samples_per_batch}};
}

StationarityReport stationarity_diagnostic(int d, std::int64_t n_samples,
                                           const std::vector<std::int64_t>& k_shifts,
                                           std::int64_t horizon, RngStream& rng) {
  if (d < 5) throw std::invalid_argument("stationarity_diagnostic: needs d >= 5");
  if (n_samples < 100)
    throw std::invalid_argument("stationarity_diagnostic: too few samples");
  std::int64_t max_k = 0;
  for (auto k : k_shifts) max_k = std::max(max_k, k);
  std::int64_t side = max_k + 2;
  if (horizon < side)
    throw std::invalid_argument("stationarity_diagnostic: horizon too small");
  int cells = 2 * d * (2 * d - 1);

  auto collect = [&](std::int64_t k) {
    std::vector<std::int64_t> counts(static_cast<size_t>(cells), 0);
    for (std::int64_t i = 0; i < n_samples; ++i) {
      TwoSidedPath ts = two_sided_sample_highdim(d, side, horizon, rng);
      ++counts[static_cast<size_t>(
          two_step_cell(ts.forward.path, static_cast<size_t>(k), d))];
    }
    return counts;
  };

  StationarityReport rep;
  rep.samples_per_batch = n_samples;
  auto base = collect(0);
  for (auto k : k_shifts) {
    auto shifted = (k == 0) ? base : collect(k);
    auto res = chi_square_two_sample(base, shifted);
    rep.k_shifts.push_back(k);
    rep.p_values.push_back(res.p_value);
    rep.statistics.push_back(res.statistic);
  }
  return rep;
}

nlohmann::json ErgodicDecayReport::to_json() const {
  return nlohmann::json{
      {"n_ladder", n_ladder}, {"variances", variances}, {"slope", slope}};
}

ErgodicDecayReport ergodic_variance_decay(int d, const Path& xi,
                                          const std::vector<std::int64_t>& n_ladder,
                                          int n_samples, RngStream& rng) {
  if (n_ladder.size() < 2)
    throw std::invalid_argument("ergodic_variance_decay: ladder too short");
  std::int64_t m = static_cast<std::int64_t>(xi.pts.size()) - 1;
  std::int64_t max_n = n_ladder.back();
  std::vector<MeanAcc> acc(n_ladder.size());
  for (int s = 0; s < n_samples; ++s) {
    LoopErasedPath eta = lerw_sample(d, max_n + m, rng);
    for (size_t r = 0; r < n_ladder.size(); ++r)
      acc[r].add(cylinder_frequency(eta.path, xi, n_ladder[r]));
  }
  ErgodicDecayReport rep;
  rep.n_ladder = n_ladder;
  std::vector<double> lx, ly;
  for (size_t r = 0; r < n_ladder.size(); ++r) {
    rep.variances.push_back(acc[r].variance());
    if (acc[r].variance() > 0) {
      lx.push_back(std::log(static_cast<double>(n_ladder[r])));
      ly.push_back(std::log(acc[r].variance()));
    }
  }
  if (lx.size() >= 2) rep.slope = linear_fit(lx, ly).slope;
  return rep;
}

}  // namespace lerwlab
