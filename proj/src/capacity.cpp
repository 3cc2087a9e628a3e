#include "lerwlab/capacity.hpp"

#include "lerwlab/stats.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lerwlab {

namespace {

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

// G_d(0,0) for d = 3..8 (Watson-type integrals, used only for calibration of
// the bracket constants and in tests).
constexpr double kGreenOrigin[] = {1.5163860591519780, 1.2394671218484817,
                                   1.1563081248402312, 1.1169633732266718,
                                   1.0939063155878480, 1.0786470120169256};

void check_dim(int d) {
  if (d < 3 || d > kMaxDim)
    throw std::invalid_argument("capacity: requires 3 <= d <= 8 (transience)");
}

// Walk from `start` until leaving B(0, sqrt(R2)); returns false as soon as
// the set is revisited at time >= 1. set_max_n2 gates the membership test so
// steps outside the set's enclosing ball cost a few adds only.
template <class InSet>
bool escape_walk(int d, Point x, double R2, std::int64_t set_max_n2,
                 const InSet& in_set, RngStream& rng) {
  std::int64_t n2 = norm2(x);
  const int two_d = 2 * d;
  while (true) {
    int dir = rng.direction(two_d);
    int axis = dir >> 1;
    std::int64_t delta = (dir & 1) ? -1 : 1;
    n2 += 2 * x[axis] * delta + 1;
    x[axis] += delta;
    if (static_cast<double>(n2) > R2) return true;
    if (n2 <= set_max_n2 && in_set(x)) return false;
  }
}

// Walk from `start` until hitting the set (time >= 0) or leaving
// B(0, sqrt(kill2)). Returns hit flag and the exit point on a miss.
template <class InSet>
bool hit_walk(int d, Point x, double kill2, std::int64_t set_max_n2,
              const InSet& in_set, RngStream& rng, Point* exit_point) {
  std::int64_t n2 = norm2(x);
  if (n2 <= set_max_n2 && in_set(x)) return true;
  const int two_d = 2 * d;
  while (true) {
    int dir = rng.direction(two_d);
    int axis = dir >> 1;
    std::int64_t delta = (dir & 1) ? -1 : 1;
    n2 += 2 * x[axis] * delta + 1;
    x[axis] += delta;
    if (n2 <= set_max_n2 && in_set(x)) return true;
    if (static_cast<double>(n2) > kill2) {
      if (exit_point) *exit_point = x;
      return false;
    }
  }
}

// Dispatch on set size: tiny sets get a linear scan, everything else the
// hash table.
template <class Fn>
auto with_membership(const PointSet& set, Fn&& fn) {
  if (set.size() <= 4) {
    std::array<Point, 4> small{};
    for (size_t i = 0; i < set.size(); ++i) small[i] = set[i];
    size_t n = set.size();
    auto in = [&small, n](const Point& z) {
      for (size_t i = 0; i < n; ++i)
        if (small[i] == z) return true;
      return false;
    };
    return fn(in);
  }
  auto in = [&set](const Point& z) { return set.contains(z); };
  return fn(in);
}

std::int64_t count_escapes(const PointSet& set, const Point& start, int d,
                           double R, std::int64_t trials, const RngStream& base,
                           const McOptions& opt) {
  int threads = opt.threads > 0 ? opt.threads : default_thread_count();
  double R2 = R * R;
  std::int64_t max_n2 = set.max_norm2();
  return with_membership(set, [&](const auto& in_set) {
    return parallel_block_reduce<std::int64_t>(
        static_cast<std::uint64_t>(trials), threads, opt.block, std::int64_t{0},
        [&](std::uint64_t lo, std::uint64_t hi, std::uint64_t) {
          std::int64_t cnt = 0;
          for (std::uint64_t i = lo; i < hi; ++i) {
            RngStream rng = base.substream(i);
            if (escape_walk(d, start, R2, max_n2, in_set, rng)) ++cnt;
          }
          return cnt;
        },
        [](std::int64_t a, std::int64_t b) { return a + b; });
  });
}

EscapeEstimate escape_from(const PointSet& set, const Point& start, int d,
                           double R, std::int64_t trials, const RngStream& base,
                           const McOptions& opt) {
  EscapeEstimate e;
  e.trials = trials;
  e.truncation_radius = R;
  std::int64_t ok = count_escapes(set, start, d, R, trials, base, opt);
  e.upper = static_cast<double>(ok) / static_cast<double>(trials);
  double shrink = 1.0 - truncation_bracket_coeff(d) *
                            static_cast<double>(set.size()) /
                            std::pow(R, d - 2);
  e.lower = std::clamp(e.upper * std::max(shrink, 0.0), 0.0, 1.0);
  return e;
}

double mean_green_over_anchors(const std::vector<const Point*>& anchors,
                               const Point& z, double coeff, int d) {
  double acc = 0;
  for (const Point* a : anchors) {
    double r2 = static_cast<double>(dist2(*a, z));
    // ||z-a||^(2-d)
    double r = std::sqrt(r2);
    acc += coeff * std::pow(r, 2 - d);
  }
  return acc / static_cast<double>(anchors.size());
}

}  // namespace

double green_asymptotic_coeff(int d) {
  check_dim(d);
  // (d/2) pi^(-d/2) Gamma(d/2 - 1)
  static const double table[] = {0.47746482927568601, 0.20264236728467554,
                                 0.12665147955292221, 0.09675460329959847,
                                 0.08466027788714866, 0.08212785803747468};
  return table[d - 3];
}

double truncation_bracket_coeff(int d) {
  check_dim(d);
  // 2.5 * green_asymptotic_coeff(d) / G_d(0,0), rounded up
  static const double table[] = {0.79, 0.41, 0.28, 0.22, 0.20, 0.20};
  return table[d - 3];
}

double EscapeEstimate::stderr_upper() const {
  if (trials <= 0) return 0;
  return std::sqrt(std::max(upper * (1 - upper), 0.0) / static_cast<double>(trials));
}

nlohmann::json EstimateRecord::to_json() const {
  return nlohmann::json{{"method", method},
                        {"value", value},
                        {"stderr", stderr_value},
                        {"trials", trials},
                        {"params", params},
                        {"seed", master_seed},
                        {"stream", stream_id},
                        {"wall_seconds", wall_seconds}};
}

std::string EstimateRecord::csv_row() const {
  std::ostringstream os;
  double R = params.contains("R") ? params["R"].get<double>()
             : params.contains("y_radius") ? params["y_radius"].get<double>()
                                           : 0.0;
  os.precision(17);
  os << method << "," << value << "," << stderr_value << "," << trials << ","
     << R << "," << master_seed << "," << wall_seconds;
  return os.str();
}

EscapeEstimate escape_probability_mc(const PointSet& a_set, const Point& a,
                                     int d, double R, std::int64_t trials,
                                     const RngStream& rng, const McOptions& opt) {
  check_dim(d);
  if (trials < 1) throw std::invalid_argument("escape_probability_mc: trials < 1");
  if (a_set.empty()) throw std::invalid_argument("escape_probability_mc: empty set");
  if (!a_set.contains(a))
    throw std::invalid_argument("escape_probability_mc: start must belong to A");
  if (R <= 2 * a_set.radius())
    throw std::invalid_argument("escape_probability_mc: R must exceed 2 * radius(A)");
  return escape_from(a_set, a, d, R, trials, rng, opt);
}

EstimateRecord capacity_mc(const PointSet& a_set, int d, double R,
                           std::int64_t trials_per_point, const RngStream& rng,
                           const McOptions& opt) {
  check_dim(d);
  if (a_set.empty()) throw std::invalid_argument("capacity_mc: empty set");
  if (R <= 2 * a_set.radius())
    throw std::invalid_argument("capacity_mc: R must exceed 2 * radius(A)");
  Timer timer;
  double value = 0, var = 0, lower = 0, upper = 0;
  for (size_t i = 0; i < a_set.size(); ++i) {
    RngStream point_rng = rng.substream(i);
    EscapeEstimate e =
        escape_from(a_set, a_set[i], d, R, trials_per_point, point_rng, opt);
    value += e.midpoint();
    lower += e.lower;
    upper += e.upper;
    double se = e.stderr_upper();
    var += se * se;
  }
  EstimateRecord rec;
  rec.value = value;
  rec.stderr_value = std::sqrt(var);
  rec.trials = trials_per_point * static_cast<std::int64_t>(a_set.size());
  rec.method = "escape_sum";
  rec.params = {{"d", d},
                {"R", R},
                {"trials_per_point", trials_per_point},
                {"set_size", a_set.size()},
                {"bracket_lower", lower},
                {"bracket_upper", upper}};
  rec.master_seed = rng.master_seed();
  rec.stream_id = rng.stream_id();
  rec.wall_seconds = timer.seconds();
  return rec;
}

EstimateRecord capacity_decomposition_mc(const std::vector<Point>& ordered,
                                         int d, double R,
                                         std::int64_t trials_per_point,
                                         const RngStream& rng,
                                         const McOptions& opt) {
  check_dim(d);
  if (ordered.empty())
    throw std::invalid_argument("capacity_decomposition_mc: empty ordering");
  Timer timer;
  PointSet prefix;
  double full_radius = 0;
  for (const auto& p : ordered) {
    if (!prefix.insert(p))
      throw std::invalid_argument("capacity_decomposition_mc: duplicate point");
    full_radius = std::max(full_radius, euclidean_norm(p));
  }
  if (R <= 2 * full_radius)
    throw std::invalid_argument("capacity_decomposition_mc: R must exceed 2 * radius");

  double value = 0, var = 0;
  PointSet grow;
  for (size_t k = 0; k < ordered.size(); ++k) {
    const Point& xk = ordered[k];
    // factor avoiding {x_1..x_{k-1}} (probability 1 for the empty prefix)
    double excl = 1.0, excl_se = 0.0;
    if (k > 0) {
      EscapeEstimate e =
          escape_from(grow, xk, d, R, trials_per_point, rng.substream(2 * k), opt);
      excl = e.midpoint();
      excl_se = e.stderr_upper();
    }
    grow.insert(xk);
    EscapeEstimate e =
        escape_from(grow, xk, d, R, trials_per_point, rng.substream(2 * k + 1), opt);
    double incl = e.midpoint();
    double incl_se = e.stderr_upper();
    value += incl * excl;
    var += excl * excl * incl_se * incl_se + incl * incl * excl_se * excl_se;
  }
  EstimateRecord rec;
  rec.value = value;
  rec.stderr_value = std::sqrt(var);
  rec.trials = trials_per_point * static_cast<std::int64_t>(2 * ordered.size() - 1);
  rec.method = "decomposition";
  rec.params = {{"d", d},
                {"R", R},
                {"trials_per_point", trials_per_point},
                {"set_size", ordered.size()}};
  rec.master_seed = rng.master_seed();
  rec.stream_id = rng.stream_id();
  rec.wall_seconds = timer.seconds();
  return rec;
}

GreenEstimate green_estimate(int d, const Point& y, const std::string& method,
                             std::int64_t trials, const RngStream& rng,
                             const McOptions& opt) {
  check_dim(d);
  GreenEstimate g;
  g.y = y;
  g.method = method;
  if (method == "asymptotic") {
    if (norm2(y) == 0)
      throw std::invalid_argument("green_estimate: asymptotic needs y != 0");
    g.value = green_asymptotic_coeff(d) *
              std::pow(euclidean_norm(y), 2 - d);
    return g;
  }
  if (method != "monte_carlo")
    throw std::invalid_argument("green_estimate: unknown method " + method);
  if (trials < 1) throw std::invalid_argument("green_estimate: trials < 1");

  double ynorm = euclidean_norm(y);
  double R = std::max(8.0 * ynorm, 30.0);
  double R2 = R * R;
  double coeff = green_asymptotic_coeff(d);
  int threads = opt.threads > 0 ? opt.threads : default_thread_count();
  // per trial: visits to y while inside B(0,R), plus the expected residual
  // G(exit, y) so the kill-sphere truncation is corrected to first order
  MeanAcc acc = parallel_block_reduce<MeanAcc>(
      static_cast<std::uint64_t>(trials), threads, opt.block, MeanAcc{},
      [&](std::uint64_t lo, std::uint64_t hi, std::uint64_t) {
        MeanAcc local;
        for (std::uint64_t i = lo; i < hi; ++i) {
          RngStream r = rng.substream(i);
          Point x = origin();
          std::int64_t n2 = 0;
          double visits = (norm2(y) == 0) ? 1.0 : 0.0;
          const int two_d = 2 * d;
          while (true) {
            int dir = r.direction(two_d);
            int axis = dir >> 1;
            std::int64_t delta = (dir & 1) ? -1 : 1;
            n2 += 2 * x[axis] * delta + 1;
            x[axis] += delta;
            if (static_cast<double>(n2) > R2) break;
            if (x == y) visits += 1.0;
          }
          double tail = coeff * std::pow(std::sqrt(static_cast<double>(dist2(x, y))),
                                         2 - d);
          local.add(visits + tail);
        }
        return local;
      },
      [](MeanAcc a, const MeanAcc& b) {
        a.merge(b);
        return a;
      });
  g.value = acc.mean();
  g.stderr_value = acc.stderr_mean();
  return g;
}

Point far_sphere_start(int d, double r, RngStream& rng) {
  // isotropic gaussian direction, projected to the sphere, rounded to the
  // lattice: lands within distance ~1 of the Euclidean sphere
  while (true) {
    double v[kMaxDim];
    double n2 = 0;
    for (int i = 0; i < d; i += 2) {
      double u1 = rng.uniform01(), u2 = rng.uniform01();
      while (u1 <= 0) u1 = rng.uniform01();
      double rad = std::sqrt(-2 * std::log(u1));
      v[i] = rad * std::cos(2 * M_PI * u2);
      if (i + 1 < d) v[i + 1] = rad * std::sin(2 * M_PI * u2);
    }
    for (int i = 0; i < d; ++i) n2 += v[i] * v[i];
    if (n2 < 1e-12) continue;
    double scale = r / std::sqrt(n2);
    Point p;
    for (int i = 0; i < d; ++i)
      p[i] = static_cast<std::int64_t>(std::llround(v[i] * scale));
    if (norm2(p) > 0) return p;
  }
}

namespace {

struct HitAccum {
  double sh = 0, sg = 0, shh = 0, sgg = 0, shg = 0;
  std::int64_t n = 0;
  void add(double h, double g) {
    sh += h;
    sg += g;
    shh += h * h;
    sgg += g * g;
    shg += h * g;
    ++n;
  }
  void merge(const HitAccum& o) {
    sh += o.sh;
    sg += o.sg;
    shh += o.shh;
    sgg += o.sgg;
    shg += o.shg;
    n += o.n;
  }
};

}  // namespace

EstimateRecord capacity_via_hitting(const HitTarget& target, int d,
                                    double y_radius, std::int64_t trials,
                                    const RngStream& rng, double kill_factor,
                                    const McOptions& opt) {
  check_dim(d);
  if (trials < 1) throw std::invalid_argument("capacity_via_hitting: trials < 1");
  if (y_radius <= 2 * target.radius())
    throw std::invalid_argument(
        "capacity_via_hitting: y_radius must exceed 2 * radius(A)");
  if (kill_factor <= 1.2)
    throw std::invalid_argument("capacity_via_hitting: kill_factor too small");
  Timer timer;
  double kill = kill_factor * y_radius;
  double kill2 = kill * kill;
  double coeff = green_asymptotic_coeff(d);
  double tr = target.radius();
  std::int64_t max_n2 =
      static_cast<std::int64_t>(std::floor((tr + 1) * (tr + 1))) + 1;

  // fixed stride subsample of anchors for the far-field Green average; each
  // anchor term has the same spherical mean, so a subset is equally valid
  const auto& anchors = target.anchors();
  std::vector<const Point*> sub;
  size_t stride = std::max<size_t>(1, anchors.size() / 512);
  for (size_t i = 0; i < anchors.size(); i += stride) sub.push_back(&anchors[i]);

  auto in_set = [&target](const Point& z) { return target.contains(z); };
  int threads = opt.threads > 0 ? opt.threads : default_thread_count();
  HitAccum acc = parallel_block_reduce<HitAccum>(
      static_cast<std::uint64_t>(trials), threads, opt.block, HitAccum{},
      [&](std::uint64_t lo, std::uint64_t hi, std::uint64_t) {
        HitAccum local;
        for (std::uint64_t i = lo; i < hi; ++i) {
          RngStream r = rng.substream(i);
          Point y = far_sphere_start(d, y_radius, r);
          Point exit;
          bool hit = hit_walk(d, y, kill2, max_n2, in_set, r, &exit);
          double g = mean_green_over_anchors(sub, y, coeff, d);
          if (!hit) g -= mean_green_over_anchors(sub, exit, coeff, d);
          local.add(hit ? 1.0 : 0.0, g);
        }
        return local;
      },
      [](HitAccum a, const HitAccum& b) {
        a.merge(b);
        return a;
      });

  double nn = static_cast<double>(acc.n);
  double mh = acc.sh / nn, mg = acc.sg / nn;
  if (mg <= 0) throw std::runtime_error("capacity_via_hitting: degenerate denominator");
  double ratio = mh / mg;
  // delta method for the ratio of means
  double vh = (acc.shh / nn - mh * mh) / nn;
  double vg = (acc.sgg / nn - mg * mg) / nn;
  double chg = (acc.shg / nn - mh * mg) / nn;
  double var = (vh + ratio * ratio * vg - 2 * ratio * chg) / (mg * mg);

  EstimateRecord rec;
  rec.value = ratio;
  rec.stderr_value = var > 0 ? std::sqrt(var) : 0;
  rec.trials = trials;
  rec.method = "hitting_green";
  rec.params = {{"d", d},
                {"y_radius", y_radius},
                {"kill_factor", kill_factor},
                {"hits", acc.sh},
                {"anchor_subsample", sub.size()}};
  rec.master_seed = rng.master_seed();
  rec.stream_id = rng.stream_id();
  rec.wall_seconds = timer.seconds();
  return rec;
}

EstimateRecord sausage_capacity_mc(const Path& eta_prefix, double eps,
                                   double y_radius, std::int64_t trials,
                                   const RngStream& rng, double kill_factor,
                                   const McOptions& opt) {
  if (eps < 0) throw std::invalid_argument("sausage_capacity_mc: eps < 0");
  SausageTarget target(eta_prefix.pts, eta_prefix.dim, eps);
  EstimateRecord rec = capacity_via_hitting(target, eta_prefix.dim, y_radius,
                                            trials, rng, kill_factor, opt);
  rec.method = "sausage_hitting";
  rec.params["eps"] = eps;
  return rec;
}

std::optional<Point> harmonic_measure_sample(const PointSet& b, int d,
                                             double y_radius, RngStream& rng,
                                             double kill_factor) {
  check_dim(d);
  if (b.empty()) throw std::invalid_argument("harmonic_measure_sample: empty set");
  if (y_radius <= 2 * b.radius())
    throw std::invalid_argument("harmonic_measure_sample: y_radius too small");
  double kill2 = kill_factor * y_radius * kill_factor * y_radius;
  std::int64_t max_n2 = b.max_norm2();
  Point x = far_sphere_start(d, y_radius, rng);
  std::int64_t n2 = norm2(x);
  const int two_d = 2 * d;
  while (true) {
    if (n2 <= max_n2 && b.contains(x)) return x;
    if (static_cast<double>(n2) > kill2) return std::nullopt;
    int dir = rng.direction(two_d);
    int axis = dir >> 1;
    std::int64_t delta = (dir & 1) ? -1 : 1;
    n2 += 2 * x[axis] * delta + 1;
    x[axis] += delta;
  }
}

bool escape_trial(const HitTarget& target, const Point& start, int d, double R,
                  RngStream& rng) {
  check_dim(d);
  double tr = target.radius();
  std::int64_t max_n2 =
      static_cast<std::int64_t>(std::floor((tr + 1) * (tr + 1))) + 1;
  auto in = [&target](const Point& z) { return target.contains(z); };
  return escape_walk(d, start, R * R, max_n2, in, rng);
}

}  // namespace lerwlab
