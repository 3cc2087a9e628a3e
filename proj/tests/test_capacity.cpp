#include "doctest.h"

#include <cmath>

#include "lerwlab/capacity.hpp"
#include "lerwlab/stats.hpp"

using namespace lerwlab;

namespace {

Point pt(std::int64_t x, std::int64_t y, std::int64_t z) {
  Point p;
  p[0] = x;
  p[1] = y;
  p[2] = z;
  return p;
}

// Watson-integral value of the Z^3 Green's function at the origin and the
// capacities it induces on the singleton and the origin-e1 pair.
constexpr double kG3 = 1.5163860591519780;
constexpr double kCapOrigin = 1.0 / kG3;             // 0.659463...
constexpr double kCapPair = 2.0 / (2.0 * kG3 - 1.0);  // 0.983878...

PointSet origin_set() {
  PointSet s;
  s.insert(origin());
  return s;
}

}  // namespace

TEST_CASE("green asymptotic coefficients and bracket constants") {
  CHECK(green_asymptotic_coeff(3) == doctest::Approx(3.0 / (2.0 * M_PI)).epsilon(1e-12));
  CHECK(green_asymptotic_coeff(4) == doctest::Approx(2.0 / (M_PI * M_PI)).epsilon(1e-12));
  for (int d = 3; d <= 8; ++d) {
    // padded by 2.5x over the measured per-point return coefficient
    double measured = green_asymptotic_coeff(d) /
                      (d == 3   ? 1.5163860592
                       : d == 4 ? 1.2394671218
                       : d == 5 ? 1.1563081248
                       : d == 6 ? 1.1169633732
                       : d == 7 ? 1.0939063156
                                : 1.0786470120);
    CHECK(truncation_bracket_coeff(d) > 2.4 * measured);
    CHECK(truncation_bracket_coeff(d) < 3.0 * measured);
  }
  CHECK_THROWS_AS(green_asymptotic_coeff(2), std::invalid_argument);
}

TEST_CASE("escape probability: certain-hit set gives exactly zero") {
  // the closed unit ball: every first step lands in the set
  PointSet ball;
  ball.insert(origin());
  for (int dir = 0; dir < 6; ++dir) ball.insert(step(origin(), dir));
  RngStream rng(3, 0);
  auto est = escape_probability_mc(ball, origin(), 3, 10.0, 2000, rng);
  CHECK(est.upper == 0.0);
  CHECK(est.lower == 0.0);
}

TEST_CASE("escape probability preconditions") {
  PointSet s = origin_set();
  RngStream rng(3, 0);
  CHECK_THROWS_AS(escape_probability_mc(s, origin(), 3, 50.0, 0, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(escape_probability_mc(s, pt(1, 0, 0), 3, 50.0, 10, rng),
                  std::invalid_argument);  // start not in A
  PointSet wide;
  wide.insert(origin());
  wide.insert(pt(30, 0, 0));
  CHECK_THROWS_AS(escape_probability_mc(wide, origin(), 3, 50.0, 10, rng),
                  std::invalid_argument);  // R <= 2 radius(A)
}

TEST_CASE("escape upper estimate is monotone in the set under a shared stream") {
  PointSet small = origin_set();
  PointSet bigger = origin_set();
  bigger.insert(pt(1, 0, 0));
  bigger.insert(pt(0, 1, 0));
  RngStream rng(17, 3);
  auto a = escape_probability_mc(small, origin(), 3, 60.0, 4000, rng);
  auto b = escape_probability_mc(bigger, origin(), 3, 60.0, 4000, rng);
  CHECK(b.upper <= a.upper);  // pathwise domination, exact
}

TEST_CASE("capacity golden values at unit-test scale") {
  RngStream rng(101, 0);
  auto rec = capacity_mc(origin_set(), 3, 100.0, 100000, rng);
  CHECK(rec.method == "escape_sum");
  // truncation bias at R=100 is about +0.002, MC noise ~0.0015
  CHECK(std::fabs(rec.value - kCapOrigin) < 0.01);
  CHECK(rec.stderr_value < 0.002);

  PointSet pair;
  pair.insert(origin());
  pair.insert(pt(1, 0, 0));
  auto rec2 = capacity_mc(pair, 3, 100.0, 60000, rng.substream(1));
  CHECK(std::fabs(rec2.value - kCapPair) < 0.012);
}

TEST_CASE("escape bracket honesty for the origin at R=50") {
  RngStream rng(55, 2);
  auto est = escape_probability_mc(origin_set(), origin(), 3, 50.0, 200000, rng);
  CHECK(est.lower <= kCapOrigin);
  CHECK(est.upper >= kCapOrigin);
  CHECK(est.upper - est.lower < 0.03);
}

TEST_CASE("decomposition estimator agrees with the escape sum") {
  RngStream rng(7, 7);
  std::vector<Point> ordered = {origin(), pt(1, 0, 0), pt(1, 1, 0), pt(0, 1, 0)};
  auto dec = capacity_decomposition_mc(ordered, 3, 60.0, 20000, rng);
  PointSet s;
  for (const auto& p : ordered) s.insert(p);
  auto sum = capacity_mc(s, 3, 60.0, 20000, rng.substream(9));
  double joint = std::sqrt(dec.stderr_value * dec.stderr_value +
                           sum.stderr_value * sum.stderr_value);
  CHECK(std::fabs(dec.value - sum.value) < 3.5 * joint + 0.01);

  // ordering reversal preserves the total within noise
  std::vector<Point> rev(ordered.rbegin(), ordered.rend());
  auto dec2 = capacity_decomposition_mc(rev, 3, 60.0, 20000, rng.substream(10));
  joint = std::sqrt(dec.stderr_value * dec.stderr_value +
                    dec2.stderr_value * dec2.stderr_value);
  CHECK(std::fabs(dec.value - dec2.value) < 3.5 * joint + 0.01);

  CHECK_THROWS_AS(
      capacity_decomposition_mc({origin(), origin()}, 3, 60.0, 10, rng),
      std::invalid_argument);

  // singleton ordering reduces to the plain capacity estimator
  auto single = capacity_decomposition_mc({origin()}, 3, 60.0, 20000, rng.substream(11));
  CHECK(std::fabs(single.value - kCapOrigin) < 0.02);
}

TEST_CASE("green estimates") {
  RngStream rng(19, 0);
  auto g0 = green_estimate(3, origin(), "monte_carlo", 200000, rng);
  CHECK(std::fabs(g0.value - kG3) < 0.015);

  auto g1 = green_estimate(3, pt(1, 0, 0), "monte_carlo", 200000, rng.substream(1));
  // one-step identity at the origin: G(0,e1) = G(0,0) - 1
  CHECK(std::fabs(g1.value - (kG3 - 1.0)) < 0.015);

  auto g2 = green_estimate(3, pt(2, 0, 0), "monte_carlo", 200000, rng.substream(2));
  CHECK(g2.value < g1.value);  // decays with distance

  auto ga = green_estimate(3, pt(10, 0, 0), "asymptotic", 0, rng);
  CHECK(ga.value == doctest::Approx(green_asymptotic_coeff(3) / 10.0).epsilon(1e-12));
  CHECK_THROWS_AS(green_estimate(3, origin(), "asymptotic", 0, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(green_estimate(2, pt(1, 0, 0), "monte_carlo", 100, rng),
                  std::invalid_argument);
}

TEST_CASE("hitting estimator reproduces the golden values") {
  RngStream rng(23, 0);
  PointSet s = origin_set();
  PointSetTarget target(s);
  auto rec = capacity_via_hitting(target, 3, 20.0, 25000, rng, 6.0);
  CHECK(rec.method == "hitting_green");
  CHECK(std::fabs(rec.value - kCapOrigin) < 4 * rec.stderr_value + 0.01);

  PointSet pair;
  pair.insert(origin());
  pair.insert(pt(1, 0, 0));
  PointSetTarget target2(pair);
  auto rec2 = capacity_via_hitting(target2, 3, 20.0, 25000, rng.substream(1), 6.0);
  CHECK(std::fabs(rec2.value - kCapPair) < 4 * rec2.stderr_value + 0.015);

  // doubling the start radius moves the estimate by less than 3 joint sigma
  auto rec3 = capacity_via_hitting(target, 3, 40.0, 25000, rng.substream(2), 6.0);
  double joint = std::sqrt(rec.stderr_value * rec.stderr_value +
                           rec3.stderr_value * rec3.stderr_value);
  CHECK(std::fabs(rec.value - rec3.value) < 3 * joint + 0.01);

  CHECK_THROWS_AS(capacity_via_hitting(target, 3, 1.0, 100, rng),
                  std::invalid_argument);  // y_radius too small vs radius+pre
}

TEST_CASE("sausage capacity: eps=0 matches the point-set estimator and grows with eps") {
  RngStream rng(29, 0);
  Path path;
  path.dim = 3;
  Point cur = origin();
  RngStream walk_rng(31, 0);
  for (int i = 0; i < 40; ++i) {
    path.pts.push_back(cur);
    cur = step(cur, walk_rng.direction(6));
  }
  double y = 3.0 * 12 + 10;
  auto flat = sausage_capacity_mc(path, 0.0, y, 10000, rng, 5.0);
  PointSet s;
  for (const auto& p : path.pts) s.insert(p);
  PointSetTarget target(s);
  auto direct = capacity_via_hitting(target, 3, y, 10000, rng.substream(5), 5.0);
  double joint = std::sqrt(flat.stderr_value * flat.stderr_value +
                           direct.stderr_value * direct.stderr_value);
  CHECK(std::fabs(flat.value - direct.value) < 3 * joint + 0.02);

  auto fat = sausage_capacity_mc(path, 2.5, y, 10000, rng.substream(6), 5.0);
  CHECK(fat.value > flat.value - 3 * joint);
  auto fatter = sausage_capacity_mc(path, 5.0, y, 10000, rng.substream(7), 5.0);
  CHECK(fatter.value > fat.value - 3 * joint);
}

TEST_CASE("harmonic measure sampling") {
  RngStream rng(41, 0);
  PointSet single = origin_set();
  for (int t = 0; t < 20; ++t) {
    auto hit = harmonic_measure_sample(single, 3, 15.0, rng, 6.0);
    if (hit) CHECK(*hit == origin());
  }

  // two-point symmetric set: first-hit frequencies equal within 4 sigma
  PointSet pair;
  pair.insert(origin());
  pair.insert(pt(1, 0, 0));
  std::int64_t n0 = 0, n1 = 0;
  while (n0 + n1 < 4000) {
    auto hit = harmonic_measure_sample(pair, 3, 12.0, rng, 6.0);
    if (!hit) continue;
    (*hit == origin() ? n0 : n1)++;
  }
  double p = static_cast<double>(n0) / static_cast<double>(n0 + n1);
  double sigma = std::sqrt(0.25 / static_cast<double>(n0 + n1));
  CHECK(std::fabs(p - 0.5) < 4 * sigma);
}

TEST_CASE("capacity factorizes through the harmonic measure of a superset") {
  // cap(A) ~ cap(B) * P_{h(B)}(hit A) for A inside B
  RngStream rng(43, 0);
  PointSet b_set;
  b_set.insert(origin());
  b_set.insert(pt(1, 0, 0));
  b_set.insert(pt(0, 1, 0));
  b_set.insert(pt(1, 1, 0));
  PointSet a_set;
  a_set.insert(origin());
  a_set.insert(pt(1, 0, 0));

  PointSetTarget tb(b_set);
  auto cap_b = capacity_via_hitting(tb, 3, 18.0, 25000, rng, 6.0);
  PointSetTarget ta(a_set);
  auto cap_a = capacity_via_hitting(ta, 3, 18.0, 25000, rng.substream(1), 6.0);

  // P_{h(B)}(hit A): sample h(B), then walk until A is hit or the kill
  // sphere is reached
  RngStream hrng = rng.substream(2);
  std::int64_t hits = 0, tries = 0;
  double kill = 150.0;
  std::int64_t max_n2 = a_set.max_norm2();
  while (tries < 12000) {
    auto start = harmonic_measure_sample(b_set, 3, 18.0, hrng, 6.0);
    if (!start) continue;
    ++tries;
    Point x = *start;
    std::int64_t n2 = norm2(x);
    bool hit = a_set.contains(x);
    while (!hit) {
      int dir = hrng.direction(6);
      int axis = dir >> 1;
      std::int64_t delta = (dir & 1) ? -1 : 1;
      n2 += 2 * x[axis] * delta + 1;
      x[axis] += delta;
      if (n2 <= max_n2 && a_set.contains(x)) hit = true;
      if (static_cast<double>(n2) > kill * kill) break;
    }
    if (hit) ++hits;
  }
  double p_hit = static_cast<double>(hits) / static_cast<double>(tries);
  double lhs = cap_a.value;
  double rhs = cap_b.value * p_hit;
  // generous 3-sigma-plus-bias band: the kill-sphere truncation biases the
  // hit probability slightly down
  double joint = std::sqrt(cap_a.stderr_value * cap_a.stderr_value +
                           cap_b.stderr_value * cap_b.stderr_value * p_hit * p_hit) +
                 0.02;
  CHECK(std::fabs(lhs - rhs) < 3 * joint);
}

TEST_CASE("estimate record serialization") {
  EstimateRecord rec;
  rec.value = 0.5;
  rec.stderr_value = 0.01;
  rec.trials = 100;
  rec.method = "escape_sum";
  rec.params = {{"R", 50.0}, {"d", 3}};
  rec.master_seed = 7;
  rec.wall_seconds = 0.25;
  auto j = rec.to_json();
  CHECK(j["method"] == "escape_sum");
  CHECK(j["params"]["R"] == 50.0);
  std::string csv = rec.csv_row();
  CHECK(csv.find("escape_sum,0.5,0.01,100,50,7,") == 0);
}
