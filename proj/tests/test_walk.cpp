#include "doctest.h"

#include <cmath>

#include "lerwlab/stats.hpp"
#include "lerwlab/walk.hpp"

using namespace lerwlab;

namespace {

Point pt(std::int64_t x, std::int64_t y, std::int64_t z) {
  Point p;
  p[0] = x;
  p[1] = y;
  p[2] = z;
  return p;
}

Path make_path(int d, std::initializer_list<Point> pts) {
  Path p;
  p.dim = d;
  p.pts = pts;
  return p;
}

// Literal erasure-time recursion, quadratic time: l_0 = 0,
// l_{i+1} = 1 + max{k : omega_k == omega_{l_i}}, stopping when that index
// passes the end of the finite path. Test-only oracle, kept independent of
// the online implementation.
LoopErasedPath reference_loop_erase(const Path& omega) {
  LoopErasedPath out;
  out.path.dim = omega.dim;
  out.source_length = static_cast<std::int64_t>(omega.pts.size()) - 1;
  std::int64_t cur = 0;
  out.path.pts.push_back(omega.pts[0]);
  out.erasure_times.push_back(0);
  while (true) {
    std::int64_t last = -1;
    for (std::int64_t k = 0; k < static_cast<std::int64_t>(omega.pts.size()); ++k)
      if (omega.pts[static_cast<size_t>(k)] == omega.pts[static_cast<size_t>(cur)])
        last = k;
    std::int64_t next = last + 1;
    if (next >= static_cast<std::int64_t>(omega.pts.size())) break;
    cur = next;
    out.path.pts.push_back(omega.pts[static_cast<size_t>(cur)]);
    out.erasure_times.push_back(cur);
  }
  return out;
}

bool self_avoiding(const Path& p) {
  PointSet s;
  for (const auto& x : p.pts)
    if (!s.insert(x)) return false;
  return true;
}

}  // namespace

TEST_CASE("srw_sample basics") {
  RngStream r(1, 0);
  Path p0 = srw_sample(3, 0, r);
  REQUIRE(p0.pts.size() == 1);
  CHECK(p0.pts[0] == origin());

  RngStream a(5, 9), b(5, 9);
  Path pa = srw_sample(4, 500, a), pb = srw_sample(4, 500, b);
  CHECK(pa.pts == pb.pts);  // determinism contract
  CHECK_NOTHROW(validate_path(pa));
}

TEST_CASE("loop erasure of a self-avoiding path is the identity") {
  Path omega = make_path(3, {pt(0, 0, 0), pt(1, 0, 0), pt(1, 1, 0)});
  auto le = loop_erase(omega);
  CHECK(le.path.pts == omega.pts);
  CHECK(le.erasure_times == std::vector<std::int64_t>{0, 1, 2});
}

TEST_CASE("loop erasure of (0, e1, 0, e2)") {
  Path omega = make_path(3, {pt(0, 0, 0), pt(1, 0, 0), pt(0, 0, 0), pt(0, 1, 0)});
  auto le = loop_erase(omega);
  REQUIRE(le.path.pts.size() == 2);
  CHECK(le.path.pts[0] == pt(0, 0, 0));
  CHECK(le.path.pts[1] == pt(0, 1, 0));
  CHECK(le.erasure_times == std::vector<std::int64_t>{0, 3});

  SUBCASE("retained counts from the same path") {
    CHECK(retained_count(le, 0) == 0);
    CHECK(retained_count(le, 2) == 0);
    CHECK(retained_count(le, 3) == 1);
    CHECK_THROWS_AS(retained_count(le, -1), std::invalid_argument);
    CHECK_THROWS_AS(retained_count(le, 4), std::invalid_argument);
    // nondecreasing, and the final value is the last kept index
    std::int64_t prev = 0;
    for (std::int64_t j = 0; j <= le.source_length; ++j) {
      std::int64_t v = retained_count(le, j);
      CHECK(v >= prev);
      prev = v;
    }
    CHECK(retained_count(le, le.source_length) ==
          static_cast<std::int64_t>(le.path.pts.size()) - 1);
  }
}

TEST_CASE("loop erasure is idempotent on its own output") {
  RngStream r(7, 0);
  for (int t = 0; t < 50; ++t) {
    Path omega = srw_sample(3, 200, r);
    auto le = loop_erase(omega);
    auto le2 = loop_erase(le.path);
    CHECK(le2.path.pts == le.path.pts);
  }
}

TEST_CASE("online loop erasure equals the literal recursion") {
  RngStream r(123, 0);
  for (int t = 0; t < 300; ++t) {
    int d = 3 + static_cast<int>(r.below(3));
    std::int64_t len = 1 + static_cast<std::int64_t>(r.below(300));
    Path omega = srw_sample(d, len, r);
    auto fast = loop_erase(omega);
    auto ref = reference_loop_erase(omega);
    CHECK(fast.path.pts == ref.path.pts);
    CHECK(fast.erasure_times == ref.erasure_times);
    CHECK(self_avoiding(fast.path));
  }
}

TEST_CASE("cut times") {
  Path omega = make_path(3, {pt(0, 0, 0), pt(1, 0, 0), pt(0, 0, 0), pt(0, 1, 0)});
  auto cuts = cut_times(omega);
  CHECK(cuts == std::vector<std::int64_t>{2, 3});

  // strictly monotone path: every index is a cut time
  Path mono = make_path(3, {pt(0, 0, 0), pt(1, 0, 0), pt(2, 0, 0), pt(3, 0, 0)});
  CHECK(cut_times(mono) == std::vector<std::int64_t>{0, 1, 2, 3});

  // the last index always qualifies (empty future)
  RngStream r(2, 2);
  for (int t = 0; t < 20; ++t) {
    Path w = srw_sample(3, 50, r);
    auto c = cut_times(w);
    REQUIRE(!c.empty());
    CHECK(c.back() == static_cast<std::int64_t>(w.pts.size()) - 1);
  }
}

TEST_CASE("loop erasure splits at cut times") {
  RngStream r(31, 5);
  int checked = 0;
  for (int t = 0; t < 60; ++t) {
    Path omega = srw_sample(3, 400, r);
    auto cuts = cut_times(omega);
    std::int64_t c = cuts[cuts.size() / 2];
    if (c == 0 || c + 1 == static_cast<std::int64_t>(omega.pts.size())) continue;
    ++checked;
    Path prefix;
    prefix.dim = 3;
    prefix.pts.assign(omega.pts.begin(), omega.pts.begin() + c + 1);
    Path suffix = shift_path(omega, c);
    auto le_full = loop_erase(omega);
    auto le_pre = loop_erase(prefix);
    auto le_suf = loop_erase(suffix);
    std::vector<Point> glued = le_pre.path.pts;
    for (size_t i = 1; i < le_suf.path.pts.size(); ++i)
      glued.push_back(add(le_suf.path.pts[i], omega.pts[static_cast<size_t>(c)]));
    CHECK(glued == le_full.path.pts);
  }
  CHECK(checked > 30);
}

TEST_CASE("shift operator") {
  Path omega = make_path(3, {pt(0, 0, 0), pt(1, 0, 0), pt(1, 1, 0)});
  Path shifted = shift_path(omega, 1);
  REQUIRE(shifted.pts.size() == 2);
  CHECK(shifted.pts[0] == origin());
  CHECK(shifted.pts[1] == pt(0, 1, 0));

  CHECK(shift_path(omega, 0).pts == omega.pts);  // rooted input: identity

  RngStream r(4, 4);
  Path w = srw_sample(3, 30, r);
  CHECK(shift_path(shift_path(w, 1), 1).pts == shift_path(w, 2).pts);
  CHECK_THROWS_AS(shift_path(w, 31), std::invalid_argument);
}

TEST_CASE("cylinder frequency basics") {
  RngStream r(6, 1);
  LoopErasedPath eta = lerw_sample(4, 300, r);
  Path xi0 = make_path(4, {origin()});
  CHECK(cylinder_frequency(eta.path, xi0, 200) == doctest::Approx(1.0));

  // one-step cylinders partition: frequencies sum to one
  double total = 0;
  for (int dir = 0; dir < 8; ++dir) {
    Path xi;
    xi.dim = 4;
    xi.pts = {origin(), step(origin(), dir)};
    total += cylinder_frequency(eta.path, xi, 200);
  }
  CHECK(total == doctest::Approx(1.0));

  Path unrooted = make_path(4, {step(origin(), 0), origin()});
  CHECK_THROWS_AS(cylinder_frequency(eta.path, unrooted, 10), std::invalid_argument);
  CHECK_THROWS_AS(
      cylinder_frequency(eta.path, xi0,
                         static_cast<std::int64_t>(eta.path.pts.size())),
      std::invalid_argument);
}

TEST_CASE("lerw_sample: length, self-avoidance, first step uniform") {
  RngStream r(11, 0);
  for (int t = 0; t < 30; ++t) {
    LoopErasedPath eta = lerw_sample(3, 40, r);
    CHECK(eta.path.pts.size() == 41);
    CHECK(self_avoiding(eta.path));
    CHECK(eta.erasure_times[0] == 0);
    for (size_t i = 1; i < eta.erasure_times.size(); ++i)
      CHECK(eta.erasure_times[i] > eta.erasure_times[i - 1]);
  }

  std::vector<std::int64_t> counts(6, 0);
  const int n = 30000;
  for (int t = 0; t < n; ++t) {
    LoopErasedPath eta = lerw_sample(3, 1, r);
    REQUIRE(eta.path.pts.size() == 2);
    Point d1 = eta.path.pts[1];
    for (int dir = 0; dir < 6; ++dir)
      if (d1 == step(origin(), dir)) ++counts[static_cast<size_t>(dir)];
  }
  auto res = chi_square_goodness(counts, std::vector<double>(6, 1.0 / 6));
  CHECK(res.p_value > 6.3e-5);  // 4-sigma-equivalent
}

TEST_CASE("d=3 loop erasure is superdiffusive") {
  RngStream r(13, 1);
  auto mean_norm = [&](std::int64_t n, int samples) {
    MeanAcc acc;
    for (int s = 0; s < samples; ++s) {
      LoopErasedPath eta = lerw_sample(3, n, r);
      acc.add(euclidean_norm(eta.path.pts[static_cast<size_t>(n)]));
    }
    return acc.mean();
  };
  double low = mean_norm(256, 120) / std::sqrt(256.0);
  double high = mean_norm(8192, 60) / std::sqrt(8192.0);
  CHECK(high > 1.2 * low);
}

TEST_CASE("d=4 erasure-time concentration trend") {
  // mean |l_n / (n (ln n)^{1/3}) - 1| shrinks as n doubles
  RngStream r(21, 0);
  std::vector<std::int64_t> ladder;
  for (std::int64_t n = 1 << 10; n <= 1 << 16; n <<= 2) ladder.push_back(n);
  std::vector<MeanAcc> acc(ladder.size());
  const int samples = 30;
  for (int s = 0; s < samples; ++s) {
    LoopErasedPath eta = lerw_sample(4, ladder.back(), r);
    for (size_t i = 0; i < ladder.size(); ++i) {
      std::int64_t n = ladder[i];
      double expected = static_cast<double>(n) *
                        std::cbrt(std::log(static_cast<double>(n)));
      double ratio = static_cast<double>(eta.erasure_times[static_cast<size_t>(n)]) / expected;
      acc[i].add(std::fabs(ratio - 1.0));
    }
  }
  CHECK(acc.back().mean() < acc.front().mean());
  for (size_t i = 0; i + 1 < acc.size(); ++i) {
    double joint = std::sqrt(acc[i].stderr_mean() * acc[i].stderr_mean() +
                             acc[i + 1].stderr_mean() * acc[i + 1].stderr_mean());
    CHECK(acc[i + 1].mean() <= acc[i].mean() + 3 * joint);
  }
}

TEST_CASE("cylinder frequencies agree across independent samples") {
  RngStream r(29, 0);
  Path xi = make_path(4, {origin(), step(origin(), 0), step(step(origin(), 0), 2)});
  const std::int64_t n = 100000;
  std::vector<double> hs;
  MeanAcc acc;
  for (int s = 0; s < 6; ++s) {
    LoopErasedPath eta = lerw_sample(4, n + 3, r);
    double h = cylinder_frequency(eta.path, xi, n);
    hs.push_back(h);
    acc.add(h);
  }
  double sd = std::sqrt(acc.variance());
  double band = 6.0 * std::sqrt(2.0) * std::max(sd, 1e-4);
  for (size_t i = 0; i < hs.size(); ++i)
    for (size_t j = i + 1; j < hs.size(); ++j)
      CHECK(std::fabs(hs[i] - hs[j]) <= band);
}
