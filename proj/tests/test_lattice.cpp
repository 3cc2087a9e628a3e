#include "doctest.h"

#include <unordered_set>

#include "lerwlab/lattice.hpp"
#include "lerwlab/rng.hpp"

using namespace lerwlab;

namespace {
Point pt(std::int64_t x, std::int64_t y, std::int64_t z) {
  Point p;
  p[0] = x;
  p[1] = y;
  p[2] = z;
  return p;
}
}  // namespace

TEST_CASE("neighbors of the origin in d=3, fixed order") {
  auto nb = neighbors(origin(), 3);
  REQUIRE(nb.size() == 6);
  CHECK(nb[0] == pt(1, 0, 0));
  CHECK(nb[1] == pt(-1, 0, 0));
  CHECK(nb[2] == pt(0, 1, 0));
  CHECK(nb[3] == pt(0, -1, 0));
  CHECK(nb[4] == pt(0, 0, 1));
  CHECK(nb[5] == pt(0, 0, -1));
  for (const auto& q : nb) CHECK(l1_norm(sub(q, origin())) == 1);
}

TEST_CASE("neighbors in d=4: 8 points, one coordinate off by one") {
  Point p;
  for (int i = 0; i < 4; ++i) p[i] = 1;
  auto nb = neighbors(p, 4);
  REQUIRE(nb.size() == 8);
  for (const auto& q : nb) {
    int changed = 0;
    for (int i = 0; i < 4; ++i)
      if (q[i] != p[i]) {
        ++changed;
        CHECK(std::abs(q[i] - p[i]) == 1);
      }
    CHECK(changed == 1);
  }
}

TEST_CASE("neighbor relation is symmetric") {
  RngStream r(9, 1);
  for (int t = 0; t < 200; ++t) {
    int d = 3 + static_cast<int>(r.below(3));
    Point p;
    for (int i = 0; i < d; ++i) p[i] = static_cast<std::int64_t>(r.below(21)) - 10;
    for (const auto& q : neighbors(p, d)) {
      auto back = neighbors(q, d);
      CHECK(std::find(back.begin(), back.end(), p) != back.end());
    }
  }
}

TEST_CASE("euclidean norm examples") {
  CHECK(euclidean_norm(origin()) == 0.0);
  CHECK(euclidean_norm(pt(3, 4, 0)) == doctest::Approx(5.0));
  Point p;
  for (int i = 0; i < 4; ++i) p[i] = 1;
  CHECK(euclidean_norm(p) == doctest::Approx(2.0));
}

TEST_CASE("sausage membership examples") {
  std::vector<Point> a = {origin()};
  CHECK(sausage_contains(a, 0.0, origin()));
  CHECK(sausage_contains(a, 1.5, pt(1, 1, 0)));        // sqrt(2) <= 1.5
  CHECK_FALSE(sausage_contains(a, 1.0, pt(1, 1, 0)));  // sqrt(2) > 1
  CHECK_THROWS_AS(sausage_contains({}, 1.0, origin()), std::invalid_argument);
  CHECK_THROWS_AS(sausage_contains(a, -0.5, origin()), std::invalid_argument);
}

TEST_CASE("sausage index agrees with brute force and is monotone in eps") {
  RngStream r(17, 4);
  std::vector<Point> anchors;
  Point cur = origin();
  for (int i = 0; i < 120; ++i) {
    anchors.push_back(cur);
    cur = step(cur, r.direction(6));
  }
  for (double eps : {0.0, 1.0, 2.5, 4.0}) {
    SausageIndex idx(anchors, 3, eps);
    SausageIndex wider(anchors, 3, eps + 1.0);
    for (int t = 0; t < 500; ++t) {
      Point z;
      for (int i = 0; i < 3; ++i) z[i] = static_cast<std::int64_t>(r.below(31)) - 15;
      bool brute = sausage_contains(anchors, eps, z);
      CHECK(idx.contains(z) == brute);
      if (brute) CHECK(wider.contains(z));  // monotone
    }
  }
}

TEST_CASE("PointSet keeps insertion order and rejects duplicates") {
  PointSet s;
  CHECK(s.insert(pt(0, 0, 0)));
  CHECK(s.insert(pt(1, 0, 0)));
  CHECK_FALSE(s.insert(pt(0, 0, 0)));
  CHECK(s.size() == 2);
  CHECK(s[0] == pt(0, 0, 0));
  CHECK(s[1] == pt(1, 0, 0));
  CHECK(s.contains(pt(1, 0, 0)));
  CHECK_FALSE(s.contains(pt(2, 0, 0)));
  CHECK(s.radius() == doctest::Approx(1.0));
}

TEST_CASE("PointTable fuzz against a reference map") {
  RngStream r(33, 0);
  PointTable table;
  std::unordered_set<std::int64_t> ref;  // encode small points as integers
  auto enc = [](const Point& p) { return p[0] + 101 * p[1] + 101 * 101 * p[2]; };
  for (int t = 0; t < 20000; ++t) {
    Point p;
    for (int i = 0; i < 3; ++i) p[i] = static_cast<std::int64_t>(r.below(11)) - 5;
    if (r.uniform01() < 0.6) {
      table.put(p, enc(p));
      ref.insert(enc(p));
    } else {
      table.erase(p);
      ref.erase(enc(p));
    }
    CHECK(table.size() == ref.size());
    if (t % 100 == 0) {
      Point q;
      for (int i = 0; i < 3; ++i) q[i] = static_cast<std::int64_t>(r.below(11)) - 5;
      const std::int64_t* v = table.find(q);
      CHECK((v != nullptr) == (ref.count(enc(q)) > 0));
      if (v) CHECK(*v == enc(q));
    }
  }
}

TEST_CASE("point text round trip") {
  Point p = pt(-3, 12, 0);
  CHECK(format_point(p, 3) == "-3,12,0");
  CHECK(parse_point("-3,12,0", 3) == p);
  CHECK(parse_point(" -3 , 12 , 0 ", 3) == p);
  CHECK_THROWS_AS(parse_point("1,2", 3), std::invalid_argument);
  CHECK_THROWS_AS(parse_point("1,2,3,4", 3), std::invalid_argument);
  CHECK_THROWS_AS(parse_point("a,b,c", 3), std::invalid_argument);
}
