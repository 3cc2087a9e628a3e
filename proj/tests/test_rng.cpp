#include "doctest.h"

#include <cmath>
#include <set>

#include "lerwlab/rng.hpp"
#include "lerwlab/stats.hpp"

using namespace lerwlab;

TEST_CASE("philox4x32-10 known-answer vectors") {
  // published vectors from the reference implementation's kat file
  auto zero = detail::philox4x32(0, 0, 0);
  CHECK(zero[0] == 0x6627e8d5u);
  CHECK(zero[1] == 0xe169c58du);
  CHECK(zero[2] == 0xbc57ac4cu);
  CHECK(zero[3] == 0x9b00dbd8u);

  auto ones = detail::philox4x32(~0ULL, ~0ULL, ~0ULL);
  CHECK(ones[0] == 0x408f276du);
  CHECK(ones[1] == 0x41c83b0eu);
  CHECK(ones[2] == 0xa20bc7c6u);
  CHECK(ones[3] == 0x6d5451fdu);

  auto pi = detail::philox4x32(0x85a308d3243f6a88ULL, 0x0370734413198a2eULL,
                               0x299f31d0a4093822ULL);
  CHECK(pi[0] == 0xd16cfe09u);
  CHECK(pi[1] == 0x94fdccebu);
  CHECK(pi[2] == 0x5001e420u);
  CHECK(pi[3] == 0x24126ea1u);
}

TEST_CASE("streams are pure functions of (seed, stream, index)") {
  RngStream a(42, 7), b(42, 7);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());

  // interleaving direction draws and u64 draws stays reproducible
  RngStream c(42, 7), d(42, 7);
  for (int i = 0; i < 100; ++i) {
    CHECK(c.direction(6) == d.direction(6));
    CHECK(c.next_u64() == d.next_u64());
  }

  RngStream e(42, 8);
  bool differs = false;
  RngStream a2(42, 7);
  for (int i = 0; i < 10; ++i)
    if (a2.next_u64() != e.next_u64()) differs = true;
  CHECK(differs);
}

TEST_CASE("substreams do not collide on a small census") {
  RngStream base(1, 0);
  std::set<std::uint64_t> ids;
  for (std::uint64_t k = 0; k < 10000; ++k)
    ids.insert(base.substream(k).stream_id());
  CHECK(ids.size() == 10000);
}

TEST_CASE("uniform01 stays in [0,1)") {
  RngStream r(3, 3);
  for (int i = 0; i < 10000; ++i) {
    double u = r.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("direction draws are uniform (chi-square, 4 sigma)") {
  RngStream r(2024, 0);
  const int two_d = 6;
  std::vector<std::int64_t> counts(two_d, 0);
  const std::int64_t n = 1000000;
  for (std::int64_t i = 0; i < n; ++i) ++counts[static_cast<size_t>(r.direction(two_d))];
  std::vector<double> probs(two_d, 1.0 / two_d);
  auto res = chi_square_goodness(counts, probs);
  // 4-sigma-equivalent tail for 5 dof
  CHECK(res.p_value > 6.3e-5);
}
