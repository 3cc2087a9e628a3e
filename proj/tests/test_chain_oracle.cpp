#include "doctest.h"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "lerwlab/chain_oracle.hpp"
#include "lerwlab/walk.hpp"

using namespace lerwlab;

namespace {

// two states, each hopping to the other with probability 1/2, absorbed
// otherwise
FiniteChain two_state_chain() {
  Eigen::MatrixXd P(2, 2);
  P << 0.0, 0.5, 0.5, 0.0;
  return FiniteChain(P);
}

}  // namespace

TEST_CASE("two-state chain hand values") {
  FiniteChain c = two_state_chain();
  CHECK(c.is_transient());

  // from either state, escape of the full pair is 1/2
  CHECK(c.exact_escape({0, 1}, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(c.exact_escape({0, 1}, 1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(c.exact_capacity({0, 1}) == doctest::Approx(1.0).epsilon(1e-12));

  // singleton: return probability 1/4, escape 3/4
  CHECK(c.exact_escape({0}, 0) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(c.exact_capacity({0}) == doctest::Approx(0.75).epsilon(1e-12));

  // ordering (a,b): 0.75 * 1 + 0.5 * 0.5 = 1.0
  CHECK(c.exact_decomposition({0, 1}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c.exact_decomposition({1, 0}) == doctest::Approx(1.0).epsilon(1e-12));

  // single-point ordering reduces to the escape probability
  CHECK(c.exact_decomposition({0}) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("chains with an unabsorbed cycle fail the transience check") {
  Eigen::MatrixXd P(3, 3);
  // states 0 and 1 trade mass forever; state 2 is absorbed eventually
  P << 0.0, 1.0, 0.0,
       1.0, 0.0, 0.0,
       0.2, 0.2, 0.1;
  FiniteChain c(P);
  CHECK_FALSE(c.is_transient());
  CHECK_THROWS_AS(c.exact_capacity({0, 1, 2}), std::runtime_error);
}

TEST_CASE("input validation") {
  Eigen::MatrixXd bad(2, 2);
  bad << 0.6, 0.6, 0.1, 0.1;
  CHECK_THROWS_AS(FiniteChain{bad}, std::invalid_argument);  // row sum > 1
  bad << -0.1, 0.5, 0.1, 0.1;
  CHECK_THROWS_AS(FiniteChain{bad}, std::invalid_argument);  // negative

  FiniteChain c = two_state_chain();
  CHECK_THROWS_AS(c.exact_escape({0}, 1), std::invalid_argument);  // x not in A
  CHECK_THROWS_AS(c.exact_capacity({}), std::invalid_argument);
  CHECK_THROWS_AS(c.exact_decomposition({0, 0}), std::invalid_argument);
}

TEST_CASE("decomposition equals capacity for every permutation, |A| <= 6") {
  RngStream rng(77, 0);
  for (int t = 0; t < 8; ++t) {
    FiniteChain c = random_transient_chain(12, rng);
    std::vector<int> subset = {0, 2, 3, 5, 7, 9};
    double cap = c.exact_capacity(subset);
    std::sort(subset.begin(), subset.end());
    do {
      CHECK(c.exact_decomposition(subset) == doctest::Approx(cap).epsilon(1e-10));
    } while (std::next_permutation(subset.begin(), subset.end()));
  }
}

TEST_CASE("the identity needs path-reversal symmetry: asymmetric counterexample") {
  // one-way hop 0 -> 1; no mass back
  Eigen::MatrixXd P(2, 2);
  P << 0.0, 0.5, 0.0, 0.0;
  FiniteChain c(P);
  REQUIRE(c.is_transient());
  double cap = c.exact_capacity({0, 1});
  double dec = c.exact_decomposition({0, 1});
  CHECK(std::fabs(cap - dec) > 0.1);
}

TEST_CASE("capacity subadditivity on random chains") {
  RngStream rng(5, 1);
  for (int t = 0; t < 40; ++t) {
    int n = 6 + static_cast<int>(rng.below(20));
    FiniteChain c = random_transient_chain(n, rng);
    std::vector<int> states(static_cast<size_t>(n));
    std::iota(states.begin(), states.end(), 0);
    for (size_t k = 0; k + 1 < states.size(); ++k)
      std::swap(states[k], states[k + rng.below(states.size() - k)]);
    size_t ka = 1 + static_cast<size_t>(rng.below(3));
    size_t kb = 1 + static_cast<size_t>(rng.below(3));
    std::vector<int> a(states.begin(), states.begin() + static_cast<long>(ka));
    std::vector<int> b(states.begin() + static_cast<long>(ka),
                       states.begin() + static_cast<long>(ka + kb));
    std::vector<int> both = a;
    both.insert(both.end(), b.begin(), b.end());
    CHECK(c.exact_capacity(both) <=
          c.exact_capacity(a) + c.exact_capacity(b) + 1e-12);
  }
}

TEST_CASE("harmonic factorization on chains: cap(A) = sum_b esc_B(b) P_b(hit A)") {
  RngStream rng(8, 8);
  for (int t = 0; t < 25; ++t) {
    int n = 5 + static_cast<int>(rng.below(12));
    FiniteChain c = random_transient_chain(n, rng);
    std::vector<int> b_set;
    for (int s = 0; s < n; ++s)
      if (rng.uniform01() < 0.5) b_set.push_back(s);
    if (b_set.size() < 2) continue;
    std::vector<int> a_set(b_set.begin(), b_set.begin() + 1 + static_cast<long>(rng.below(b_set.size() - 1)));
    auto esc_b = c.exact_escape_all(b_set);
    double rhs = 0;
    for (size_t i = 0; i < b_set.size(); ++i)
      rhs += esc_b[i] * c.exact_hit_probability(a_set, b_set[i]);
    CHECK(c.exact_capacity(a_set) == doctest::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("boxed walk chain: origin capacity decreases with the box toward "
          "the full-lattice value") {
  // absorbing the walk at the box boundary can only remove returns, so the
  // boxed escape probability sits above the unrestricted Z^3 value
  // 1/G(0,0) = 0.659463 and falls toward it as the box grows
  const double free_value = 0.659463;
  double prev = 2.0;
  for (int radius : {2, 3, 4, 6}) {
    FiniteChain c = boxed_walk_chain(3, radius);
    int o = boxed_walk_origin_state(3, radius);
    double cap = c.exact_capacity({o});
    CHECK(cap < prev);
    CHECK(cap > free_value);
    prev = cap;
  }
  CHECK(prev - free_value < 0.03);
}

TEST_CASE("boxed walk chain gives the exact first-step law of the erased walk") {
  // the first erased-walk step is the walk's last exit step from the origin:
  // P(eta_1 = e) proportional to P(0 -> e) * P_e(never hit 0); symmetry of the
  // box makes it exactly uniform over the 6 neighbors
  FiniteChain c = boxed_walk_chain(3, 4);
  int o = boxed_walk_origin_state(3, 4);
  std::vector<double> w;
  for (int dir = 0; dir < 6; ++dir) {
    Point e = step(origin(), dir);
    // state index of e
    std::int64_t side = 9, s = 0;
    for (int i = 2; i >= 0; --i) s = s * side + (e[i] + 4);
    double hit0 = c.exact_hit_probability({o}, static_cast<int>(s));
    w.push_back((1.0 / 6.0) * (1.0 - hit0));
  }
  double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double x : w) CHECK(x / total == doctest::Approx(1.0 / 6).epsilon(1e-12));
}

TEST_CASE("chain file save/load round trip and bad files") {
  FiniteChain c = two_state_chain();
  std::string file = "chain_roundtrip_test.txt";
  save_chain(c, file);
  FiniteChain back = load_chain(file);
  CHECK(back.n_states() == 2);
  CHECK(back.exact_capacity({0, 1}) == doctest::Approx(1.0).epsilon(1e-12));
  std::remove(file.c_str());
  CHECK_THROWS_AS(load_chain("does_not_exist_chain.txt"), std::runtime_error);
}

TEST_CASE("decomposition suite runs clean at moderate scale") {
  RngStream rng(2025, 1);
  auto res = run_decomposition_suite(60, 25, 8, 3, rng);
  CHECK(res.chains == 60);
  CHECK(res.max_deviation <= 1e-10);
}
