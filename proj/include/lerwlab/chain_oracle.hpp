// Exact linear-algebra oracle on finite transient Markov chains: escape
// probabilities, capacity, and the capacity-decomposition identity. The
// identity rests only on the strong Markov property, so it holds on any
// transient chain and can be verified here to solver precision.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lerwlab/rng.hpp"

namespace lerwlab {

// Substochastic transition matrix; the per-row deficiency 1 - sum_j P(i,j)
// is the one-step probability of absorption ("escape to infinity").
class FiniteChain {
 public:
  explicit FiniteChain(Eigen::MatrixXd P);

  int n_states() const { return static_cast<int>(P_.rows()); }
  const Eigen::MatrixXd& P() const { return P_; }

  // From every state the total absorption probability must be 1: solves
  // (I-P)x = r with r the one-step absorption column and checks x == 1
  // within 1e-9. Also fails if (I-P) is numerically singular.
  bool is_transient() const;
  void require_transient() const;  // throws std::runtime_error if not

  // P_x(walk from time 1 on never visits A), for x in A. Exact up to the
  // linear solver; errors if the chain is not transient, A is empty, or
  // x is outside A.
  double exact_escape(const std::vector<int>& a, int x) const;

  // Escape probabilities for every member of A with a single factorization.
  std::vector<double> exact_escape_all(const std::vector<int>& a) const;

  // Sum of exact_escape over A.
  double exact_capacity(const std::vector<int>& a) const;

  // Ordered-sum form: sum_k esc({x_1..x_k}, x_k) * esc({x_1..x_{k-1}}, x_k),
  // where escaping the empty set has probability 1. Equals exact_capacity
  // for every ordering; errors on duplicates.
  double exact_decomposition(const std::vector<int>& ordered) const;

  // P_x(hit A at some time >= 0); 1 when x is in A.
  double exact_hit_probability(const std::vector<int>& a, int x) const;

 private:
  // h(y) = P_y(hit A at >= 0) for all states.
  Eigen::VectorXd hitting_vector(const std::vector<int>& a) const;

  Eigen::MatrixXd P_;
};

// SRW on Z^d restricted to the box [-radius, radius]^d; stepping out of the
// box absorbs. States enumerate box sites in odometer order.
FiniteChain boxed_walk_chain(int d, int radius);
int boxed_walk_origin_state(int d, int radius);

// Random substochastic chain with guaranteed absorption from every state.
FiniteChain random_transient_chain(int n_states, RngStream& rng);

// Text format: first line n_states, then one "i j p" triplet per line.
FiniteChain load_chain(const std::string& path);
void save_chain(const FiniteChain& chain, const std::string& path);

struct OracleSuiteResult {
  int chains = 0;
  std::int64_t orderings_checked = 0;
  double max_deviation = 0;  // max |capacity - decomposition|
};

// Random-chain identity suite: for each chain draw random ordered subsets
// (size <= max_subset) and several orderings, compare decomposition against
// capacity.
OracleSuiteResult run_decomposition_suite(int n_chains, int max_states,
                                          int max_subset, int orderings,
                                          RngStream& rng);

}  // namespace lerwlab
