#include "lerwlab/chain_oracle.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <Eigen/LU>

#include "lerwlab/lattice.hpp"

namespace lerwlab {

namespace {

// Solve M x = b by partial-pivot LU; one iterative refinement pass when the
// relative residual exceeds 1e-12.
Eigen::VectorXd solve_checked(const Eigen::MatrixXd& m, const Eigen::VectorXd& b) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  Eigen::VectorXd x = lu.solve(b);
  double bnorm = b.norm();
  if (bnorm > 0) {
    double rel = (m * x - b).norm() / bnorm;
    if (rel > 1e-12) {
      x += lu.solve(b - m * x);
      rel = (m * x - b).norm() / bnorm;
      if (rel > 1e-9 || !x.allFinite())
        throw std::runtime_error("chain oracle: linear solve did not converge");
    }
  }
  if (!x.allFinite()) throw std::runtime_error("chain oracle: singular system");
  return x;
}

}  // namespace

FiniteChain::FiniteChain(Eigen::MatrixXd P) : P_(std::move(P)) {
  if (P_.rows() != P_.cols() || P_.rows() < 1)
    throw std::invalid_argument("FiniteChain: P must be square and nonempty");
  for (Eigen::Index i = 0; i < P_.rows(); ++i) {
    double row = 0;
    for (Eigen::Index j = 0; j < P_.cols(); ++j) {
      if (P_(i, j) < 0) throw std::invalid_argument("FiniteChain: negative entry");
      row += P_(i, j);
    }
    if (row > 1 + 1e-12)
      throw std::invalid_argument("FiniteChain: row sum exceeds 1");
  }
}

bool FiniteChain::is_transient() const {
  const Eigen::Index n = P_.rows();
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - P_;
  Eigen::VectorXd r = Eigen::VectorXd::Ones(n) - P_ * Eigen::VectorXd::Ones(n);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  Eigen::VectorXd x = lu.solve(r);
  if (!x.allFinite()) return false;
  // every state must be absorbed with total probability 1
  return (x.array() - 1.0).abs().maxCoeff() <= 1e-9;
}

void FiniteChain::require_transient() const {
  if (!is_transient())
    throw std::runtime_error("chain oracle: chain is not transient");
}

Eigen::VectorXd FiniteChain::hitting_vector(const std::vector<int>& a) const {
  const Eigen::Index n = P_.rows();
  std::vector<char> in_a(static_cast<size_t>(n), 0);
  for (int s : a) {
    if (s < 0 || s >= n) throw std::invalid_argument("chain oracle: state out of range");
    in_a[static_cast<size_t>(s)] = 1;
  }
  std::vector<Eigen::Index> off;
  for (Eigen::Index i = 0; i < n; ++i)
    if (!in_a[static_cast<size_t>(i)]) off.push_back(i);

  Eigen::VectorXd h = Eigen::VectorXd::Ones(n);
  if (off.empty()) return h;

  // off A: h = Q h + b, with Q the off-A block and b the one-step mass into A
  Eigen::Index m = static_cast<Eigen::Index>(off.size());
  Eigen::MatrixXd sys(m, m);
  Eigen::VectorXd b(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    double into_a = 0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (in_a[static_cast<size_t>(j)]) into_a += P_(off[static_cast<size_t>(r)], j);
    b(r) = into_a;
    for (Eigen::Index c = 0; c < m; ++c)
      sys(r, c) = (r == c ? 1.0 : 0.0) - P_(off[static_cast<size_t>(r)], off[static_cast<size_t>(c)]);
  }
  Eigen::VectorXd hoff = solve_checked(sys, b);
  for (Eigen::Index r = 0; r < m; ++r) h(off[static_cast<size_t>(r)]) = hoff(r);
  return h;
}

double FiniteChain::exact_hit_probability(const std::vector<int>& a, int x) const {
  if (a.empty()) throw std::invalid_argument("chain oracle: empty target");
  require_transient();
  if (x < 0 || x >= n_states())
    throw std::invalid_argument("chain oracle: state out of range");
  return hitting_vector(a)(x);
}

std::vector<double> FiniteChain::exact_escape_all(const std::vector<int>& a) const {
  if (a.empty()) throw std::invalid_argument("chain oracle: empty set");
  {
    std::vector<int> sorted(a);
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw std::invalid_argument("chain oracle: duplicate states in set");
  }
  require_transient();
  Eigen::VectorXd h = hitting_vector(a);
  std::vector<double> out;
  out.reserve(a.size());
  for (int x : a) {
    // escape = 1 - sum_y P(x,y) h_A(y)
    double ret = P_.row(x).dot(h);
    out.push_back(1.0 - ret);
  }
  return out;
}

double FiniteChain::exact_escape(const std::vector<int>& a, int x) const {
  auto it = std::find(a.begin(), a.end(), x);
  if (it == a.end())
    throw std::invalid_argument("chain oracle: x must belong to A");
  return exact_escape_all(a)[static_cast<size_t>(it - a.begin())];
}

double FiniteChain::exact_capacity(const std::vector<int>& a) const {
  auto esc = exact_escape_all(a);
  return std::accumulate(esc.begin(), esc.end(), 0.0);
}

double FiniteChain::exact_decomposition(const std::vector<int>& ordered) const {
  if (ordered.empty()) throw std::invalid_argument("chain oracle: empty ordering");
  {
    std::vector<int> sorted(ordered);
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw std::invalid_argument("chain oracle: duplicate states in ordering");
  }
  require_transient();
  double total = 0;
  std::vector<int> prefix;
  prefix.reserve(ordered.size());
  for (size_t k = 0; k < ordered.size(); ++k) {
    int xk = ordered[k];
    // escaping the empty prefix has probability 1
    double excl = 1.0;
    if (!prefix.empty()) {
      Eigen::VectorXd h = hitting_vector(prefix);
      excl = 1.0 - P_.row(xk).dot(h);
    }
    prefix.push_back(xk);
    Eigen::VectorXd h = hitting_vector(prefix);
    double incl = 1.0 - P_.row(xk).dot(h);
    total += incl * excl;
  }
  return total;
}

FiniteChain boxed_walk_chain(int d, int radius) {
  if (d < 1 || d > kMaxDim) throw std::invalid_argument("boxed_walk_chain: bad dimension");
  if (radius < 0) throw std::invalid_argument("boxed_walk_chain: negative radius");
  std::int64_t side = 2 * static_cast<std::int64_t>(radius) + 1;
  std::int64_t n = 1;
  for (int i = 0; i < d; ++i) {
    n *= side;
    if (n > 200000) throw std::invalid_argument("boxed_walk_chain: box too large");
  }
  auto state_of = [&](const Point& p) {
    std::int64_t s = 0;
    for (int i = d - 1; i >= 0; --i) s = s * side + (p[i] + radius);
    return s;
  };
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  // odometer over box sites
  Point p;
  for (int i = 0; i < d; ++i) p[i] = -radius;
  while (true) {
    std::int64_t s = state_of(p);
    for (int dir = 0; dir < 2 * d; ++dir) {
      Point q = step(p, dir);
      bool inside = true;
      for (int i = 0; i < d; ++i)
        if (q[i] < -radius || q[i] > radius) inside = false;
      if (inside) P(s, state_of(q)) = 1.0 / (2 * d);
    }
    int axis = 0;
    while (axis < d && p[axis] == radius) {
      p[axis] = -radius;
      ++axis;
    }
    if (axis == d) break;
    ++p[axis];
  }
  return FiniteChain(std::move(P));
}

int boxed_walk_origin_state(int d, int radius) {
  std::int64_t side = 2 * static_cast<std::int64_t>(radius) + 1;
  std::int64_t s = 0;
  for (int i = 0; i < d; ++i) s = s * side + radius;
  return static_cast<int>(s);
}

FiniteChain random_transient_chain(int n_states, RngStream& rng) {
  if (n_states < 1) throw std::invalid_argument("random_transient_chain: n_states < 1");
  // Symmetric (path-reversible) substochastic matrix. The capacity
  // decomposition identity needs the walk's path-reversal symmetry on top of
  // the strong Markov property; asymmetric chains genuinely violate it (see
  // the counterexample test), so the identity testbed draws symmetric chains
  // the way SRW itself is symmetric.
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n_states, n_states);
  double density = 0.2 + 0.6 * rng.uniform01();
  for (int i = 0; i < n_states; ++i)
    for (int j = i; j < n_states; ++j) {
      if (rng.uniform01() > density) continue;
      double w = rng.uniform01();
      P(i, j) = w;
      P(j, i) = w;
    }
  double max_row = 0;
  for (int i = 0; i < n_states; ++i) max_row = std::max(max_row, P.row(i).sum());
  double target = 0.30 + 0.69 * rng.uniform01();  // largest row sum in [0.30, 0.99]
  if (max_row > 0) P *= target / max_row;
  return FiniteChain(std::move(P));
}

FiniteChain load_chain(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_chain: cannot open " + path);
  int n = 0;
  if (!(in >> n) || n < 1) throw std::runtime_error("load_chain: bad header");
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  int i = 0, j = 0;
  double p = 0;
  while (in >> i >> j >> p) {
    if (i < 0 || i >= n || j < 0 || j >= n)
      throw std::runtime_error("load_chain: state out of range");
    P(i, j) = p;
  }
  return FiniteChain(std::move(P));
}

void save_chain(const FiniteChain& chain, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_chain: cannot open " + path);
  int n = chain.n_states();
  out << n << "\n";
  const auto& P = chain.P();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (P(i, j) != 0) out << i << " " << j << " " << P(i, j) << "\n";
}

OracleSuiteResult run_decomposition_suite(int n_chains, int max_states,
                                          int max_subset, int orderings,
                                          RngStream& rng) {
  if (n_chains < 1 || max_states < 2 || max_subset < 1 || orderings < 1)
    throw std::invalid_argument("run_decomposition_suite: bad arguments");
  OracleSuiteResult res;
  for (int c = 0; c < n_chains; ++c) {
    int n = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_states - 1)));
    FiniteChain chain = random_transient_chain(n, rng);
    int subset = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(
                         std::min(max_subset, n))));
    std::vector<int> states(static_cast<size_t>(n));
    std::iota(states.begin(), states.end(), 0);
    // partial Fisher-Yates for a random subset
    for (int k = 0; k < subset; ++k) {
      auto j = k + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - k)));
      std::swap(states[static_cast<size_t>(k)], states[static_cast<size_t>(j)]);
    }
    std::vector<int> chosen(states.begin(), states.begin() + subset);
    double cap = chain.exact_capacity(chosen);
    for (int o = 0; o < orderings; ++o) {
      for (size_t k = 0; k + 1 < chosen.size(); ++k) {
        auto j = k + rng.below(chosen.size() - k);
        std::swap(chosen[k], chosen[j]);
      }
      double dec = chain.exact_decomposition(chosen);
      res.max_deviation = std::max(res.max_deviation, std::fabs(dec - cap));
      ++res.orderings_checked;
    }
    ++res.chains;
  }
  return res;
}

}  // namespace lerwlab
