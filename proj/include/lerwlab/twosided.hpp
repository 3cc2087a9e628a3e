// Two-sided LERW samplers and the scaled escape-probability estimators, plus
// stationarity / ergodicity diagnostics for the shift operator.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lerwlab/capacity.hpp"
#include "lerwlab/walk.hpp"

#include "json.hpp"

namespace lerwlab {

// Bi-directional self-avoiding path rooted at the origin; forward and
// backward sides meet only there.
struct TwoSidedPath {
  LoopErasedPath forward;
  LoopErasedPath backward;
};

struct WeightedSample {
  LoopErasedPath path;
  double weight = 0;  // importance weight, >= 0
};

struct AcceptanceStats {
  std::int64_t attempts = 0;
  std::int64_t accepted = 0;
  // Fraction of accepted samples whose radius-extended walks violated the
  // non-intersection condition after the horizon: an honest upper bound on
  // the truncation bias of the finite-horizon acceptance rule.
  std::int64_t extension_violations = 0;

  double acceptance_rate() const {
    return attempts ? static_cast<double>(accepted) / static_cast<double>(attempts) : 0.0;
  }
};

// The acceptance predicate of the rejection sampler, exposed as a pure
// function so exhaustive small-horizon enumeration can check it: the loop
// erasure of s1 must avoid s2[1..] from index 1 on, and the two loop
// erasures may meet only at the origin.
bool two_sided_accepts(const Path& s1, const Path& s2);

// Rejection sampler for the conditioned pair in d >= 5: draws independent
// walks to `horizon`, accepts on two_sided_accepts, then trims both
// loop-erased sides to side_len points each (too-short erasures count as
// rejections). Accepted pairs are extended to 3x their radius to measure the
// post-horizon violation rate (see AcceptanceStats). Requires
// horizon >= side_len.
TwoSidedPath two_sided_sample_highdim(int d, std::int64_t side_len,
                                      std::int64_t horizon, RngStream& rng,
                                      AcceptanceStats* stats = nullptr);

enum class EscapeScalingVariant {
  kWalkTruncated,  // n-step walk against the full sampled path
  kPathTruncated,  // kill-radius walk against the n-point prefix
};

// (log n)^{1/3} times the fraction of w_trials independent walks from the
// origin avoiding the loop-erased path, the path held fixed across trials.
// kWalkTruncated runs the walk n steps against all sampled points of eta;
// kPathTruncated runs the walk to the kill radius (10x prefix radius)
// against eta[0,n] and also reports a truncation bracket. Requires n >= 2
// (the log^(1/3) scaling is meaningless at n = 1) and d = 4 for the scaling
// to be the interesting one, though the estimator runs in any d >= 3.
struct ScaledEscape {
  double value = 0;        // scaled midpoint
  double lower = 0, upper = 0;
  double unscaled = 0;     // success fraction
  std::int64_t trials = 0;
};

ScaledEscape scaled_escape_estimate(const LoopErasedPath& eta, std::int64_t n,
                                    std::int64_t w_trials,
                                    EscapeScalingVariant variant,
                                    const RngStream& rng,
                                    const McOptions& opt = {});

// The pair (incl, excl): scaled non-intersection of a kill-radius walk with
// the forward side's [0,n] window (incl) and [1,n] window (excl), evaluated
// on the same walks so incl <= excl pathwise.
struct ScaledEscapePair {
  ScaledEscape incl_origin;  // window [0,n]
  ScaledEscape excl_origin;  // window [1,n]
};

ScaledEscapePair two_sided_scaled_escape(const LoopErasedPath& forward_side,
                                         std::int64_t n, std::int64_t w_trials,
                                         const RngStream& rng,
                                         const McOptions& opt = {});

// Finite-n importance-weighted stand-in for the d = 4 two-sided law: a plain
// loop-erased sample weighted by its scaled escape probability at order
// n_weight. Downstream averages must self-normalize; the proxy order is part
// of the provenance.
WeightedSample d4_weighted_two_sided(std::int64_t side_len,
                                     std::int64_t n_weight,
                                     std::int64_t w_trials, RngStream& rng,
                                     const McOptions& opt = {});

// Effective sample size of self-normalized weights.
double effective_sample_size(const std::vector<double>& weights);

// Shift-invariance diagnostic for d = 5: for each k, draws two independent
// batches of conditioned samples and compares the 2-step increment cylinder
// law at the origin of one batch against the law at index k of the other via
// a two-sample chi-square.
struct StationarityReport {
  std::vector<std::int64_t> k_shifts;
  std::vector<double> p_values;
  std::vector<double> statistics;
  std::int64_t samples_per_batch = 0;
  nlohmann::json to_json() const;
};

StationarityReport stationarity_diagnostic(int d, std::int64_t n_samples,
                                           const std::vector<std::int64_t>& k_shifts,
                                           std::int64_t horizon, RngStream& rng);

// Ergodicity witness: cross-sample variance of cylinder frequencies H^n(xi)
// along independent one-sided samples should decay like 1/n; reports the
// log-log regression slope.
struct ErgodicDecayReport {
  std::vector<std::int64_t> n_ladder;
  std::vector<double> variances;
  double slope = 0;
  nlohmann::json to_json() const;
};

ErgodicDecayReport ergodic_variance_decay(int d, const Path& xi,
                                          const std::vector<std::int64_t>& n_ladder,
                                          int n_samples, RngStream& rng);

}  // namespace lerwlab
