// Simple random walk generation, chronological loop erasure with full
// erasure-time bookkeeping, cut times, the shift operator, and cylinder
// frequencies.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lerwlab/lattice.hpp"
#include "lerwlab/rng.hpp"

namespace lerwlab {

// Finite nearest-neighbor path: consecutive points at L1 distance 1.
struct Path {
  int dim = 3;
  std::vector<Point> pts;

  size_t len() const { return pts.empty() ? 0 : pts.size() - 1; }  // step count
  size_t n_points() const { return pts.size(); }
};

// Checks the unit-step property; throws on violation or empty path.
void validate_path(const Path& p);

// Self-avoiding path together with the erasure times of its generator:
// pts[i] == source[times[i]], times[0] == 0, times strictly increasing.
struct LoopErasedPath {
  Path path;
  std::vector<std::int64_t> erasure_times;
  std::int64_t source_length = 0;  // steps of the generating walk consumed
};

// Walk of n_steps unit steps from the origin, each direction uniform over
// the 2d directions in neighbor order; consumes exactly n_steps draws.
Path srw_sample(int d, std::int64_t n_steps, RngStream& rng);

// Chronological loop erasure of a finite path (online, expected O(length)).
// Errors on empty input.
LoopErasedPath loop_erase(const Path& omega);

// Number of generator points up to time j that survive erasure:
// max{i : erasure_times[i] <= j}. Errors if j is outside [0, source_length].
std::int64_t retained_count(const LoopErasedPath& lep, std::int64_t j);

// All n with pts[0..n] disjoint from pts[n+1..end]; O(length) expected.
std::vector<std::int64_t> cut_times(const Path& omega);

// The re-rooted shift: result(i) = omega(i+k) - omega(k). Errors if
// k >= number of points.
Path shift_path(const Path& omega, std::int64_t k);

// Fraction of k in [0,n] whose m-step window of increments matches xi
// (xi rooted at the origin). Errors when eta is too short or xi is unrooted.
double cylinder_frequency(const Path& eta, const Path& xi, std::int64_t n);

// Samples the first target_len steps of an infinite-walk loop erasure for
// d >= 3. The generator keeps walking, with online erasure, until the erased
// path holds target_len+1 points AND the walker has left the ball of radius
// safety_factor * (max radius of the erased path when the target was first
// reached); only then is the prefix frozen. Later loops could still have
// erased a frozen prefix with probability O(safety_factor^{2-d}); this
// residual truncation bias is the documented price of a finite-horizon
// sampler, and safety_factor is exposed for that reason.
LoopErasedPath lerw_sample(int d, std::int64_t target_len, RngStream& rng,
                           double safety_factor = 3.0);

// Online loop-erasure state machine, exposed for samplers that need to watch
// the erased path grow (two-sided sampling, escape estimators).
class LoopEraser {
 public:
  explicit LoopEraser(int d);

  // Feed the next walk position; pos must be a unit step from the previous
  // feed (unchecked here, the samplers guarantee it).
  void feed(const Point& pos);

  const std::vector<Point>& points() const { return stack_; }
  const std::vector<std::int64_t>& times() const { return times_; }
  std::int64_t steps_consumed() const { return t_ - 1; }
  // Prefix maximum of squared norms over the current erased path.
  std::int64_t max_norm2() const { return maxn2_.empty() ? 0 : maxn2_.back(); }

  LoopErasedPath take_prefix(std::int64_t n_pts) const;

 private:
  int d_;
  std::int64_t t_ = 0;
  std::vector<Point> stack_;
  std::vector<std::int64_t> times_;
  std::vector<std::int64_t> maxn2_;
  PointTable index_;
};

}  // namespace lerwlab
