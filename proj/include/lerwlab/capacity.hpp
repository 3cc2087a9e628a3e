// Monte Carlo capacity machinery on Z^d: escape-probability estimation with
// truncation brackets, three capacity estimators (escape-sum, product
// decomposition, hitting/Green), Green's function estimates, harmonic-measure
// sampling, and sausage capacity.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lerwlab/lattice.hpp"
#include "lerwlab/parallel.hpp"
#include "lerwlab/rng.hpp"
#include "lerwlab/walk.hpp"

#include "json.hpp"

namespace lerwlab {

// Asymptotic Green's constant: G_d(0,y) ~ green_asymptotic_coeff(d) *
// ||y||^(2-d). (d/2) * pi^(-d/2) * Gamma(d/2 - 1), shipped for d in [3,8].
double green_asymptotic_coeff(int d);

// Bracket constant for return-from-radius-R corrections: the measured
// per-point return coefficient (green_asymptotic_coeff / G_d(0,0)) padded by
// a 2.5x safety factor so that truncation brackets stay honest against MC
// noise. See tests for the calibration cross-check.
double truncation_bracket_coeff(int d);

struct EscapeEstimate {
  double lower = 0;
  double upper = 0;
  std::int64_t trials = 0;
  double truncation_radius = 0;

  double midpoint() const { return 0.5 * (lower + upper); }
  // Binomial standard error of the success fraction.
  double stderr_upper() const;
};

// Point estimate with full provenance; stderr is the sample standard
// deviation of the declared estimator divided by sqrt(trials).
struct EstimateRecord {
  double value = 0;
  double stderr_value = 0;
  std::int64_t trials = 0;
  std::string method;  // escape_sum | decomposition | hitting_green | ...
  nlohmann::json params;
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;
  double wall_seconds = 0;

  nlohmann::json to_json() const;
  std::string csv_row() const;  // method,value,stderr,trials,R,seed,wall_time
};

struct GreenEstimate {
  Point y;
  double value = 0;
  double stderr_value = 0;
  std::string method;  // monte_carlo | asymptotic
};

// Options shared by the walk-based estimators.
struct McOptions {
  int threads = 0;            // 0 = default_thread_count()
  std::uint64_t block = kDefaultBlock;
};

// P_a(walk never revisits A before leaving B(0,R)), bracketed.
// upper = success fraction; lower = upper * (1 - c_d |A| R^(2-d)) clamped,
// covering returns from beyond the truncation sphere. Requires a in A,
// R > 2 * radius(A) and trials >= 1.
EscapeEstimate escape_probability_mc(const PointSet& a_set, const Point& a,
                                     int d, double R, std::int64_t trials,
                                     const RngStream& rng,
                                     const McOptions& opt = {});

// Sum of escape midpoints over all members of A.
EstimateRecord capacity_mc(const PointSet& a_set, int d, double R,
                           std::int64_t trials_per_point, const RngStream& rng,
                           const McOptions& opt = {});

// Ordered product form: sum_k esc(prefix including x_k, from x_k) *
// esc(prefix excluding x_k, from x_k); factors estimated independently,
// empty-set escape = 1 exactly.
EstimateRecord capacity_decomposition_mc(const std::vector<Point>& ordered,
                                         int d, double R,
                                         std::int64_t trials_per_point,
                                         const RngStream& rng,
                                         const McOptions& opt = {});

// Green's function estimate. monte_carlo: expected visits to y by a walk from
// the origin, killed on leaving a sphere well beyond ||y||, plus the expected
// residual C_d ||exit - y||^(2-d) so the truncation is corrected to first
// order. asymptotic: C_d ||y||^(2-d) (errors at y = 0).
GreenEstimate green_estimate(int d, const Point& y, const std::string& method,
                             std::int64_t trials, const RngStream& rng,
                             const McOptions& opt = {});

// Abstract membership target for hitting-based estimation. Implementations
// must be safe for concurrent const use.
class HitTarget {
 public:
  virtual ~HitTarget() = default;
  virtual bool contains(const Point& z) const = 0;
  virtual double radius() const = 0;
  // Anchors for the far-field Green average (the set's points, or the
  // sausage's anchor path).
  virtual const std::vector<Point>& anchors() const = 0;
};

class PointSetTarget : public HitTarget {
 public:
  explicit PointSetTarget(const PointSet& s) : set_(s) {}
  bool contains(const Point& z) const override { return set_.contains(z); }
  double radius() const override { return set_.radius(); }
  const std::vector<Point>& anchors() const override { return set_.points(); }

 private:
  const PointSet& set_;
};

class SausageTarget : public HitTarget {
 public:
  SausageTarget(const std::vector<Point>& anchor_path, int d, double eps)
      : index_(anchor_path, d, eps) {}
  bool contains(const Point& z) const override { return index_.contains(z); }
  double radius() const override { return index_.radius(); }
  const std::vector<Point>& anchors() const override { return index_.anchor_points(); }

 private:
  SausageIndex index_;
};

// Far-field hitting estimator of capacity:
//   cap(A) = lim_{||y|| -> inf} P_y(hit A) / G(0,y).
// Walks start near the sphere of radius y_radius (uniform direction, rounded
// to the lattice) and are killed on leaving kill_factor * y_radius. The
// estimator is the ratio  sum(hits) / sum(G_bar(y) - [miss] G_bar(exit)),
// with G_bar the anchor-averaged asymptotic Green value; the subtracted term
// corrects the kill-sphere truncation to first order. Requires
// y_radius > 2 * radius(A).
EstimateRecord capacity_via_hitting(const HitTarget& target, int d,
                                    double y_radius, std::int64_t trials,
                                    const RngStream& rng,
                                    double kill_factor = 10.0,
                                    const McOptions& opt = {});

// capacity_via_hitting against the eps-sausage of a path; the sausage is
// queried through a spatial index, never materialized.
EstimateRecord sausage_capacity_mc(const Path& eta_prefix, double eps,
                                   double y_radius, std::int64_t trials,
                                   const RngStream& rng,
                                   double kill_factor = 10.0,
                                   const McOptions& opt = {});

// One attempt at sampling the harmonic measure of B: walk from the far
// sphere, return the first point of B hit, or nullopt when the walk reaches
// the kill sphere first (caller retries).
std::optional<Point> harmonic_measure_sample(const PointSet& b, int d,
                                             double y_radius, RngStream& rng,
                                             double kill_factor = 10.0);

// Uniform-direction lattice start near the sphere of radius r.
Point far_sphere_start(int d, double r, RngStream& rng);

// Single escape trial: true iff the walk from `start` leaves B(0,R) before
// revisiting the target at time >= 1. Exposed for estimators that share
// trial RNG streams across nested sets (pathwise monotonicity).
bool escape_trial(const HitTarget& target, const Point& start, int d,
                  double R, RngStream& rng);

}  // namespace lerwlab
