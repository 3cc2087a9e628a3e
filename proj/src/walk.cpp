#include "lerwlab/walk.hpp"

#include <algorithm>
#include <stdexcept>

namespace lerwlab {

void validate_path(const Path& p) {
  if (p.pts.empty()) throw std::invalid_argument("path: empty");
  if (p.dim < 1 || p.dim > kMaxDim) throw std::invalid_argument("path: bad dimension");
  for (size_t i = 1; i < p.pts.size(); ++i)
    if (l1_norm(sub(p.pts[i], p.pts[i - 1])) != 1)
      throw std::invalid_argument("path: non unit step at index " + std::to_string(i));
}

Path srw_sample(int d, std::int64_t n_steps, RngStream& rng) {
  if (d < 1 || d > kMaxDim) throw std::invalid_argument("srw_sample: bad dimension");
  if (n_steps < 0) throw std::invalid_argument("srw_sample: negative step count");
  Path p;
  p.dim = d;
  p.pts.reserve(static_cast<size_t>(n_steps) + 1);
  Point x = origin();
  p.pts.push_back(x);
  for (std::int64_t i = 0; i < n_steps; ++i) {
    x = step(x, rng.direction(2 * d));
    p.pts.push_back(x);
  }
  return p;
}

LoopEraser::LoopEraser(int d) : d_(d) {
  stack_.reserve(256);
  times_.reserve(256);
  maxn2_.reserve(256);
}

void LoopEraser::feed(const Point& pos) {
  if (const auto* at = index_.find(pos)) {
    // revisit: drop the loop, i.e. everything above the stored index.
    // copy the index first: erase() may relocate the entry at points to
    size_t keep = static_cast<size_t>(*at);
    for (size_t i = keep + 1; i < stack_.size(); ++i) index_.erase(stack_[i]);
    stack_.resize(keep + 1);
    times_.resize(stack_.size());
    maxn2_.resize(stack_.size());
  } else {
    index_.put(pos, static_cast<std::int64_t>(stack_.size()));
    stack_.push_back(pos);
    times_.push_back(t_);
    maxn2_.push_back(std::max(maxn2_.empty() ? 0 : maxn2_.back(), norm2(pos)));
  }
  ++t_;
}

LoopErasedPath LoopEraser::take_prefix(std::int64_t n_pts) const {
  if (n_pts < 1 || static_cast<size_t>(n_pts) > stack_.size())
    throw std::invalid_argument("LoopEraser::take_prefix: bad length");
  LoopErasedPath out;
  out.path.dim = d_;
  out.path.pts.assign(stack_.begin(), stack_.begin() + n_pts);
  out.erasure_times.assign(times_.begin(), times_.begin() + n_pts);
  out.source_length = steps_consumed();
  return out;
}

LoopErasedPath loop_erase(const Path& omega) {
  if (omega.pts.empty()) throw std::invalid_argument("loop_erase: empty path");
  LoopEraser le(omega.dim);
  for (const auto& p : omega.pts) le.feed(p);
  return le.take_prefix(static_cast<std::int64_t>(le.points().size()));
}

std::int64_t retained_count(const LoopErasedPath& lep, std::int64_t j) {
  if (j < 0 || j > lep.source_length)
    throw std::invalid_argument("retained_count: j out of range");
  // erasure_times is strictly increasing: binary search for the last <= j
  const auto& t = lep.erasure_times;
  auto it = std::upper_bound(t.begin(), t.end(), j);
  return static_cast<std::int64_t>(it - t.begin()) - 1;
}

std::vector<std::int64_t> cut_times(const Path& omega) {
  const auto& pts = omega.pts;
  PointTable last;
  for (size_t i = 0; i < pts.size(); ++i)
    last.put(pts[i], static_cast<std::int64_t>(i));
  std::vector<std::int64_t> out;
  std::int64_t running_last = -1;
  for (size_t i = 0; i < pts.size(); ++i) {
    running_last = std::max(running_last, *last.find(pts[i]));
    // n is a cut time iff no point seen so far re-appears after n
    if (running_last == static_cast<std::int64_t>(i))
      out.push_back(static_cast<std::int64_t>(i));
  }
  return out;
}

Path shift_path(const Path& omega, std::int64_t k) {
  if (k < 0 || static_cast<size_t>(k) >= omega.pts.size())
    throw std::invalid_argument("shift_path: shift exceeds path length");
  Path out;
  out.dim = omega.dim;
  out.pts.reserve(omega.pts.size() - static_cast<size_t>(k));
  const Point& base = omega.pts[static_cast<size_t>(k)];
  for (size_t i = static_cast<size_t>(k); i < omega.pts.size(); ++i)
    out.pts.push_back(sub(omega.pts[i], base));
  return out;
}

double cylinder_frequency(const Path& eta, const Path& xi, std::int64_t n) {
  if (xi.pts.empty() || norm2(xi.pts[0]) != 0)
    throw std::invalid_argument("cylinder_frequency: xi must be rooted at the origin");
  std::int64_t m = static_cast<std::int64_t>(xi.pts.size()) - 1;
  if (n < 0 || static_cast<std::int64_t>(eta.pts.size()) < n + m + 1)
    throw std::invalid_argument("cylinder_frequency: path too short for n, m");
  std::int64_t count = 0;
  for (std::int64_t k = 0; k <= n; ++k) {
    bool match = true;
    const Point& base = eta.pts[static_cast<size_t>(k)];
    for (std::int64_t j = 1; j <= m; ++j) {
      if (sub(eta.pts[static_cast<size_t>(k + j)], base) != xi.pts[static_cast<size_t>(j)]) {
        match = false;
        break;
      }
    }
    if (match) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(n + 1);
}

LoopErasedPath lerw_sample(int d, std::int64_t target_len, RngStream& rng,
                           double safety_factor) {
  if (d < 3 || d > kMaxDim)
    throw std::invalid_argument("lerw_sample: requires 3 <= d <= 8 (transience)");
  if (target_len < 1) throw std::invalid_argument("lerw_sample: target_len < 1");
  if (safety_factor < 1) throw std::invalid_argument("lerw_sample: safety_factor < 1");

  LoopEraser le(d);
  Point x = origin();
  le.feed(x);
  std::int64_t want = target_len + 1;
  double freeze_r2 = -1;  // set when the erased path first holds `want` points
  std::int64_t cur_n2 = 0;
  while (true) {
    if (static_cast<std::int64_t>(le.points().size()) >= want) {
      if (freeze_r2 < 0) {
        double r2 = static_cast<double>(le.max_norm2());
        freeze_r2 = safety_factor * safety_factor * std::max(r2, 1.0);
      }
      if (static_cast<double>(cur_n2) > freeze_r2) break;
    } else {
      freeze_r2 = -1;  // a loop ate the prefix; re-arm once we are back
    }
    int dir = rng.direction(2 * d);
    std::int64_t v = x[dir / 2];
    std::int64_t delta = (dir % 2 == 0) ? 1 : -1;
    cur_n2 += 2 * v * delta + 1;
    x[dir / 2] = v + delta;
    le.feed(x);
  }
  return le.take_prefix(want);
}

}  // namespace lerwlab
