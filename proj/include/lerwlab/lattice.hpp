// Geometry and indexing of Z^d: points, neighbor enumeration, norms,
// sausage membership, and insertion-ordered point sets with O(1) lookup.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace lerwlab {

// Dimensions 1..kMaxDim are supported; samplers additionally require d >= 3.
inline constexpr int kMaxDim = 8;

// A site of Z^d. Coordinates are 64-bit signed integers; entries beyond the
// ambient dimension stay zero so equality and hashing ignore the dimension.
struct Point {
  std::array<std::int64_t, kMaxDim> c{};

  friend bool operator==(const Point& a, const Point& b) { return a.c == b.c; }
  friend bool operator!=(const Point& a, const Point& b) { return !(a == b); }

  std::int64_t& operator[](int i) { return c[static_cast<size_t>(i)]; }
  std::int64_t operator[](int i) const { return c[static_cast<size_t>(i)]; }
};

inline Point origin() { return Point{}; }

// k-th unit vector (0-based axis).
inline Point unit(int axis) {
  Point p;
  p[axis] = 1;
  return p;
}

inline Point add(const Point& a, const Point& b) {
  Point r;
  for (int i = 0; i < kMaxDim; ++i) r[i] = a[i] + b[i];
  return r;
}

inline Point sub(const Point& a, const Point& b) {
  Point r;
  for (int i = 0; i < kMaxDim; ++i) r[i] = a[i] - b[i];
  return r;
}

inline std::int64_t norm2(const Point& p) {
  std::int64_t s = 0;
  for (int i = 0; i < kMaxDim; ++i) s += p[i] * p[i];
  return s;
}

inline std::int64_t dist2(const Point& a, const Point& b) {
  std::int64_t s = 0;
  for (int i = 0; i < kMaxDim; ++i) {
    std::int64_t d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline double euclidean_norm(const Point& p) {
  return std::sqrt(static_cast<double>(norm2(p)));
}

inline std::int64_t l1_norm(const Point& p) {
  std::int64_t s = 0;
  for (int i = 0; i < kMaxDim; ++i) s += p[i] < 0 ? -p[i] : p[i];
  return s;
}

// Direction indices are fixed as (+e1, -e1, +e2, -e2, ...): axis = dir/2,
// sign = +1 for even dir. RNG-driven walks depend on this order being stable.
inline Point step(const Point& p, int dir) {
  Point r = p;
  r[dir / 2] += (dir % 2 == 0) ? 1 : -1;
  return r;
}

// The 2d nearest neighbors of p, in direction-index order.
inline std::vector<Point> neighbors(const Point& p, int d) {
  if (d < 1 || d > kMaxDim) throw std::invalid_argument("neighbors: bad dimension");
  std::vector<Point> out;
  out.reserve(static_cast<size_t>(2 * d));
  for (int dir = 0; dir < 2 * d; ++dir) out.push_back(step(p, dir));
  return out;
}

inline std::uint64_t hash_point(const Point& p) {
  // splitmix-style avalanche folded over the coordinates
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (int i = 0; i < kMaxDim; ++i) {
    std::uint64_t x = static_cast<std::uint64_t>(p[i]) + h;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    h = x ^ (x >> 31);
  }
  return h;
}

// Open-addressing map Point -> int64 with backward-shift deletion.
// Used in hot loops (loop erasure, membership tests), so no std::unordered_map.
class PointTable {
 public:
  explicit PointTable(size_t expected = 16) { rehash(capacity_for(expected)); }

  void clear() {
    std::fill(state_.begin(), state_.end(), 0);
    size_ = 0;
  }

  size_t size() const { return size_; }

  // Returns pointer to value or nullptr.
  std::int64_t* find(const Point& p) {
    std::uint64_t h = hash_point(p);
    size_t i = static_cast<size_t>(h) & mask_;
    while (state_[i]) {
      if (hashes_[i] == h && keys_[i] == p) return &vals_[i];
      i = (i + 1) & mask_;
    }
    return nullptr;
  }

  const std::int64_t* find(const Point& p) const {
    return const_cast<PointTable*>(this)->find(p);
  }

  bool contains(const Point& p) const { return find(p) != nullptr; }

  // Inserts or overwrites.
  void put(const Point& p, std::int64_t v) {
    if ((size_ + 1) * 8 > mask_ * 7) rehash((mask_ + 1) * 2);
    std::uint64_t h = hash_point(p);
    size_t i = static_cast<size_t>(h) & mask_;
    while (state_[i]) {
      if (hashes_[i] == h && keys_[i] == p) {
        vals_[i] = v;
        return;
      }
      i = (i + 1) & mask_;
    }
    state_[i] = 1;
    hashes_[i] = h;
    keys_[i] = p;
    vals_[i] = v;
    ++size_;
  }

  void erase(const Point& p) {
    std::uint64_t h = hash_point(p);
    size_t i = static_cast<size_t>(h) & mask_;
    while (state_[i]) {
      if (hashes_[i] == h && keys_[i] == p) {
        remove_at(i);
        return;
      }
      i = (i + 1) & mask_;
    }
  }

 private:
  static size_t capacity_for(size_t expected) {
    size_t cap = 16;
    while (cap < expected * 2) cap <<= 1;
    return cap;
  }

  void remove_at(size_t i) {
    // backward-shift deletion keeps probe chains intact without tombstones
    size_t j = i;
    while (true) {
      state_[i] = 0;
      while (true) {
        j = (j + 1) & mask_;
        if (!state_[j]) {
          --size_;
          return;
        }
        size_t home = static_cast<size_t>(hashes_[j]) & mask_;
        // can slot j legally move to i?
        if (i <= j ? (home <= i || home > j) : (home <= i && home > j)) break;
      }
      state_[i] = 1;
      hashes_[i] = hashes_[j];
      keys_[i] = keys_[j];
      vals_[i] = vals_[j];
      i = j;
    }
  }

  void rehash(size_t cap) {
    std::vector<char> os;
    std::vector<std::uint64_t> oh;
    std::vector<Point> ok;
    std::vector<std::int64_t> ov;
    os.swap(state_);
    oh.swap(hashes_);
    ok.swap(keys_);
    ov.swap(vals_);
    state_.assign(cap, 0);
    hashes_.assign(cap, 0);
    keys_.assign(cap, Point{});
    vals_.assign(cap, 0);
    mask_ = cap - 1;
    size_ = 0;
    for (size_t i = 0; i < os.size(); ++i)
      if (os[i]) put(ok[i], ov[i]);
  }

  std::vector<char> state_;
  std::vector<std::uint64_t> hashes_;
  std::vector<Point> keys_;
  std::vector<std::int64_t> vals_;
  size_t mask_ = 0;
  size_t size_ = 0;
};

// Finite set of lattice points; keeps insertion order, rejects duplicates,
// answers membership in expected O(1).
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(const std::vector<Point>& pts) {
    for (const auto& p : pts) insert(p);
  }

  // Returns false if p was already present.
  bool insert(const Point& p) {
    if (table_.contains(p)) return false;
    table_.put(p, static_cast<std::int64_t>(points_.size()));
    points_.push_back(p);
    return true;
  }

  bool contains(const Point& p) const { return table_.contains(p); }
  size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const std::vector<Point>& points() const { return points_; }
  const Point& operator[](size_t i) const { return points_[i]; }

  // Largest Euclidean norm over members (0 for empty).
  double radius() const {
    std::int64_t m = 0;
    for (const auto& p : points_) m = std::max(m, norm2(p));
    return std::sqrt(static_cast<double>(m));
  }

  std::int64_t max_norm2() const {
    std::int64_t m = 0;
    for (const auto& p : points_) m = std::max(m, norm2(p));
    return m;
  }

 private:
  std::vector<Point> points_;
  PointTable table_;
};

// True iff min_{a in A} ||z - a|| <= eps. Errors on empty A: the sausage of
// the empty set is undefined.
bool sausage_contains(const std::vector<Point>& a, double eps, const Point& z);

// Spatial grid over a fixed point list for repeated sausage membership
// queries; the sausage itself is never materialized.
class SausageIndex {
 public:
  SausageIndex(const std::vector<Point>& pts, int d, double eps);

  bool contains(const Point& z) const;
  double eps() const { return eps_; }
  int dim() const { return d_; }
  const std::vector<Point>& anchor_points() const { return pts_; }
  double radius() const { return anchor_radius_ + eps_; }

 private:
  Point cell_index(const Point& z) const;

  std::vector<Point> pts_;
  int d_;
  double eps_;
  double eps2_;
  std::int64_t cell_;  // cell edge, >= 1
  int reach_;          // how many cells out a query must look
  double anchor_radius_ = 0;
  PointTable cell_of_;               // cell key -> start index in bucket_data_
  std::vector<std::uint32_t> bucket_start_;
  std::vector<std::uint32_t> bucket_items_;  // indices into pts_
};

// Serialization: a point is comma-separated integers, a path is one point
// per line.
std::string format_point(const Point& p, int d);
Point parse_point(const std::string& line, int d);

}  // namespace lerwlab
