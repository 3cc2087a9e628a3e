#include "lerwlab/lattice.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace lerwlab {

bool sausage_contains(const std::vector<Point>& a, double eps, const Point& z) {
  if (a.empty()) throw std::invalid_argument("sausage_contains: empty set");
  if (eps < 0) throw std::invalid_argument("sausage_contains: eps < 0");
  double eps2 = eps * eps;
  for (const auto& p : a)
    if (static_cast<double>(dist2(p, z)) <= eps2) return true;
  return false;
}

SausageIndex::SausageIndex(const std::vector<Point>& pts, int d, double eps)
    : pts_(pts), d_(d), eps_(eps), eps2_(eps * eps) {
  if (pts_.empty()) throw std::invalid_argument("SausageIndex: empty anchor set");
  if (eps < 0) throw std::invalid_argument("SausageIndex: eps < 0");
  if (d < 1 || d > kMaxDim) throw std::invalid_argument("SausageIndex: bad dimension");
  cell_ = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(eps)) + 1);
  reach_ = 1;  // eps < cell_, so anchors within eps live in adjacent cells
  std::int64_t m = 0;
  for (const auto& p : pts_) m = std::max(m, norm2(p));
  anchor_radius_ = std::sqrt(static_cast<double>(m));

  // two-pass CSR bucket build
  std::vector<Point> cells(pts_.size());
  for (size_t i = 0; i < pts_.size(); ++i) {
    cells[i] = cell_index(pts_[i]);
    if (auto* v = cell_of_.find(cells[i]))
      ++*v;
    else
      cell_of_.put(cells[i], 1);
  }
  // assign ordinals and prefix offsets
  bucket_start_.clear();
  std::uint32_t offset = 0;
  std::vector<std::pair<Point, std::uint32_t>> counts;
  for (size_t i = 0; i < pts_.size(); ++i) {
    auto* v = cell_of_.find(cells[i]);
    if (*v > 0) {  // first time we see this cell
      counts.emplace_back(cells[i], static_cast<std::uint32_t>(*v));
      *v = -static_cast<std::int64_t>(counts.size());  // ordinal, negated
    }
  }
  bucket_start_.resize(counts.size() + 1, 0);
  for (size_t k = 0; k < counts.size(); ++k) {
    bucket_start_[k] = offset;
    offset += counts[k].second;
  }
  bucket_start_[counts.size()] = offset;
  bucket_items_.resize(pts_.size());
  std::vector<std::uint32_t> cursor(counts.size(), 0);
  for (size_t i = 0; i < pts_.size(); ++i) {
    auto ord = static_cast<size_t>(-*cell_of_.find(cells[i]) - 1);
    bucket_items_[bucket_start_[ord] + cursor[ord]++] = static_cast<std::uint32_t>(i);
  }
}

Point SausageIndex::cell_index(const Point& z) const {
  Point c;
  for (int i = 0; i < d_; ++i) {
    std::int64_t v = z[i];
    // floor division
    c[i] = v >= 0 ? v / cell_ : -((-v + cell_ - 1) / cell_);
  }
  return c;
}

bool SausageIndex::contains(const Point& z) const {
  // cheap reject: outside the enclosing ball
  double zr = euclidean_norm(z);
  if (zr > anchor_radius_ + eps_ + 1e-12) return false;

  Point base = cell_index(z);
  Point probe = base;
  // walk the (2*reach+1)^d cell neighborhood
  std::array<int, kMaxDim> off{};
  for (int i = 0; i < d_; ++i) off[static_cast<size_t>(i)] = -reach_;
  while (true) {
    for (int i = 0; i < d_; ++i) probe[i] = base[i] + off[static_cast<size_t>(i)];
    if (const auto* v = cell_of_.find(probe)) {
      auto ord = static_cast<size_t>(-*v - 1);
      for (std::uint32_t k = bucket_start_[ord]; k < bucket_start_[ord + 1]; ++k) {
        if (static_cast<double>(dist2(pts_[bucket_items_[k]], z)) <= eps2_)
          return true;
      }
    }
    int axis = 0;
    while (axis < d_ && off[static_cast<size_t>(axis)] == reach_) {
      off[static_cast<size_t>(axis)] = -reach_;
      ++axis;
    }
    if (axis == d_) break;
    ++off[static_cast<size_t>(axis)];
  }
  return false;
}

std::string format_point(const Point& p, int d) {
  std::string out;
  for (int i = 0; i < d; ++i) {
    if (i) out.push_back(',');
    out += std::to_string(p[i]);
  }
  return out;
}

Point parse_point(const std::string& line, int d) {
  Point p;
  const char* cur = line.data();
  const char* end = line.data() + line.size();
  for (int i = 0; i < d; ++i) {
    while (cur < end && (*cur == ' ' || *cur == '\t')) ++cur;
    std::int64_t v = 0;
    auto res = std::from_chars(cur, end, v);
    if (res.ec != std::errc{})
      throw std::invalid_argument("parse_point: bad coordinate in '" + line + "'");
    p[i] = v;
    cur = res.ptr;
    while (cur < end && (*cur == ' ' || *cur == '\t')) ++cur;
    if (i + 1 < d) {
      if (cur >= end || *cur != ',')
        throw std::invalid_argument("parse_point: expected " + std::to_string(d) +
                                    " coordinates in '" + line + "'");
      ++cur;
    }
  }
  if (cur != end)
    throw std::invalid_argument("parse_point: trailing characters in '" + line + "'");
  return p;
}

}  // namespace lerwlab
