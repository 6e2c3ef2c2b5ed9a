#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "boxmon/error.hpp"

namespace boxmon {

/// A feature vector (activations of one monitored layer). Coordinates must be finite.
using Vector = std::vector<double>;

/// Points are stored by value and referenced by index everywhere else.
using PointSet = std::vector<Vector>;

inline void require_finite(std::span<const double> coords) {
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (!std::isfinite(coords[i])) {
      throw Error(ErrorCode::NonFiniteValue, "coordinate " + std::to_string(i) + " is not finite");
    }
  }
}

inline void require_same_dim(std::size_t expected, std::size_t actual) {
  if (expected != actual) {
    throw Error(ErrorCode::DimensionMismatch,
                "expected dimension " + std::to_string(expected) + ", got " + std::to_string(actual));
  }
}

/// Closed real interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  constexpr double length() const noexcept { return hi - lo; }
  constexpr bool degenerate() const noexcept { return lo == hi; }
  constexpr bool contains(double x) const noexcept { return lo <= x && x <= hi; }

  friend constexpr bool operator==(const Interval&, const Interval&) = default;
};

/// Axis-aligned box: one closed interval per dimension. Degenerate intervals are allowed.
class Box {
 public:
  Box() = default;

  explicit Box(std::vector<Interval> intervals) : intervals_(std::move(intervals)) {
    if (intervals_.empty()) {
      throw Error(ErrorCode::InvalidBox, "a box needs at least one dimension");
    }
    for (std::size_t i = 0; i < intervals_.size(); ++i) {
      const auto& iv = intervals_[i];
      if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi)) {
        throw Error(ErrorCode::NonFiniteValue, "bound on dimension " + std::to_string(i) + " is not finite");
      }
      if (iv.lo > iv.hi) {
        throw Error(ErrorCode::InvalidBox, "lower bound exceeds upper bound on dimension " + std::to_string(i));
      }
    }
  }

  /// Degenerate box equal to a single point.
  static Box point(std::span<const double> v) {
    std::vector<Interval> ivs;
    ivs.reserve(v.size());
    for (double x : v) ivs.push_back({x, x});
    return Box(std::move(ivs));
  }

  std::size_t dim() const noexcept { return intervals_.size(); }
  const Interval& operator[](std::size_t i) const { return intervals_[i]; }
  const std::vector<Interval>& intervals() const noexcept { return intervals_; }

  bool contains(std::span<const double> v) const {
    require_same_dim(dim(), v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!intervals_[i].contains(v[i])) return false;
    }
    return true;
  }

  friend bool operator==(const Box&, const Box&) = default;

 private:
  std::vector<Interval> intervals_;
};

/// Tight box abstraction of the points selected by `indices`: per-dimension [min, max].
inline Box box_of(std::span<const Vector> points, std::span<const std::size_t> indices) {
  if (indices.empty()) throw Error(ErrorCode::EmptyPointSet, "cannot abstract an empty point set");
  const Vector& first = points[indices.front()];
  if (first.empty()) throw Error(ErrorCode::DimensionMismatch, "points must have at least one dimension");
  std::vector<Interval> ivs;
  ivs.reserve(first.size());
  for (double x : first) ivs.push_back({x, x});
  for (std::size_t idx : indices) {
    const Vector& p = points[idx];
    require_same_dim(ivs.size(), p.size());
    require_finite(p);
    for (std::size_t i = 0; i < p.size(); ++i) {
      ivs[i].lo = std::min(ivs[i].lo, p[i]);
      ivs[i].hi = std::max(ivs[i].hi, p[i]);
    }
  }
  return Box(std::move(ivs));
}

inline Box box_of(std::span<const Vector> points) {
  std::vector<std::size_t> all(points.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return box_of(points, all);
}

inline bool contains(const Box& b, std::span<const double> v) { return b.contains(v); }

/// Closed-box intersection; touching faces give a degenerate box, disjoint boxes give nullopt.
inline std::optional<Box> intersect(const Box& a, const Box& b) {
  require_same_dim(a.dim(), b.dim());
  std::vector<Interval> ivs(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) {
    ivs[i] = {std::max(a[i].lo, b[i].lo), std::min(a[i].hi, b[i].hi)};
    if (ivs[i].lo > ivs[i].hi) return std::nullopt;
  }
  return Box(std::move(ivs));
}

inline bool is_subbox(const Box& inner, const Box& outer) {
  require_same_dim(outer.dim(), inner.dim());
  for (std::size_t i = 0; i < inner.dim(); ++i) {
    if (inner[i].lo < outer[i].lo || inner[i].hi > outer[i].hi) return false;
  }
  return true;
}

}  // namespace boxmon
