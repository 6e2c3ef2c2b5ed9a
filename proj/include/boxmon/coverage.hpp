#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "boxmon/error.hpp"
#include "boxmon/geometry.hpp"

namespace boxmon {

/// The global box restricted to its non-degenerate dimensions.
struct CoveredSpace {
  Box base;
  std::vector<std::size_t> kept_dims;

  std::size_t effective_dim() const noexcept { return kept_dims.size(); }
};

inline CoveredSpace covered_space(const Box& global) {
  CoveredSpace space{global, {}};
  for (std::size_t i = 0; i < global.dim(); ++i) {
    if (!global[i].degenerate()) space.kept_dims.push_back(i);
  }
  return space;
}

namespace detail {

constexpr std::uint64_t kExactLimit = std::uint64_t{1} << 53;

// resolution^exp, or nullopt when it does not fit in 64 bits.
inline std::optional<std::uint64_t> checked_pow(std::uint64_t base, std::size_t exp) {
  std::uint64_t acc = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (base != 0 && acc > std::numeric_limits<std::uint64_t>::max() / base) return std::nullopt;
    acc *= base;
  }
  return acc;
}

}  // namespace detail

/// Covered space subdivided into `resolution` equal slices per kept dimension.
///
/// Cell j (1-based) on a kept dimension spans (a + (j-1)w, a + jw], except the first
/// cell which also holds a itself. A coordinate is mapped to its cell by cell_index().
class ResolutionGrid {
 public:
  ResolutionGrid(CoveredSpace space, std::uint64_t resolution)
      : space_(std::move(space)), resolution_(resolution) {
    if (resolution_ == 0) throw Error(ErrorCode::InvalidArgument, "resolution must be positive");
    total_cells_ = detail::checked_pow(resolution_, space_.effective_dim());
  }

  ResolutionGrid(const Box& global, std::uint64_t resolution) : ResolutionGrid(covered_space(global), resolution) {}

  const CoveredSpace& space() const noexcept { return space_; }
  std::uint64_t resolution() const noexcept { return resolution_; }

  /// resolution^effective_dim, nullopt if it overflows 64 bits.
  std::optional<std::uint64_t> total_cells() const noexcept { return total_cells_; }

  /// Position of x on kept dimension `dim` in cell units, snapped to an integer when within
  /// 1e-12 relative of one.
  double grid_coordinate(std::size_t dim, double x) const {
    const Interval& g = space_.base[dim];
    double t = static_cast<double>(resolution_) * (x - g.lo) / g.length();
    double nearest = std::round(t);
    if (std::abs(t - nearest) <= 1e-12 * std::max(1.0, std::abs(nearest))) t = nearest;
    return t;
  }

  /// 1-based cell index of x on kept dimension `dim`: max(1, ceil(grid_coordinate)).
  std::uint64_t cell_index(std::size_t dim, double x) const {
    double c = std::ceil(grid_coordinate(dim, x));
    if (c < 1.0) return 1;
    if (c > static_cast<double>(resolution_)) return resolution_;
    return static_cast<std::uint64_t>(c);
  }

  void require_subbox(const Box& sub) const {
    require_same_dim(space_.base.dim(), sub.dim());
    if (!is_subbox(sub, space_.base)) {
      throw Error(ErrorCode::NotASubBox, "box exceeds the global box");
    }
  }

  /// Number of cells covered on each kept dimension (in kept_dims order).
  std::vector<std::uint64_t> cells_per_dim(const Box& sub) const {
    require_subbox(sub);
    std::vector<std::uint64_t> n;
    n.reserve(space_.effective_dim());
    for (std::size_t d : space_.kept_dims) {
      const Interval& iv = sub[d];
      if (iv.degenerate()) {
        n.push_back(1);
      } else {
        n.push_back(cell_index(d, iv.hi) - cell_index(d, iv.lo) + 1);
      }
    }
    return n;
  }

 private:
  CoveredSpace space_;
  std::uint64_t resolution_;
  std::optional<std::uint64_t> total_cells_;
};

/// |CovCell(sub)|: product over kept dimensions of the number of slices the sub-box touches.
inline std::uint64_t covered_cell_count(const ResolutionGrid& grid, const Box& sub) {
  std::uint64_t acc = 1;
  for (std::uint64_t n : grid.cells_per_dim(sub)) {
    if (acc > std::numeric_limits<std::uint64_t>::max() / n) {
      throw Error(ErrorCode::CellCountOverflow, "covered cell count does not fit in 64 bits");
    }
    acc *= n;
  }
  return acc;
}

/// Fraction of the grid's cells covered by `sub`, in [0, 1]. An empty covered space counts as fully covered.
inline double subbox_coverage(const ResolutionGrid& grid, const Box& sub) {
  auto per_dim = grid.cells_per_dim(sub);
  auto total = grid.total_cells();
  if (total && *total <= detail::kExactLimit) {
    std::uint64_t count = 1;
    for (auto n : per_dim) count *= n;
    return static_cast<double>(count) / static_cast<double>(*total);
  }
  double ratio = 1.0;
  const double r = static_cast<double>(grid.resolution());
  for (auto n : per_dim) ratio *= static_cast<double>(n) / r;
  return ratio;
}

/// Bounds on the fraction of cells covered by the union of the local boxes.
struct CoverageEstimate {
  double lower = 0.0;
  double upper = 0.0;

  double mean() const noexcept { return 0.5 * (lower + upper); }
  /// (upper - lower) / upper; 0 when upper is 0.
  double relative_difference() const noexcept { return upper > 0.0 ? (upper - lower) / upper : 0.0; }
};

namespace detail {

// Sums coverages as integer cell counts while the grid is small enough for doubles to be exact,
// so that e.g. (4 + 3) / 25 is computed as 7 / 25.
class CoverageSum {
 public:
  explicit CoverageSum(const ResolutionGrid& grid) : grid_(grid) {
    auto total = grid.total_cells();
    exact_ = total && *total <= kExactLimit;
  }

  void add(const Box& b) {
    if (exact_) {
      counts_ += covered_cell_count(grid_, b);
    } else {
      ratio_ += subbox_coverage(grid_, b);
    }
  }

  double value() const {
    if (exact_) {
      return static_cast<double>(counts_) / static_cast<double>(*grid_.total_cells());
    }
    return ratio_;
  }

  // Raw difference this - other, computed in integers when exact.
  double minus(const CoverageSum& other) const {
    if (exact_) {
      const auto total = static_cast<double>(*grid_.total_cells());
      if (counts_ >= other.counts_) return static_cast<double>(counts_ - other.counts_) / total;
      return -static_cast<double>(other.counts_ - counts_) / total;
    }
    return ratio_ - other.ratio_;
  }

 private:
  const ResolutionGrid& grid_;
  bool exact_ = false;
  unsigned __int128 counts_ = 0;
  double ratio_ = 0.0;
};

inline void validate_partition(std::size_t n_points, std::span<const std::vector<std::size_t>> blocks) {
  if (blocks.empty()) throw Error(ErrorCode::InvalidPartition, "partition has no blocks");
  std::vector<bool> seen(n_points, false);
  std::size_t covered = 0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (blocks[b].empty()) {
      throw Error(ErrorCode::InvalidPartition, "block " + std::to_string(b) + " is empty");
    }
    for (std::size_t idx : blocks[b]) {
      if (idx >= n_points) {
        throw Error(ErrorCode::InvalidPartition, "block " + std::to_string(b) + " references point " +
                                                     std::to_string(idx) + " outside the set");
      }
      if (seen[idx]) {
        throw Error(ErrorCode::InvalidPartition, "point " + std::to_string(idx) + " appears in two blocks");
      }
      seen[idx] = true;
      ++covered;
    }
  }
  if (covered != n_points) {
    throw Error(ErrorCode::InvalidPartition, "blocks do not cover every point");
  }
}

}  // namespace detail

/// Grid over the box of `points`; resolution defaults to the number of points.
inline ResolutionGrid make_grid(std::span<const Vector> points, std::optional<std::uint64_t> resolution_override = {}) {
  if (points.empty()) throw Error(ErrorCode::EmptyPointSet, "cannot build a grid over an empty point set");
  return ResolutionGrid(box_of(points), resolution_override.value_or(points.size()));
}

/// Pair-wise inclusion-exclusion estimate of the clustering coverage of a partition.
///
/// `blocks` holds indices into `points`; together they must cover every point exactly once.
/// upper = sum of local-box coverages, lower = upper - sum of pair-wise intersection coverages,
/// then clamped so that 0 <= lower <= upper <= 1.
inline CoverageEstimate clustering_coverage(std::span<const Vector> points,
                                            std::span<const std::vector<std::size_t>> blocks,
                                            std::optional<std::uint64_t> resolution_override = {}) {
  if (points.empty()) throw Error(ErrorCode::EmptyPointSet, "cannot estimate coverage of an empty point set");
  detail::validate_partition(points.size(), blocks);
  const ResolutionGrid grid = make_grid(points, resolution_override);

  std::vector<Box> local;
  local.reserve(blocks.size());
  for (const auto& block : blocks) local.push_back(box_of(points, block));

  detail::CoverageSum sum_local(grid);
  for (const Box& b : local) sum_local.add(b);
  detail::CoverageSum sum_pairs(grid);
  for (std::size_t i = 0; i + 1 < local.size(); ++i) {
    for (std::size_t j = i + 1; j < local.size(); ++j) {
      if (auto inter = intersect(local[i], local[j])) sum_pairs.add(*inter);
    }
  }

  CoverageEstimate est;
  est.upper = std::clamp(sum_local.value(), 0.0, 1.0);
  est.lower = std::clamp(sum_local.minus(sum_pairs), 0.0, est.upper);
  return est;
}

/// Exact fraction of grid cells covered by at least one local box, by enumerating every cell.
///
/// Uses the same cell convention as ResolutionGrid. Refuses grids above 10^7 cells.
inline double exact_coverage_oracle(std::span<const Vector> points,
                                    std::span<const std::vector<std::size_t>> blocks,
                                    std::optional<std::uint64_t> resolution_override = {}) {
  constexpr std::uint64_t kMaxCells = 10'000'000;
  if (points.empty()) throw Error(ErrorCode::EmptyPointSet, "cannot compute coverage of an empty point set");
  detail::validate_partition(points.size(), blocks);
  const ResolutionGrid grid = make_grid(points, resolution_override);
  const auto total = grid.total_cells();
  if (!total || *total > kMaxCells) {
    throw Error(ErrorCode::TooManyCells, "cell enumeration limited to " + std::to_string(kMaxCells) + " cells");
  }
  const auto& kept = grid.space().kept_dims;
  const std::size_t d = kept.size();
  const std::uint64_t r = grid.resolution();
  if (d == 0) return 1.0;

  // mask[box][dim][j] is true when the box's interval reaches slice j+1 on that dimension.
  std::vector<std::vector<std::vector<char>>> mask;
  for (const auto& block : blocks) {
    const Box b = box_of(points, block);
    std::vector<std::vector<char>> per_dim(d, std::vector<char>(r, 0));
    for (std::size_t k = 0; k < d; ++k) {
      const double t_lo = grid.grid_coordinate(kept[k], b[kept[k]].lo);
      const double t_hi = grid.grid_coordinate(kept[k], b[kept[k]].hi);
      for (std::uint64_t j = 1; j <= r; ++j) {
        const double left = static_cast<double>(j - 1);
        const double right = static_cast<double>(j);
        per_dim[k][j - 1] = (t_lo <= right) && (t_hi > left || j == 1);
      }
    }
    mask.push_back(std::move(per_dim));
  }

  std::vector<std::uint64_t> cell(d, 0);
  std::uint64_t covered = 0;
  for (std::uint64_t c = 0; c < *total; ++c) {
    for (const auto& m : mask) {
      bool inside = true;
      for (std::size_t k = 0; k < d && inside; ++k) inside = m[k][cell[k]] != 0;
      if (inside) {
        ++covered;
        break;
      }
    }
    for (std::size_t k = 0; k < d; ++k) {
      if (++cell[k] < r) break;
      cell[k] = 0;
    }
  }
  return static_cast<double>(covered) / static_cast<double>(*total);
}

}  // namespace boxmon
