#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "boxmon/coverage.hpp"
#include "boxmon/error.hpp"
#include "boxmon/geometry.hpp"

namespace boxmon {

struct ClusteringConfig {
  /// Stop growing k once the relative inertia improvement drops below tau.
  double tau = 1.0;
  std::uint64_t seed = 42;
  int restarts = 10;
  int max_iter = 300;
  /// Lloyd iterations also stop when no center moves more than center_tol times the data diameter.
  double center_tol = 1e-9;
};

/// A k-means result. Blocks hold point indices and are ordered by their smallest index;
/// centers[j] is the mean of blocks[j].
struct Partition {
  std::vector<std::vector<std::size_t>> blocks;
  std::vector<Vector> centers;
  double inertia = 0.0;

  std::size_t k() const noexcept { return blocks.size(); }
};

/// Remembers the k chosen for each tried tau, plus every partition computed so far, for one point set.
class KCache {
 public:
  /// k recorded for the smallest cached tau' >= tau. Every k below it was already rejected for tau'
  /// (improvement >= tau' >= tau), so a scan for tau may start there.
  std::optional<std::size_t> warm_start(double tau) const {
    auto it = k_by_tau_.lower_bound(tau);
    if (it == k_by_tau_.end()) return std::nullopt;
    return it->second;
  }

  void record(double tau, std::size_t k) { k_by_tau_[tau] = k; }

  const std::map<double, std::size_t>& entries() const noexcept { return k_by_tau_; }

  const Partition* find_partition(std::size_t k) const {
    auto it = partitions_.find(k);
    return it == partitions_.end() ? nullptr : &it->second;
  }

  const Partition& store_partition(std::size_t k, Partition p) { return partitions_[k] = std::move(p); }

 private:
  std::map<double, std::size_t> k_by_tau_;
  std::map<std::size_t, Partition> partitions_;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream per (seed, k, restart).
inline std::mt19937_64 stream_for(std::uint64_t seed, std::size_t k, int restart) {
  std::uint64_t s = splitmix64(seed);
  s = splitmix64(s ^ static_cast<std::uint64_t>(k));
  s = splitmix64(s ^ static_cast<std::uint64_t>(restart));
  return std::mt19937_64(s);
}

inline double unit_uniform(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline void validate_points(std::span<const Vector> points) {
  if (points.empty()) throw Error(ErrorCode::EmptyPointSet, "cannot cluster an empty point set");
  const std::size_t dim = points.front().size();
  if (dim == 0) throw Error(ErrorCode::DimensionMismatch, "points must have at least one dimension");
  for (const auto& p : points) {
    require_same_dim(dim, p.size());
    require_finite(p);
  }
}

// Lowest center index wins ties.
inline std::size_t nearest_center(std::span<const double> p, const std::vector<Vector>& centers, double& best) {
  std::size_t arg = 0;
  best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < centers.size(); ++j) {
    const double d = squared_distance(p, centers[j]);
    if (d < best) {
      best = d;
      arg = j;
    }
  }
  return arg;
}

inline std::vector<Vector> seed_plus_plus(std::span<const Vector> points, std::size_t k, std::mt19937_64& gen) {
  const std::size_t n = points.size();
  std::vector<Vector> centers;
  centers.reserve(k);
  centers.push_back(points[gen() % n]);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points[i], centers[0]);
  while (centers.size() < k) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = unit_uniform(gen) * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        acc += d2[i];
        pick = i;
        if (acc > target) break;
      }
    }
    if (pick == n) break;  // fewer distinct points than k; caller guarantees this does not happen
    centers.push_back(points[pick]);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(points[i], centers.back()));
  }
  return centers;
}

inline double diameter(std::span<const Vector> points) {
  const Box b = box_of(points);
  double s = 0.0;
  for (const auto& iv : b.intervals()) s += iv.length() * iv.length();
  return std::sqrt(s);
}

inline Partition finalize(std::span<const Vector> points, const std::vector<std::size_t>& assign, std::size_t k) {
  const std::size_t dim = points.front().size();
  std::vector<std::vector<std::size_t>> blocks(k);
  for (std::size_t i = 0; i < assign.size(); ++i) blocks[assign[i]].push_back(i);
  std::erase_if(blocks, [](const auto& b) { return b.empty(); });
  std::sort(blocks.begin(), blocks.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });

  Partition p;
  p.blocks = std::move(blocks);
  for (const auto& block : p.blocks) {
    Vector c(dim, 0.0);
    for (std::size_t idx : block) {
      for (std::size_t d = 0; d < dim; ++d) c[d] += points[idx][d];
    }
    for (double& x : c) x /= static_cast<double>(block.size());
    for (std::size_t idx : block) p.inertia += squared_distance(points[idx], c);
    p.centers.push_back(std::move(c));
  }
  return p;
}

inline Partition lloyd(std::span<const Vector> points, std::vector<Vector> centers, const ClusteringConfig& cfg,
                       double shift_tol) {
  const std::size_t n = points.size();
  const std::size_t k = centers.size();
  const std::size_t dim = points.front().size();
  std::vector<std::size_t> assign(n, 0);
  std::vector<double> dist(n, 0.0);
  bool first = true;

  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = nearest_center(points[i], centers, dist[i]);
      if (first || j != assign[i]) changed = true;
      assign[i] = j;
    }
    first = false;

    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t j : assign) ++sizes[j];
    // An empty cluster takes the point farthest from its center among clusters with spare members.
    for (std::size_t j = 0; j < k; ++j) {
      if (sizes[j] != 0) continue;
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (sizes[assign[i]] > 1 && (far == n || dist[i] > dist[far])) far = i;
      }
      if (far == n) break;
      --sizes[assign[far]];
      assign[far] = j;
      dist[far] = 0.0;
      ++sizes[j];
      changed = true;
    }
    if (!changed) break;

    std::vector<Vector> next(k, Vector(dim, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t d = 0; d < dim; ++d) next[assign[i]][d] += points[i][d];
    }
    double max_shift = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      for (double& x : next[j]) x /= static_cast<double>(sizes[j]);
      max_shift = std::max(max_shift, std::sqrt(squared_distance(next[j], centers[j])));
    }
    centers = std::move(next);
    if (max_shift <= shift_tol) break;
  }
  return finalize(points, assign, k);
}

}  // namespace detail

/// Number of pairwise-distinct points.
inline std::size_t distinct_count(std::span<const Vector> points) {
  std::vector<const Vector*> refs;
  refs.reserve(points.size());
  for (const auto& p : points) refs.push_back(&p);
  std::sort(refs.begin(), refs.end(), [](const Vector* a, const Vector* b) { return *a < *b; });
  auto last = std::unique(refs.begin(), refs.end(), [](const Vector* a, const Vector* b) { return *a == *b; });
  return static_cast<std::size_t>(last - refs.begin());
}

/// Best of `cfg.restarts` k-means++-seeded Lloyd runs (lowest inertia, earliest restart on ties).
inline Partition kmeans_fixed_k(std::span<const Vector> points, std::size_t k, const ClusteringConfig& cfg) {
  detail::validate_points(points);
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be positive");
  if (cfg.restarts < 1 || cfg.max_iter < 1) throw Error(ErrorCode::InvalidArgument, "restarts and max_iter must be positive");
  const std::size_t distinct = distinct_count(points);
  if (k > distinct) {
    throw Error(ErrorCode::KTooLarge,
                "k = " + std::to_string(k) + " exceeds the " + std::to_string(distinct) + " distinct points");
  }
  const double shift_tol = cfg.center_tol * detail::diameter(points);

  std::optional<Partition> best;
  for (int r = 0; r < cfg.restarts; ++r) {
    auto gen = detail::stream_for(cfg.seed, k, r);
    Partition p = detail::lloyd(points, detail::seed_plus_plus(points, k, gen), cfg, shift_tol);
    if (!best || p.inertia < best->inertia) best = std::move(p);
  }
  if (best->k() != k) throw InvariantViolation("k-means produced an empty cluster");
  return *std::move(best);
}

/// Relative inertia improvement 1 - next/current; 0 when current is 0.
inline double inertia_improvement(double current, double next) {
  if (current <= 0.0) return 0.0;
  return 1.0 - next / current;
}

/// Grows k from 1 (or a cached warm start) and returns the first partition whose improvement to k+1
/// falls below cfg.tau. The scan also stops at zero inertia and at the number of distinct points.
inline Partition kmeans_by_tau(std::span<const Vector> points, const ClusteringConfig& cfg, KCache* cache = nullptr) {
  detail::validate_points(points);
  if (!(cfg.tau >= 0.0 && cfg.tau <= 1.0)) throw Error(ErrorCode::InvalidArgument, "tau must lie in [0, 1]");
  const std::size_t cap = distinct_count(points);

  auto partition_for = [&](std::size_t k) -> Partition {
    if (cache) {
      if (const Partition* p = cache->find_partition(k)) return *p;
      return cache->store_partition(k, kmeans_fixed_k(points, k, cfg));
    }
    return kmeans_fixed_k(points, k, cfg);
  };

  std::size_t k = 1;
  if (cache) k = std::clamp<std::size_t>(cache->warm_start(cfg.tau).value_or(1), 1, cap);

  Partition current = partition_for(k);
  while (current.inertia > 0.0 && k < cap) {
    Partition next = partition_for(k + 1);
    // tau = 1 stops at k = 1 even when k = 2 reaches zero inertia (improvement exactly 1).
    if (cfg.tau >= 1.0 || inertia_improvement(current.inertia, next.inertia) < cfg.tau) break;
    current = std::move(next);
    ++k;
  }
  if (cache) cache->record(cfg.tau, k);
  return current;
}

/// Mean of the clustering-coverage bounds for the partition selected by `tau`.
inline double mean_coverage_at_tau(std::span<const Vector> points, double tau, const ClusteringConfig& cfg,
                                   KCache& cache, std::optional<std::uint64_t> resolution = {}) {
  ClusteringConfig c = cfg;
  c.tau = tau;
  const Partition p = kmeans_by_tau(points, c, &cache);
  return clustering_coverage(points, p.blocks, resolution).mean();
}

struct TuneConfig {
  double eps_cov = 0.01;
  double eps_ival = 0.01;
};

struct TauSearchStep {
  double tau_mean;
  double mean_coverage;
};

struct TauSearchResult {
  double tau = 0.0;
  /// Mean coverage at the fixed endpoint (tau = 1 for the max search, tau = 0 for the min search).
  double baseline = 0.0;
  std::vector<TauSearchStep> trace;
};

namespace detail {

inline void validate_tune(const TuneConfig& tune) {
  if (!(tune.eps_cov > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps_cov must be positive");
  if (!(tune.eps_ival > 0.0 && tune.eps_ival < 1.0)) throw Error(ErrorCode::InvalidArgument, "eps_ival must lie in (0, 1)");
}

enum class SearchEnd { Max, Min };

inline TauSearchResult bisect_tau(std::span<const Vector> points, const TuneConfig& tune, const ClusteringConfig& cfg,
                                  KCache& cache, std::optional<std::uint64_t> resolution, SearchEnd end) {
  detail::validate_points(points);
  validate_tune(tune);
  TauSearchResult out;
  out.baseline = mean_coverage_at_tau(points, end == SearchEnd::Max ? 1.0 : 0.0, cfg, cache, resolution);
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > tune.eps_ival) {
    const double mid = (hi + lo) / 2.0;
    const double cov = mean_coverage_at_tau(points, mid, cfg, cache, resolution);
    out.trace.push_back({mid, cov});
    if (end == SearchEnd::Max) {
      if (out.baseline - cov > tune.eps_cov) {
        lo = mid;
      } else {
        hi = mid;
      }
    } else {
      if (cov - out.baseline > tune.eps_cov) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
  }
  out.tau = end == SearchEnd::Max ? hi : lo;
  return out;
}

}  // namespace detail

/// Bisection for the largest tau whose mean coverage stays within eps_cov of the tau = 1 coverage.
inline TauSearchResult search_tau_max(std::span<const Vector> points, const TuneConfig& tune,
                                      const ClusteringConfig& cfg, KCache& cache,
                                      std::optional<std::uint64_t> resolution = {}) {
  return detail::bisect_tau(points, tune, cfg, cache, resolution, detail::SearchEnd::Max);
}

/// Mirror of search_tau_max against the tau = 0 coverage.
inline TauSearchResult search_tau_min(std::span<const Vector> points, const TuneConfig& tune,
                                      const ClusteringConfig& cfg, KCache& cache,
                                      std::optional<std::uint64_t> resolution = {}) {
  return detail::bisect_tau(points, tune, cfg, cache, resolution, detail::SearchEnd::Min);
}

inline TauSearchResult search_tau_max(std::span<const Vector> points, const TuneConfig& tune,
                                      const ClusteringConfig& cfg, std::optional<std::uint64_t> resolution = {}) {
  KCache cache;
  return search_tau_max(points, tune, cfg, cache, resolution);
}

inline TauSearchResult search_tau_min(std::span<const Vector> points, const TuneConfig& tune,
                                      const ClusteringConfig& cfg, std::optional<std::uint64_t> resolution = {}) {
  KCache cache;
  return search_tau_min(points, tune, cfg, cache, resolution);
}

}  // namespace boxmon
