#pragma once

#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "boxmon/coverage.hpp"
#include "boxmon/error.hpp"
#include "boxmon/kmeans.hpp"
#include "boxmon/monitor.hpp"

namespace boxmon {

/// Ground truth of a record relative to the monitored class y. Negative means "truly y":
/// the monitor should stay silent. Everything else (other classes, unknown inputs) is positive.
enum class Nature { Negative, Positive };

enum class Outcome { TN, FP, MN, FN, TP, MP };

constexpr std::string_view to_string(Outcome o) noexcept {
  switch (o) {
    case Outcome::TN: return "TN";
    case Outcome::FP: return "FP";
    case Outcome::MN: return "MN";
    case Outcome::FN: return "FN";
    case Outcome::TP: return "TP";
    case Outcome::MP: return "MP";
  }
  return "?";
}

constexpr Outcome classify_outcome(Nature nature, Verdict verdict) noexcept {
  if (nature == Nature::Negative) {
    switch (verdict) {
      case Verdict::Accept: return Outcome::TN;
      case Verdict::Reject: return Outcome::FP;
      case Verdict::Uncertainty: return Outcome::MN;
    }
  }
  switch (verdict) {
    case Verdict::Accept: return Outcome::FN;
    case Verdict::Reject: return Outcome::TP;
    case Verdict::Uncertainty: return Outcome::MP;
  }
  return Outcome::TP;
}

struct OutcomeCounts {
  std::uint64_t tn = 0, fp = 0, mn = 0, fn = 0, tp = 0, mp = 0;

  void add(Outcome o) noexcept {
    switch (o) {
      case Outcome::TN: ++tn; break;
      case Outcome::FP: ++fp; break;
      case Outcome::MN: ++mn; break;
      case Outcome::FN: ++fn; break;
      case Outcome::TP: ++tp; break;
      case Outcome::MP: ++mp; break;
    }
  }

  OutcomeCounts& operator+=(const OutcomeCounts& o) noexcept {
    tn += o.tn; fp += o.fp; mn += o.mn; fn += o.fn; tp += o.tp; mp += o.mp;
    return *this;
  }

  std::uint64_t total() const noexcept { return tn + fp + mn + fn + tp + mp; }

  friend bool operator==(const OutcomeCounts&, const OutcomeCounts&) = default;
};

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  /// False when precision or recall had a zero denominator (reported as 0).
  bool defined = false;
};

/// precision = TP/(TP+FP), recall = TP/(TP+FN+MP). Missed positives count against recall.
inline Metrics metrics(const OutcomeCounts& c) {
  Metrics m;
  const std::uint64_t p_den = c.tp + c.fp;
  const std::uint64_t r_den = c.tp + c.fn + c.mp;
  if (p_den > 0) m.precision = static_cast<double>(c.tp) / static_cast<double>(p_den);
  if (r_den > 0) m.recall = static_cast<double>(c.tp) / static_cast<double>(r_den);
  if (m.precision + m.recall > 0.0) m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  m.defined = p_den > 0 && r_den > 0;
  return m;
}

/// Tallies the verdicts of class y's monitor over the records the network predicted as y.
inline OutcomeCounts evaluate(const std::map<int, ClassMonitor>& monitors, std::span<const FeatureRecord> records,
                              int class_id) {
  auto it = monitors.find(class_id);
  if (it == monitors.end()) throw Error(ErrorCode::UnknownClass, "no monitor for class " + std::to_string(class_id));
  OutcomeCounts counts;
  for (const auto& r : records) {
    if (r.predicted_label != class_id) continue;
    const Nature nature = r.true_label == class_id ? Nature::Negative : Nature::Positive;
    counts.add(classify_outcome(nature, monitor_verdict(it->second, r.features)));
  }
  return counts;
}

inline OutcomeCounts evaluate(const MonitorSet& set, std::span<const FeatureRecord> records, int class_id) {
  return evaluate(set.classes, records, class_id);
}

struct SweepRow {
  double tau = 0.0;
  std::optional<CoverageEstimate> coverage_good;  // empty when there are no good features
  std::optional<CoverageEstimate> coverage_bad;   // empty when there are no bad features
  OutcomeCounts counts;
  Metrics metrics;
};

/// For each tau (in the given order): build class y's monitor with tau for both feature sets,
/// estimate the coverage of both partitions and evaluate on the test records.
/// Warm-start caches are shared across rows, so descending tau lists are cheapest.
inline std::vector<SweepRow> sweep(std::span<const FeatureRecord> train, std::span<const FeatureRecord> test,
                                   int class_id, int layer_id, std::span<const double> taus,
                                   const ClusteringConfig& cfg, std::optional<std::uint64_t> resolution = {}) {
  if (taus.empty()) throw Error(ErrorCode::InvalidArgument, "tau list is empty");
  if (train.empty()) throw Error(ErrorCode::EmptyPointSet, "no training records");
  const ClassFeatures features = collect_class_features(train, class_id);
  KCache good_cache;
  KCache bad_cache;

  auto cluster = [&](const PointSet& points, double tau, KCache& cache,
                     std::optional<CoverageEstimate>& coverage) -> std::vector<Box> {
    if (points.empty()) return {};
    ClusteringConfig c = cfg;
    c.tau = tau;
    const Partition p = kmeans_by_tau(points, c, &cache);
    coverage = clustering_coverage(points, p.blocks, resolution);
    return boxes_of_partition(points, p);
  };

  std::vector<SweepRow> rows;
  rows.reserve(taus.size());
  for (double tau : taus) {
    SweepRow row;
    row.tau = tau;
    std::map<int, ClassMonitor> monitors;
    ClassMonitor& m = monitors[class_id];
    m.class_id = class_id;
    m.layer_id = layer_id;
    m.tau_correct = tau;
    m.tau_incorrect = tau;
    m.correct_boxes = cluster(features.correct, tau, good_cache, row.coverage_good);
    m.incorrect_boxes = cluster(features.incorrect, tau, bad_cache, row.coverage_bad);
    row.counts = evaluate(monitors, test, class_id);
    row.metrics = metrics(row.counts);
    rows.push_back(std::move(row));
  }
  return rows;
}

/// CSV floats carry 9 significant digits.
inline std::string format_g9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline constexpr std::string_view kSweepCsvHeader =
    "tau,cov_lo_good,cov_hi_good,cov_lo_bad,cov_hi_bad,tn,fp,mn,fn,tp,mp,precision,recall,f1,metrics_defined";

inline std::string sweep_csv_row(const SweepRow& r) {
  auto cov = [](const std::optional<CoverageEstimate>& c) {
    return c ? format_g9(c->lower) + "," + format_g9(c->upper) : std::string(",");
  };
  std::string s = format_g9(r.tau);
  s += "," + cov(r.coverage_good) + "," + cov(r.coverage_bad);
  for (std::uint64_t n : {r.counts.tn, r.counts.fp, r.counts.mn, r.counts.fn, r.counts.tp, r.counts.mp}) {
    s += "," + std::to_string(n);
  }
  s += "," + format_g9(r.metrics.precision) + "," + format_g9(r.metrics.recall) + "," + format_g9(r.metrics.f1);
  s += r.metrics.defined ? ",1" : ",0";
  return s;
}

/// Full CSV text, optionally preceded by `# ...` comment lines.
inline std::string sweep_csv(std::span<const SweepRow> rows, std::span<const std::string> comments = {}) {
  std::string out;
  for (const auto& c : comments) out += "# " + c + "\n";
  out += kSweepCsvHeader;
  out += "\n";
  for (const auto& r : rows) out += sweep_csv_row(r) + "\n";
  return out;
}

}  // namespace boxmon
