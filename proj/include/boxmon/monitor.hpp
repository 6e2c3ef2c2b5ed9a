#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "boxmon/error.hpp"
#include "boxmon/geometry.hpp"
#include "boxmon/kmeans.hpp"

namespace boxmon {

/// true_label of inputs that belong to no class of the network.
inline constexpr int kUnknownLabel = -1;

/// Activations of one input at the monitored layer, with its ground truth and the network's decision.
struct FeatureRecord {
  Vector features;
  int true_label = 0;
  int predicted_label = 0;
};

enum class Verdict { Accept, Reject, Uncertainty };

constexpr std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::Accept: return "accept";
    case Verdict::Reject: return "reject";
    case Verdict::Uncertainty: return "uncertainty";
  }
  return "?";
}

/// Reference boxes for one output class at one layer: clusters of correctly classified
/// features and of features wrongly classified into the class.
struct ClassMonitor {
  int class_id = 0;
  int layer_id = 0;
  std::vector<Box> correct_boxes;
  std::vector<Box> incorrect_boxes;
  double tau_correct = 1.0;
  double tau_incorrect = 1.0;

  /// Feature dimension, or 0 for a monitor without any box.
  std::size_t dim() const noexcept {
    if (!correct_boxes.empty()) return correct_boxes.front().dim();
    if (!incorrect_boxes.empty()) return incorrect_boxes.front().dim();
    return 0;
  }
};

/// Monitors of every class at one layer, plus the parameters they were built with.
struct MonitorSet {
  int layer = 0;
  std::optional<std::uint64_t> resolution;
  std::uint64_t seed = 42;
  std::map<int, ClassMonitor> classes;
};

/// Features split by Algorithm-2 style selection for class y.
struct ClassFeatures {
  PointSet correct;    // true_label == y and predicted == y
  PointSet incorrect;  // true_label != y and predicted == y
};

inline ClassFeatures collect_class_features(std::span<const FeatureRecord> records, int class_id) {
  ClassFeatures out;
  std::optional<std::size_t> dim;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (!dim) dim = r.features.size();
    if (r.features.size() != *dim) {
      throw Error(ErrorCode::DimensionMismatch, "record " + std::to_string(i) + " has " +
                                                    std::to_string(r.features.size()) + " features, expected " +
                                                    std::to_string(*dim));
    }
    if (r.predicted_label != class_id) continue;
    require_finite(r.features);
    (r.true_label == class_id ? out.correct : out.incorrect).push_back(r.features);
  }
  return out;
}

inline std::vector<Box> boxes_of_partition(std::span<const Vector> points, const Partition& p) {
  std::vector<Box> boxes;
  boxes.reserve(p.k());
  for (const auto& block : p.blocks) boxes.push_back(box_of(points, block));
  return boxes;
}

/// Clusters `points` with `tau` and returns one tight box per cluster; no boxes for an empty set.
inline std::vector<Box> abstract_features(std::span<const Vector> points, double tau, const ClusteringConfig& cfg,
                                          KCache* cache = nullptr) {
  if (points.empty()) return {};
  ClusteringConfig c = cfg;
  c.tau = tau;
  return boxes_of_partition(points, kmeans_by_tau(points, c, cache));
}

inline ClassMonitor build_class_monitor(std::span<const FeatureRecord> records, int class_id, int layer_id,
                                        double tau_correct, double tau_incorrect, const ClusteringConfig& cfg) {
  if (records.empty()) throw Error(ErrorCode::EmptyPointSet, "no records to build a monitor from");
  const ClassFeatures features = collect_class_features(records, class_id);
  ClassMonitor m;
  m.class_id = class_id;
  m.layer_id = layer_id;
  m.tau_correct = tau_correct;
  m.tau_incorrect = tau_incorrect;
  m.correct_boxes = abstract_features(features.correct, tau_correct, cfg);
  m.incorrect_boxes = abstract_features(features.incorrect, tau_incorrect, cfg);
  return m;
}

inline bool any_contains(std::span<const Box> boxes, std::span<const double> v) {
  for (const Box& b : boxes) {
    if (b.contains(v)) return true;
  }
  return false;
}

/// Verdict from (in correct boxes, in incorrect boxes).
constexpr Verdict verdict_from(bool in_correct, bool in_incorrect) noexcept {
  if (in_correct && in_incorrect) return Verdict::Uncertainty;
  if (in_correct) return Verdict::Accept;
  return Verdict::Reject;
}

inline Verdict monitor_verdict(const ClassMonitor& m, std::span<const double> feature) {
  if (const std::size_t d = m.dim(); d != 0) require_same_dim(d, feature.size());
  return verdict_from(any_contains(m.correct_boxes, feature), any_contains(m.incorrect_boxes, feature));
}

/// Dispatches on the predicted class, as the network would at runtime.
inline Verdict run_monitor(const std::map<int, ClassMonitor>& monitors, const FeatureRecord& record) {
  auto it = monitors.find(record.predicted_label);
  if (it == monitors.end()) {
    throw Error(ErrorCode::UnknownClass, "no monitor for class " + std::to_string(record.predicted_label));
  }
  return monitor_verdict(it->second, record.features);
}

inline Verdict run_monitor(const MonitorSet& set, const FeatureRecord& record) {
  return run_monitor(set.classes, record);
}

/// Builds one monitor per class id in `class_ids` with shared tau settings.
inline MonitorSet build_monitor_set(std::span<const FeatureRecord> records, std::span<const int> class_ids,
                                    int layer_id, double tau_correct, double tau_incorrect,
                                    const ClusteringConfig& cfg, std::optional<std::uint64_t> resolution = {}) {
  MonitorSet set;
  set.layer = layer_id;
  set.resolution = resolution;
  set.seed = cfg.seed;
  for (int y : class_ids) {
    set.classes[y] = build_class_monitor(records, y, layer_id, tau_correct, tau_incorrect, cfg);
  }
  return set;
}

}  // namespace boxmon
