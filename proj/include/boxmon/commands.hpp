#pragma once

// Batch commands behind the boxmon CLI. Each returns the text of its output file and writes
// progress and summaries to a log stream, so the commands can be tested without a process.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "boxmon/coverage.hpp"
#include "boxmon/error.hpp"
#include "boxmon/evaluation.hpp"
#include "boxmon/feature_file.hpp"
#include "boxmon/kmeans.hpp"
#include "boxmon/monitor.hpp"
#include "boxmon/monitor_io.hpp"

namespace boxmon::cli {

/// The twelve clustering parameters of the reference sweep, descending.
inline const std::vector<double> kDefaultTaus = {1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1, 0.05, 0.01};

/// Parses "1.0,0.5,0.1". Values must lie in [0, 1]; duplicates are dropped.
inline std::vector<double> parse_tau_list(std::string_view text, bool descending = true) {
  std::vector<double> taus;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view field = text.substr(start, end - start);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size() || !(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "bad tau value \"" + std::string(field) + "\" (expected a number in [0, 1])");
    }
    if (std::find(taus.begin(), taus.end(), v) == taus.end()) taus.push_back(v);
    start = end + 1;
  }
  if (descending) std::sort(taus.begin(), taus.end(), std::greater<>());
  return taus;
}

/// Parses "0,3,7" into class ids.
inline std::vector<int> parse_class_list(std::string_view text) {
  std::vector<int> ids;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view field = text.substr(start, end - start);
    int v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size() || v < 0) {
      throw Error(ErrorCode::InvalidArgument, "bad class id \"" + std::string(field) + "\"");
    }
    if (std::find(ids.begin(), ids.end(), v) == ids.end()) ids.push_back(v);
    start = end + 1;
  }
  return ids;
}

inline std::string resolution_label(std::optional<std::uint64_t> resolution) {
  return resolution ? std::to_string(*resolution) : std::string("default");
}

inline std::string header_comment(std::uint64_t seed, std::optional<std::uint64_t> resolution) {
  return "# seed=" + std::to_string(seed) + " resolution=" + resolution_label(resolution) + "\n";
}

/// Writes through a sibling temp file and renames it over `path`.
inline void write_atomic(const std::string& path, std::string_view text) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error(ErrorCode::Io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot rename " + tmp.string() + " to " + path + ": " + ec.message());
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct BuildOptions {
  std::vector<int> classes;  // empty: every class seen in the file
  int layer = 0;
  double tau_correct = 1.0;
  double tau_incorrect = 1.0;
  std::optional<std::uint64_t> resolution;
  ClusteringConfig clustering;
};

inline MonitorSet build_monitors(const FeatureFile& train, const BuildOptions& opt, std::ostream& log) {
  std::vector<int> classes = opt.classes;
  if (classes.empty()) {
    for (int y = 0; y < train.class_count; ++y) classes.push_back(y);
  }
  for (double t : {opt.tau_correct, opt.tau_incorrect}) {
    if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorCode::InvalidArgument, "tau must lie in [0, 1]");
  }
  MonitorSet set = build_monitor_set(train.records, classes, opt.layer, opt.tau_correct, opt.tau_incorrect,
                                     opt.clustering, opt.resolution);
  for (const auto& [y, m] : set.classes) {
    log << "class " << y << ": " << m.correct_boxes.size() << " correct boxes, " << m.incorrect_boxes.size()
        << " incorrect boxes\n";
  }
  return set;
}

inline std::string cmd_build(const FeatureFile& train, const BuildOptions& opt, std::ostream& log) {
  return serialize_monitor(build_monitors(train, opt, log));
}

struct RunSummary {
  std::uint64_t accept = 0, reject = 0, uncertainty = 0, unknown_class = 0;
};

/// One `row,predicted,verdict` line per record; records predicted into a class without a monitor
/// get the verdict `unknown_class` and a warning.
inline std::string cmd_run(const MonitorSet& monitors, const FeatureFile& test, std::ostream& log,
                           RunSummary* summary_out = nullptr) {
  std::string out = header_comment(monitors.seed, monitors.resolution);
  out += "row,predicted,verdict\n";
  RunSummary s;
  for (std::size_t i = 0; i < test.records.size(); ++i) {
    const FeatureRecord& r = test.records[i];
    std::string_view verdict = "unknown_class";
    if (monitors.classes.count(r.predicted_label) == 0) {
      ++s.unknown_class;
      log << "warning: row " << (i + 1) << " predicted class " << r.predicted_label << " has no monitor\n";
    } else {
      const Verdict v = run_monitor(monitors, r);
      verdict = to_string(v);
      if (v == Verdict::Accept) ++s.accept;
      if (v == Verdict::Reject) ++s.reject;
      if (v == Verdict::Uncertainty) ++s.uncertainty;
    }
    out += std::to_string(i + 1) + "," + std::to_string(r.predicted_label) + "," + std::string(verdict) + "\n";
  }
  log << "accept=" << s.accept << " reject=" << s.reject << " uncertainty=" << s.uncertainty
      << " unknown_class=" << s.unknown_class << "\n";
  if (summary_out) *summary_out = s;
  return out;
}

struct CoverageOptions {
  int class_id = 0;
  std::vector<double> taus = kDefaultTaus;
  std::optional<std::uint64_t> resolution;
  ClusteringConfig clustering;
};

/// Rows `tau,set,cov_lo,cov_hi,rel_diff` for the good and bad features of one class.
/// A set without features yields a row with empty numeric fields.
inline std::string cmd_coverage(const FeatureFile& train, const CoverageOptions& opt) {
  const ClassFeatures features = collect_class_features(train.records, opt.class_id);
  KCache good_cache;
  KCache bad_cache;
  std::string out = header_comment(opt.clustering.seed, opt.resolution);
  out += "tau,set,cov_lo,cov_hi,rel_diff\n";
  for (double tau : opt.taus) {
    for (auto [name, points, cache] : {std::tuple{"good", &features.correct, &good_cache},
                                       std::tuple{"bad", &features.incorrect, &bad_cache}}) {
      out += format_g9(tau) + "," + name + ",";
      if (points->empty()) {
        out += ",,\n";
        continue;
      }
      ClusteringConfig c = opt.clustering;
      c.tau = tau;
      const Partition p = kmeans_by_tau(*points, c, cache);
      const CoverageEstimate est = clustering_coverage(*points, p.blocks, opt.resolution);
      out += format_g9(est.lower) + "," + format_g9(est.upper) + "," + format_g9(est.relative_difference()) + "\n";
    }
  }
  return out;
}

struct TuneOptions {
  int class_id = 0;
  bool bad_set = false;  // tune on the incorrectly classified features instead of the correct ones
  TuneConfig tune;
  std::optional<std::uint64_t> resolution;
  ClusteringConfig clustering;
};

/// Runs both bisection searches and returns a JSON report with their traces.
inline std::string cmd_tune(const FeatureFile& train, const TuneOptions& opt, std::ostream& log) {
  const ClassFeatures features = collect_class_features(train.records, opt.class_id);
  const PointSet& points = opt.bad_set ? features.incorrect : features.correct;
  if (points.empty()) {
    throw Error(ErrorCode::EmptyPointSet, std::string("class ") + std::to_string(opt.class_id) + " has no " +
                                              (opt.bad_set ? "bad" : "good") + " features");
  }
  KCache cache;
  const TauSearchResult hi = search_tau_max(points, opt.tune, opt.clustering, cache, opt.resolution);
  const TauSearchResult lo = search_tau_min(points, opt.tune, opt.clustering, cache, opt.resolution);

  auto trace_json = [](const TauSearchResult& r) {
    auto arr = nlohmann::json::array();
    for (const auto& s : r.trace) arr.push_back({{"tau_mean", s.tau_mean}, {"mean_coverage", s.mean_coverage}});
    return arr;
  };
  for (const auto& [name, r] : {std::pair{"tau_max", &hi}, std::pair{"tau_min", &lo}}) {
    log << name << " search:\n";
    for (const auto& s : r->trace) log << "  tau_mean=" << format_g9(s.tau_mean) << " mean_cov=" << format_g9(s.mean_coverage) << "\n";
  }
  log << "tau_min=" << format_g9(lo.tau) << " tau_max=" << format_g9(hi.tau) << "\n";

  nlohmann::json j;
  j["class"] = opt.class_id;
  j["set"] = opt.bad_set ? "bad" : "good";
  j["seed"] = opt.clustering.seed;
  j["resolution"] = opt.resolution ? nlohmann::json(*opt.resolution) : nlohmann::json(nullptr);
  j["eps_cov"] = opt.tune.eps_cov;
  j["eps_ival"] = opt.tune.eps_ival;
  j["tau_min"] = lo.tau;
  j["tau_max"] = hi.tau;
  j["coverage_tau0"] = lo.baseline;
  j["coverage_tau1"] = hi.baseline;
  j["trace_tau_max"] = trace_json(hi);
  j["trace_tau_min"] = trace_json(lo);
  return j.dump(2) + "\n";
}

struct EvalOptions {
  int class_id = 0;
  int layer = 0;
  std::vector<double> taus = kDefaultTaus;
  std::optional<std::uint64_t> resolution;
  ClusteringConfig clustering;
};

/// Sweep CSV: builds class y's monitor from `train` once per tau and evaluates it on `test`.
inline std::string cmd_eval(const FeatureFile& train, const FeatureFile& test, const EvalOptions& opt) {
  const auto rows = sweep(train.records, test.records, opt.class_id, opt.layer, opt.taus, opt.clustering, opt.resolution);
  std::string out = header_comment(opt.clustering.seed, opt.resolution);
  return out + sweep_csv(rows);
}

/// Sweep CSV with a single row for an already built monitor (coverage columns left empty).
inline std::string cmd_eval(const MonitorSet& monitors, const FeatureFile& test, int class_id) {
  SweepRow row;
  const auto it = monitors.classes.find(class_id);
  if (it == monitors.classes.end()) throw Error(ErrorCode::UnknownClass, "no monitor for class " + std::to_string(class_id));
  row.tau = it->second.tau_correct;
  row.counts = evaluate(monitors, test.records, class_id);
  row.metrics = metrics(row.counts);
  std::vector<SweepRow> rows{row};
  return header_comment(monitors.seed, monitors.resolution) + sweep_csv(rows);
}

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitInternalError = 3;

}  // namespace boxmon::cli
