#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "boxmon/error.hpp"
#include "boxmon/geometry.hpp"
#include "boxmon/monitor.hpp"

namespace boxmon {

inline constexpr int kMonitorFormatVersion = 1;

namespace detail {

inline nlohmann::json boxes_to_json(const std::vector<Box>& boxes) {
  auto arr = nlohmann::json::array();
  for (const Box& b : boxes) {
    auto ivs = nlohmann::json::array();
    for (const Interval& iv : b.intervals()) ivs.push_back({iv.lo, iv.hi});
    arr.push_back(std::move(ivs));
  }
  return arr;
}

[[noreturn]] inline void malformed(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::MalformedMonitorFile, where + ": " + what);
}

inline const nlohmann::json& member(const nlohmann::json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) malformed(where, std::string("missing field \"") + key + "\"");
  return *it;
}

inline int as_int(const nlohmann::json& j, const std::string& where) {
  if (!j.is_number_integer()) malformed(where, "expected an integer");
  const auto v = j.get<std::int64_t>();
  if (v < INT32_MIN || v > INT32_MAX) malformed(where, "integer out of range");
  return static_cast<int>(v);
}

inline double as_double(const nlohmann::json& j, const std::string& where) {
  if (!j.is_number()) malformed(where, "expected a number");
  return j.get<double>();
}

inline std::vector<Box> boxes_from_json(const nlohmann::json& arr, const std::string& where, std::size_t& dim) {
  if (!arr.is_array()) malformed(where, "expected an array of boxes");
  std::vector<Box> boxes;
  for (std::size_t b = 0; b < arr.size(); ++b) {
    const std::string bw = where + "[" + std::to_string(b) + "]";
    const auto& jb = arr[b];
    if (!jb.is_array() || jb.empty()) malformed(bw, "expected a non-empty array of intervals");
    if (dim == 0) dim = jb.size();
    if (jb.size() != dim) {
      malformed(bw, "box has " + std::to_string(jb.size()) + " dimensions, expected " + std::to_string(dim));
    }
    std::vector<Interval> ivs;
    for (std::size_t i = 0; i < jb.size(); ++i) {
      const std::string iw = bw + "[" + std::to_string(i) + "]";
      const auto& ji = jb[i];
      if (!ji.is_array() || ji.size() != 2) malformed(iw, "expected [lo, hi]");
      const double lo = as_double(ji[0], iw + "[0]");
      const double hi = as_double(ji[1], iw + "[1]");
      if (!std::isfinite(lo) || !std::isfinite(hi)) malformed(iw, "bounds must be finite");
      if (!(lo <= hi)) malformed(iw, "lower bound exceeds upper bound");
      ivs.push_back({lo, hi});
    }
    boxes.emplace_back(std::move(ivs));
  }
  return boxes;
}

inline std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

}  // namespace detail

inline nlohmann::json monitor_to_json(const MonitorSet& set) {
  nlohmann::json j;
  j["version"] = kMonitorFormatVersion;
  j["layer"] = set.layer;
  j["resolution"] = set.resolution ? nlohmann::json(*set.resolution) : nlohmann::json(nullptr);
  j["seed"] = set.seed;
  auto classes = nlohmann::json::array();
  for (const auto& [id, m] : set.classes) {
    nlohmann::json c;
    c["class"] = id;
    c["tau_correct"] = m.tau_correct;
    c["tau_incorrect"] = m.tau_incorrect;
    c["correct_boxes"] = detail::boxes_to_json(m.correct_boxes);
    c["incorrect_boxes"] = detail::boxes_to_json(m.incorrect_boxes);
    classes.push_back(std::move(c));
  }
  j["classes"] = std::move(classes);
  return j;
}

/// Pretty-printed monitor file; doubles use the shortest representation that parses back exactly.
inline std::string serialize_monitor(const MonitorSet& set) { return monitor_to_json(set).dump(2) + "\n"; }

inline MonitorSet monitor_from_json(const nlohmann::json& j) {
  if (!j.is_object()) detail::malformed("$", "expected a JSON object");
  const int version = detail::as_int(detail::member(j, "version", "$"), "$.version");
  if (version != kMonitorFormatVersion) detail::malformed("$.version", "unsupported version " + std::to_string(version));

  MonitorSet set;
  set.layer = detail::as_int(detail::member(j, "layer", "$"), "$.layer");
  const auto& res = detail::member(j, "resolution", "$");
  if (!res.is_null()) {
    if (!res.is_number_unsigned() || res.get<std::uint64_t>() == 0) {
      detail::malformed("$.resolution", "expected a positive integer or null");
    }
    set.resolution = res.get<std::uint64_t>();
  }
  if (auto it = j.find("seed"); it != j.end()) {
    if (!it->is_number_unsigned()) detail::malformed("$.seed", "expected a non-negative integer");
    set.seed = it->get<std::uint64_t>();
  }

  const auto& classes = detail::member(j, "classes", "$");
  if (!classes.is_array()) detail::malformed("$.classes", "expected an array");
  std::size_t dim = 0;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const std::string where = "$.classes[" + std::to_string(i) + "]";
    const auto& jc = classes[i];
    if (!jc.is_object()) detail::malformed(where, "expected an object");
    ClassMonitor m;
    m.class_id = detail::as_int(detail::member(jc, "class", where), where + ".class");
    if (m.class_id < 0) detail::malformed(where + ".class", "class ids are non-negative");
    m.layer_id = set.layer;
    m.tau_correct = detail::as_double(detail::member(jc, "tau_correct", where), where + ".tau_correct");
    m.tau_incorrect = detail::as_double(detail::member(jc, "tau_incorrect", where), where + ".tau_incorrect");
    m.correct_boxes = detail::boxes_from_json(detail::member(jc, "correct_boxes", where), where + ".correct_boxes", dim);
    m.incorrect_boxes =
        detail::boxes_from_json(detail::member(jc, "incorrect_boxes", where), where + ".incorrect_boxes", dim);
    if (!set.classes.emplace(m.class_id, std::move(m)).second) {
      detail::malformed(where + ".class", "duplicate class id");
    }
  }
  return set;
}

inline MonitorSet deserialize_monitor(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::MalformedMonitorFile,
                "line " + std::to_string(detail::line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1)) + ": " + e.what());
  }
  return monitor_from_json(j);
}

}  // namespace boxmon
