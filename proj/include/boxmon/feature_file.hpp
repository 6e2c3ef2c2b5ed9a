#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "boxmon/error.hpp"
#include "boxmon/monitor.hpp"

namespace boxmon {

/// Parsed feature CSV: `true_label,predicted_label,f_1,...,f_n` per line, no header.
struct FeatureFile {
  std::string path;
  std::vector<FeatureRecord> records;
  std::size_t dim = 0;
  /// One past the largest label seen (or declared).
  int class_count = 0;
};

namespace detail {

[[noreturn]] inline void bad_row(std::size_t row, const std::string& what) {
  throw Error(ErrorCode::MalformedFeatureFile, "row " + std::to_string(row) + ": " + what);
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline int parse_label(std::string_view field, std::size_t row, const char* name) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    bad_row(row, std::string(name) + " \"" + std::string(field) + "\" is not an integer");
  }
  return v;
}

inline double parse_feature(std::string_view field, std::size_t row, std::size_t col) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
    bad_row(row, "column " + std::to_string(col) + " \"" + std::string(field) + "\" is not a number");
  }
  if (!std::isfinite(v)) bad_row(row, "column " + std::to_string(col) + " is not finite");
  return v;
}

}  // namespace detail

/// Parses feature CSV text. Rows are numbered from 1. A declared class_count of 0 means "infer".
inline FeatureFile parse_feature_csv(std::string_view text, int declared_class_count = 0) {
  FeatureFile file;
  std::size_t row = 0;
  std::size_t pos = 0;
  int max_label = -1;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++row;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) {
      if (pos >= text.size()) break;
      detail::bad_row(row, "empty line");
    }

    const auto fields = detail::split_commas(line);
    if (fields.size() < 3) detail::bad_row(row, "expected true_label,predicted_label and at least one feature");
    FeatureRecord rec;
    rec.true_label = detail::parse_label(fields[0], row, "true_label");
    rec.predicted_label = detail::parse_label(fields[1], row, "predicted_label");
    if (rec.true_label < kUnknownLabel) detail::bad_row(row, "true_label must be -1 or a class id");
    if (rec.predicted_label < 0) detail::bad_row(row, "predicted_label must be a class id");
    rec.features.reserve(fields.size() - 2);
    for (std::size_t c = 2; c < fields.size(); ++c) rec.features.push_back(detail::parse_feature(fields[c], row, c + 1));

    if (file.records.empty()) {
      file.dim = rec.features.size();
    } else if (rec.features.size() != file.dim) {
      detail::bad_row(row, "has " + std::to_string(rec.features.size()) + " features, expected " +
                               std::to_string(file.dim));
    }
    max_label = std::max({max_label, rec.true_label, rec.predicted_label});
    file.records.push_back(std::move(rec));
  }

  if (declared_class_count > 0) {
    if (max_label >= declared_class_count) {
      throw Error(ErrorCode::MalformedFeatureFile,
                  "label " + std::to_string(max_label) + " outside [0, " + std::to_string(declared_class_count) + ")");
    }
    file.class_count = declared_class_count;
  } else {
    file.class_count = max_label + 1;
  }
  return file;
}

inline FeatureFile read_feature_file(const std::string& path, int declared_class_count = 0) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  FeatureFile file = parse_feature_csv(buf.str(), declared_class_count);
  file.path = path;
  return file;
}

}  // namespace boxmon
