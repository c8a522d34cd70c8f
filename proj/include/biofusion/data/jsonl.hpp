// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace biofusion::data {

using OrderedJson = nlohmann::ordered_json;

/// Calls `row(object, line_number)` for every non-blank line of a JSONL file.
/// Line numbers are 1-based. Throws IoError if the file cannot be opened and
/// SchemaError for malformed JSON or non-object lines.
void read_jsonl(const std::string& path,
                const std::function<void(const nlohmann::json&, std::size_t)>& row);

/// Writes one compact object per line, '\n' terminated. Throws IoError.
void write_jsonl(const std::string& path, const std::vector<OrderedJson>& rows);

/// Field accessors that raise SchemaError(line) on a missing or mistyped key.
std::string require_string(const nlohmann::json& obj, const char* key, std::size_t line);
std::int64_t require_int(const nlohmann::json& obj, const char* key, std::size_t line);
/// Absent or null → "".
std::string optional_string(const nlohmann::json& obj, const char* key, std::size_t line);

/// Per-stage record accounting. Invariant: in == out + sum(drops).
struct StageStats {
  std::string stage;
  std::size_t in = 0;
  std::size_t out = 0;
  std::map<std::string, std::size_t> drops;
  std::map<std::string, std::size_t> extra;

  std::size_t dropped() const;
  bool conserved() const { return in == out + dropped(); }
  OrderedJson to_json() const;
};

/// Stats manifest: ordered stages plus named totals (token counts etc.).
struct StatsManifest {
  std::vector<StageStats> stages;
  std::map<std::string, std::size_t> totals;

  OrderedJson to_json() const;
  void write(const std::string& path) const;
};

}  // namespace biofusion::data
