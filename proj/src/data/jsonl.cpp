// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#include "biofusion/data/jsonl.hpp"

#include <fstream>

#include "biofusion/core/errors.hpp"

namespace biofusion::data {

void read_jsonl(const std::string& path,
                const std::function<void(const nlohmann::json&, std::size_t)>& row) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError(std::string("malformed JSON: ") + e.what(), number);
    }
    if (!obj.is_object()) throw SchemaError("expected a JSON object", number);
    row(obj, number);
  }
}

void write_jsonl(const std::string& path, const std::vector<OrderedJson>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  for (const auto& r : rows) out << r.dump(-1, ' ', false, OrderedJson::error_handler_t::replace) << '\n';
  if (!out) throw IoError("write failed for " + path);
}

std::string require_string(const nlohmann::json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(std::string("missing field '") + key + "'", line);
  if (!it->is_string()) throw SchemaError(std::string("field '") + key + "' must be a string", line);
  return it->get<std::string>();
}

std::int64_t require_int(const nlohmann::json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(std::string("missing field '") + key + "'", line);
  if (!it->is_number_integer()) {
    throw SchemaError(std::string("field '") + key + "' must be an integer", line);
  }
  return it->get<std::int64_t>();
}

std::string optional_string(const nlohmann::json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_string()) throw SchemaError(std::string("field '") + key + "' must be a string", line);
  return it->get<std::string>();
}

std::size_t StageStats::dropped() const {
  std::size_t total = 0;
  for (const auto& [reason, n] : drops) total += n;
  return total;
}

OrderedJson StageStats::to_json() const {
  OrderedJson j;
  j["stage"] = stage;
  j["in"] = in;
  j["out"] = out;
  j["dropped"] = dropped();
  OrderedJson d = OrderedJson::object();
  for (const auto& [reason, n] : drops) d[reason] = n;
  j["drops"] = d;
  for (const auto& [key, n] : extra) j[key] = n;
  return j;
}

OrderedJson StatsManifest::to_json() const {
  OrderedJson j;
  j["stages"] = OrderedJson::array();
  for (const auto& s : stages) j["stages"].push_back(s.to_json());
  OrderedJson t = OrderedJson::object();
  for (const auto& [key, n] : totals) t[key] = n;
  j["totals"] = t;
  return j;
}

void StatsManifest::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << to_json().dump(2) << '\n';
}

}  // namespace biofusion::data
