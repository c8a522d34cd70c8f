// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#include "biofusion/data/mcq.hpp"

#include <map>
#include <set>

#include "biofusion/core/errors.hpp"
#include "biofusion/data/jsonl.hpp"

namespace biofusion::data {
namespace {

void check_record(const McqRecord& r, std::size_t line) {
  if (r.options.size() < 2) throw SchemaError("need at least 2 options", line);
  std::set<std::string> distinct(r.options.begin(), r.options.end());
  if (distinct.size() != r.options.size()) throw SchemaError("options must be distinct", line);
  if (r.gold >= r.options.size()) throw SchemaError("gold index out of range", line);
}

std::optional<std::string> read_context(const nlohmann::json& row, std::size_t line) {
  auto it = row.find("context");
  if (it == row.end() || it->is_null()) return std::nullopt;
  if (it->is_string()) return it->get<std::string>();
  if (it->is_array()) {
    std::string joined;
    for (const auto& part : *it) {
      if (!part.is_string()) throw SchemaError("context entries must be strings", line);
      if (!joined.empty()) joined += ' ';
      joined += part.get<std::string>();
    }
    return joined;
  }
  throw SchemaError("field 'context' must be a string or array of strings", line);
}

McqRecord medmcqa_row(const nlohmann::json& row, std::size_t line) {
  McqRecord r;
  r.question = require_string(row, "question", line);
  auto it = row.find("options");
  if (it == row.end()) throw SchemaError("missing field 'options'", line);
  if (!it->is_array()) throw SchemaError("field 'options' must be an array", line);
  for (const auto& o : *it) {
    if (!o.is_string()) throw SchemaError("options must be strings", line);
    r.options.push_back(o.get<std::string>());
  }
  const auto gold = require_int(row, "gold", line);
  if (gold < 0) throw SchemaError("gold index out of range", line);
  r.gold = static_cast<std::size_t>(gold);
  r.context = read_context(row, line);
  return r;
}

McqRecord pubmedqa_row(const nlohmann::json& row, std::size_t line) {
  McqRecord r;
  r.question = require_string(row, "question", line);
  r.context = read_context(row, line);
  if (!r.context) throw SchemaError("missing field 'context'", line);
  r.options = {"yes", "no", "maybe"};
  const std::string answer = require_string(row, "answer", line);
  if (answer == "yes") {
    r.gold = 0;
  } else if (answer == "no") {
    r.gold = 1;
  } else if (answer == "maybe") {
    r.gold = 2;
  } else {
    throw SchemaError("answer must be yes, no or maybe", line);
  }
  return r;
}

McqRecord usmle_row(const nlohmann::json& row, std::size_t line) {
  McqRecord r;
  r.question = require_string(row, "question", line);
  auto it = row.find("options");
  if (it == row.end()) throw SchemaError("missing field 'options'", line);
  if (!it->is_object()) throw SchemaError("field 'options' must be an object", line);
  std::map<std::string, std::string> by_key;
  for (auto o = it->begin(); o != it->end(); ++o) {
    if (!o.value().is_string()) throw SchemaError("options must be strings", line);
    by_key[o.key()] = o.value().get<std::string>();
  }
  const std::string answer = require_string(row, "answer_idx", line);
  std::size_t index = 0;
  bool found = false;
  for (const auto& [key, text] : by_key) {
    if (key == answer) {
      r.gold = index;
      found = true;
    }
    r.options.push_back(text);
    ++index;
  }
  if (!found) throw SchemaError("answer_idx '" + answer + "' is not an option key", line);
  r.context = read_context(row, line);
  return r;
}

}  // namespace

McqFormat parse_mcq_format(std::string_view name) {
  if (name == "medmcqa-like") return McqFormat::kMedMcqaLike;
  if (name == "pubmedqa-like") return McqFormat::kPubMedQaLike;
  if (name == "usmle-like") return McqFormat::kUsmleLike;
  throw UsageError("unknown MCQ format '" + std::string(name) + "'");
}

std::vector<McqRecord> load_mcq_benchmark(const std::string& path, McqFormat format) {
  std::vector<McqRecord> records;
  read_jsonl(path, [&](const nlohmann::json& row, std::size_t line) {
    McqRecord r;
    switch (format) {
      case McqFormat::kMedMcqaLike: r = medmcqa_row(row, line); break;
      case McqFormat::kPubMedQaLike: r = pubmedqa_row(row, line); break;
      case McqFormat::kUsmleLike: r = usmle_row(row, line); break;
    }
    check_record(r, line);
    records.push_back(std::move(r));
  });
  return records;
}

void save_mcq(const std::string& path, const std::vector<McqRecord>& records) {
  std::vector<OrderedJson> rows;
  for (const auto& r : records) {
    OrderedJson j;
    j["question"] = r.question;
    j["options"] = r.options;
    j["gold"] = r.gold;
    if (r.context) j["context"] = *r.context;
    rows.push_back(std::move(j));
  }
  write_jsonl(path, rows);
}

}  // namespace biofusion::data
