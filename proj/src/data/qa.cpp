// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#include "biofusion/data/qa.hpp"

#include <cmath>
#include <map>
#include <set>

#include "biofusion/chem/molecular_graph.hpp"
#include "biofusion/core/errors.hpp"
#include "biofusion/core/parallel.hpp"
#include "biofusion/core/rng.hpp"
#include "biofusion/protein/sequence.hpp"

namespace biofusion::data {
namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

bool blank(const std::optional<std::string>& s) {
  if (!s) return true;
  for (char c : *s) {
    if (!is_space(c)) return false;
  }
  return true;
}

std::optional<std::string> annotation(const nlohmann::json& row, const char* key, std::size_t line) {
  auto it = row.find(key);
  if (it == row.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw SchemaError(std::string("field '") + key + "' must be a string", line);
  return it->get<std::string>();
}

std::string id_field(const nlohmann::json& row, const char* key, std::size_t line) {
  auto it = row.find(key);
  if (it != row.end() && it->is_number_integer()) return std::to_string(it->get<std::int64_t>());
  return require_string(row, key, line);
}

}  // namespace

std::size_t count_words(std::string_view text) {
  std::size_t words = 0;
  bool inside = false;
  for (char c : text) {
    if (is_space(c)) {
      inside = false;
    } else if (!inside) {
      inside = true;
      ++words;
    }
  }
  return words;
}

std::string crop_words(std::string_view text, std::size_t max_words) {
  std::size_t words = 0;
  bool inside = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (is_space(text[i])) {
      if (inside && words == max_words) return std::string(text.substr(0, i));
      inside = false;
    } else if (!inside) {
      inside = true;
      ++words;
    }
  }
  return std::string(text);
}

BuildResult build_pubchemqa(const std::vector<RawMoleculeText>& raw) {
  BuildResult result;
  result.stats.stage = "build_pubchemqa";
  result.stats.in = raw.size();
  result.stats.drops = {{"smiles_parse", 0}, {"short_description", 0}};

  // Parsing is the only per-row cost worth spreading out; slot i keeps order.
  std::vector<std::string> parse_errors(raw.size());
  parallel_for(raw.size(), [&](std::size_t i) {
    try {
      chem::parse_smiles(raw[i].smiles);
    } catch (const Error& e) {
      parse_errors[i] = e.what();
      if (parse_errors[i].empty()) parse_errors[i] = "parse failure";
    }
  });

  std::map<std::string, std::size_t> per_cid;
  std::size_t cropped = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto& row = raw[i];
    if (!parse_errors[i].empty()) {
      ++result.stats.drops["smiles_parse"];
      result.log.push_back("cid " + row.cid + ": dropped, " + parse_errors[i]);
      continue;
    }
    const std::size_t words = count_words(row.description);
    if (words < kMinDescriptionWords) {
      ++result.stats.drops["short_description"];
      result.log.push_back("cid " + row.cid + ": dropped, description has " +
                           std::to_string(words) + " words");
      continue;
    }
    QaRecord rec;
    rec.record_id = row.cid + ":" + std::to_string(per_cid[row.cid]++);
    rec.entity_id = row.cid;
    rec.entity_kind = EntityKind::kSmiles;
    rec.entity = row.smiles;
    rec.question = std::string(kMoleculeQuestion);
    if (words > kMaxDescriptionWords) {
      rec.answer = crop_words(row.description, kMaxDescriptionWords);
      ++cropped;
    } else {
      rec.answer = row.description;
    }
    result.records.push_back(std::move(rec));
  }
  result.stats.out = result.records.size();
  result.stats.extra = {
      {"unique_molecules", per_cid.size()}, {"pairs", result.records.size()}, {"cropped", cropped}};
  return result;
}

BuildResult build_uniprotqa(const std::vector<RawProteinEntry>& raw) {
  BuildResult result;
  result.stats.stage = "build_uniprotqa";
  result.stats.in = raw.size();
  result.stats.drops = {{"invalid_sequence", 0}, {"no_annotation", 0}};
  std::size_t proteins = 0;
  for (const auto& entry : raw) {
    std::string residues;
    try {
      residues = protein::validate_sequence(entry.sequence).residues();
    } catch (const Error& e) {
      ++result.stats.drops["invalid_sequence"];
      result.log.push_back("accession " + entry.accession + ": dropped, " + e.what());
      continue;
    }
    const std::array<const std::optional<std::string>*, 4> fields = {
        &entry.function, &entry.official_name, &entry.family, &entry.subcellular_location};
    std::size_t emitted = 0;
    for (std::size_t t = 0; t < fields.size(); ++t) {
      if (blank(*fields[t])) continue;
      QaRecord rec;
      rec.record_id = entry.accession + ":" + std::string(kProteinQuestions[t].type);
      rec.entity_id = entry.accession;
      rec.entity_kind = EntityKind::kProtein;
      rec.entity = residues;
      rec.question = std::string(kProteinQuestions[t].question);
      rec.answer = **fields[t];
      rec.question_type = std::string(kProteinQuestions[t].type);
      result.records.push_back(std::move(rec));
      ++emitted;
    }
    if (emitted == 0) {
      ++result.stats.drops["no_annotation"];
      result.log.push_back("accession " + entry.accession + ": dropped, no annotations");
    } else {
      ++proteins;
    }
  }
  // Stage counts entries; records fan out per annotation.
  result.stats.out = proteins;
  result.stats.extra = {{"proteins", proteins}, {"qa_samples", result.records.size()}};
  return result;
}

std::vector<QaRecord> split_dataset(std::vector<QaRecord> records, std::array<double, 3> ratios,
                                    std::uint64_t seed) {
  double sum = 0.0;
  for (double r : ratios) {
    if (!std::isfinite(r) || r < 0.0) throw ConfigError("split ratios must be finite and >= 0");
    sum += r;
  }
  if (sum <= 0.0) throw ConfigError("split ratios must not all be zero");

  std::vector<std::string> group_keys;
  std::map<std::string, std::size_t> group_of;
  std::vector<std::size_t> record_group(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::string key = records[i].entity_id.empty() ? "\x01record:" + records[i].record_id + ":" +
                                                               std::to_string(i)
                                                         : records[i].entity_id;
    auto [it, inserted] = group_of.emplace(key, group_keys.size());
    if (inserted) group_keys.push_back(key);
    record_group[i] = it->second;
  }

  const std::size_t groups = group_keys.size();
  std::vector<std::size_t> order(groups);
  for (std::size_t g = 0; g < groups; ++g) order[g] = g;
  Rng rng(seed);
  rng.shuffle(order);

  const auto n_val = static_cast<std::size_t>(std::floor(groups * (ratios[1] / sum)));
  const auto n_test = static_cast<std::size_t>(std::floor(groups * (ratios[2] / sum)));
  const std::size_t n_train = groups - n_val - n_test;
  std::vector<std::size_t> split_of(groups);
  for (std::size_t k = 0; k < groups; ++k) {
    split_of[order[k]] = k < n_train ? 0 : (k < n_train + n_val ? 1 : 2);
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    records[i].split = std::string(kSplitNames[split_of[record_group[i]]]);
  }
  return records;
}

std::vector<RawMoleculeText> load_raw_molecules(const std::string& path) {
  std::vector<RawMoleculeText> rows;
  read_jsonl(path, [&](const nlohmann::json& row, std::size_t line) {
    rows.push_back({id_field(row, "cid", line), require_string(row, "smiles", line),
                    require_string(row, "description", line)});
  });
  return rows;
}

std::vector<RawProteinEntry> load_raw_proteins(const std::string& path) {
  std::vector<RawProteinEntry> rows;
  read_jsonl(path, [&](const nlohmann::json& row, std::size_t line) {
    RawProteinEntry e;
    e.accession = require_string(row, "accession", line);
    e.sequence = require_string(row, "sequence", line);
    e.function = annotation(row, "function", line);
    e.official_name = annotation(row, "official_name", line);
    e.family = annotation(row, "family", line);
    e.subcellular_location = annotation(row, "subcellular_location", line);
    rows.push_back(std::move(e));
  });
  return rows;
}

OrderedJson pubchemqa_to_json(const QaRecord& r) {
  OrderedJson j;
  j["cid"] = r.entity_id;
  j["smiles"] = r.entity;
  j["question"] = r.question;
  j["answer"] = r.answer;
  j["split"] = r.split;
  return j;
}

OrderedJson uniprotqa_to_json(const QaRecord& r) {
  OrderedJson j;
  j["accession"] = r.entity_id;
  j["sequence"] = r.entity;
  j["question_type"] = r.question_type;
  j["question"] = r.question;
  j["answer"] = r.answer;
  j["split"] = r.split;
  return j;
}

void save_pubchemqa(const std::string& path, const std::vector<QaRecord>& records) {
  std::vector<OrderedJson> rows;
  for (const auto& r : records) rows.push_back(pubchemqa_to_json(r));
  write_jsonl(path, rows);
}

void save_uniprotqa(const std::string& path, const std::vector<QaRecord>& records) {
  std::vector<OrderedJson> rows;
  for (const auto& r : records) rows.push_back(uniprotqa_to_json(r));
  write_jsonl(path, rows);
}

std::vector<QaRecord> load_pubchemqa(const std::string& path) {
  std::vector<QaRecord> records;
  std::map<std::string, std::size_t> per_cid;
  read_jsonl(path, [&](const nlohmann::json& row, std::size_t line) {
    QaRecord r;
    r.entity_id = id_field(row, "cid", line);
    r.record_id = r.entity_id + ":" + std::to_string(per_cid[r.entity_id]++);
    r.entity_kind = EntityKind::kSmiles;
    r.entity = require_string(row, "smiles", line);
    r.question = require_string(row, "question", line);
    r.answer = require_string(row, "answer", line);
    r.split = optional_string(row, "split", line);
    if (!r.split.empty() && r.answer.empty()) throw SchemaError("empty answer in a split record", line);
    records.push_back(std::move(r));
  });
  return records;
}

std::vector<QaRecord> load_uniprotqa(const std::string& path) {
  std::vector<QaRecord> records;
  read_jsonl(path, [&](const nlohmann::json& row, std::size_t line) {
    QaRecord r;
    r.entity_id = require_string(row, "accession", line);
    r.question_type = require_string(row, "question_type", line);
    r.record_id = r.entity_id + ":" + r.question_type;
    r.entity_kind = EntityKind::kProtein;
    r.entity = require_string(row, "sequence", line);
    r.question = require_string(row, "question", line);
    r.answer = require_string(row, "answer", line);
    r.split = optional_string(row, "split", line);
    if (!r.split.empty() && r.answer.empty()) throw SchemaError("empty answer in a split record", line);
    records.push_back(std::move(r));
  });
  return records;
}

}  // namespace biofusion::data
