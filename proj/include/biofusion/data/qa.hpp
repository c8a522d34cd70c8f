// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "biofusion/data/jsonl.hpp"

namespace biofusion::data {

enum class EntityKind { kNone, kSmiles, kProtein, kContext };

struct QaRecord {
  std::string record_id;
  /// Grouping key for splits: cid or accession.
  std::string entity_id;
  EntityKind entity_kind = EntityKind::kNone;
  std::string entity;
  std::string question;
  std::string answer;
  std::string question_type;
  std::string split;
};

/// Whitespace-delimited words (maximal runs of non-space bytes).
std::size_t count_words(std::string_view text);

/// Text up to the end of the `max_words`-th word; shorter text is returned as is.
std::string crop_words(std::string_view text, std::size_t max_words);

inline constexpr std::string_view kMoleculeQuestion = "please describe the molecule";
inline constexpr std::size_t kMinDescriptionWords = 4;
inline constexpr std::size_t kMaxDescriptionWords = 256;

struct RawMoleculeText {
  std::string cid;
  std::string smiles;
  std::string description;
};

struct BuildResult {
  std::vector<QaRecord> records;
  StageStats stats;
  std::vector<std::string> log;
};

/// Drops rows whose SMILES does not parse, then rows with fewer than 4 words,
/// crops the rest to 256 words. Record ids are "<cid>:<n>" with n counting
/// earlier records of the same cid. stats.extra holds unique_molecules,
/// pairs and cropped.
BuildResult build_pubchemqa(const std::vector<RawMoleculeText>& raw);

struct RawProteinEntry {
  std::string accession;
  std::string sequence;
  std::optional<std::string> function;
  std::optional<std::string> official_name;
  std::optional<std::string> family;
  std::optional<std::string> subcellular_location;
};

struct QuestionTemplate {
  std::string_view type;
  std::string_view question;
};

inline constexpr std::array<QuestionTemplate, 4> kProteinQuestions = {{
    {"function", "What is the function of this protein?"},
    {"official_name", "What is the official name of this protein?"},
    {"family", "Which protein family does this protein belong to?"},
    {"subcellular_location", "Where is this protein subcellularly located?"},
}};

/// One record per non-blank annotation, in template order. Entries whose
/// sequence fails validation produce no records and one log line.
BuildResult build_uniprotqa(const std::vector<RawProteinEntry>& raw);

inline constexpr std::array<std::string_view, 3> kSplitNames = {"train", "val", "test"};

/// Tags every record with train/val/test. Entity groups (records sharing an
/// entity_id, or a lone record without one) are shuffled with the seed and
/// allocated by floor(groups * ratio) for val and test; the remainder goes to
/// train. Records keep their input order. Throws ConfigError for negative,
/// non-finite or all-zero ratios.
std::vector<QaRecord> split_dataset(std::vector<QaRecord> records,
                                    std::array<double, 3> ratios, std::uint64_t seed);

// JSONL schemas.
std::vector<RawMoleculeText> load_raw_molecules(const std::string& path);
std::vector<RawProteinEntry> load_raw_proteins(const std::string& path);
OrderedJson pubchemqa_to_json(const QaRecord& r);
OrderedJson uniprotqa_to_json(const QaRecord& r);
void save_pubchemqa(const std::string& path, const std::vector<QaRecord>& records);
void save_uniprotqa(const std::string& path, const std::vector<QaRecord>& records);
/// Record ids are rebuilt the same way the builders assign them.
std::vector<QaRecord> load_pubchemqa(const std::string& path);
std::vector<QaRecord> load_uniprotqa(const std::string& path);

}  // namespace biofusion::data
