// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "biofusion/core/optim.hpp"
#include "biofusion/fusion/model.hpp"

namespace biofusion::harness {

/// A QA file and its schema: "pubchemqa", "uniprotqa", or one of the MCQ
/// formats ("medmcqa-like", "pubmedqa-like", "usmle-like"; qa stage only).
struct DatasetRef {
  std::string path;
  std::string format;
};

struct DataConfig {
  /// Tokenizer JSON used when the lm stage starts without a checkpoint.
  std::string tokenizer;
  /// Cleaned corpus JSONL for the lm stage.
  std::string corpus;
  /// 0 means context_length - 1.
  int chunk_max_tokens = 0;
  std::vector<DatasetRef> align_train;
  std::vector<DatasetRef> qa_train;
};

struct RunConfig {
  fusion::ModelConfig model;
  OptimizerConfig optimizer;
  int batch_size = 8;
  int epochs = 1;
  int max_steps = 0;
  std::uint64_t seed = 0;
  /// Frozen groups per stage ("lm", "align", "qa").
  std::map<std::string, std::vector<std::string>> freeze;
  DataConfig data;
  text::DecodingConfig decoding;

  TrainConfig train_config() const;
};

/// Defaults for every field, including the per-stage freeze lists:
/// lm and qa freeze every modality group, align freezes the LM.
RunConfig default_run_config();

/// Unknown keys and mistyped values raise ConfigError; absent keys keep defaults.
RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::ordered_json run_config_to_json(const RunConfig& config);

/// Resolves relative data paths against the config file's directory and validates.
RunConfig load_run_config(const std::string& path);

/// Positive dimensions, heads dividing widths, known group names, align
/// freezing the LM with at least one modality group trainable, lm and qa
/// leaving the LM trainable and every modality group frozen, known dataset
/// formats. Throws ConfigError.
void validate(const RunConfig& config);

/// Hex CRC-32 of the canonical JSON dump.
std::string config_hash(const RunConfig& config);

fusion::Stage parse_stage(std::string_view name);
std::string_view stage_name(fusion::Stage stage);

}  // namespace biofusion::harness
