// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "biofusion/data/jsonl.hpp"
#include "biofusion/fusion/model.hpp"
#include "biofusion/harness/checkpoint.hpp"
#include "biofusion/harness/config.hpp"

namespace biofusion::harness {

inline constexpr const char* kLockFileName = ".biofusion.lock";

/// Exclusive ownership of an output directory (created if missing) through a
/// lock file made with O_EXCL. Throws IoError when another run holds it; a
/// crashed run leaves the file behind and it must be removed by hand.
class OutputLock {
 public:
  explicit OutputLock(const std::string& dir);
  ~OutputLock();
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  std::string path_;
};

/// Sets each present group's freeze flag from the stage's list in the config.
void apply_stage_freeze(ParamStore& store, const RunConfig& config, fusion::Stage stage);

/// Training samples for align (molecule/protein entities) or qa (text-only:
/// entities become inline text, MCQ records become question + gold option).
/// Records tagged val/test are skipped.
std::vector<fusion::QaSample> load_stage_samples(const std::vector<DatasetRef>& refs, fusion::Stage stage);

/// Corpus chunks for the lm stage, tokenized with `tokenizer`.
std::vector<std::vector<text::TokenId>> load_lm_chunks(const RunConfig& config, const text::Tokenizer& tokenizer);

struct StageRun {
  CheckpointBundle bundle;
  std::vector<double> loss_trace;
};

/// Runs one stage in memory. align and qa need `prior` (MissingPrerequisiteError
/// otherwise); lm starts from `prior` when given, else from a fresh LM with the
/// tokenizer at config.data.tokenizer. A prior whose model dimensions differ
/// from the config raises ConfigError.
StageRun train_stage(fusion::Stage stage, const RunConfig& config, std::optional<CheckpointBundle> prior,
                     const std::vector<fusion::QaSample>* samples_override = nullptr);

struct StageOptions {
  std::string out_dir;
  std::optional<std::string> from_checkpoint;
};

struct StageOutcome {
  std::string checkpoint_path;
  std::string loss_csv_path;
  std::vector<double> loss_trace;
};

/// train_stage plus files: <out>/<stage>.ckpt, <out>/<stage>_loss.csv
/// ("step,loss") and <out>/<stage>_run.json, under an OutputLock.
StageOutcome run_stage(fusion::Stage stage, const RunConfig& config, const StageOptions& options);

void write_loss_csv(const std::string& path, const std::vector<double>& trace);

/// filter → strip → (chunk when a tokenizer is given). Writes corpus.jsonl,
/// chunks.jsonl and stats.json under out_dir. The allowlist file holds one id
/// per line.
data::StatsManifest build_corpus_files(const std::string& corpus_path, const std::string& allowlist_path,
                                       const std::optional<std::string>& tokenizer_path, int max_tokens,
                                       const std::string& out_dir);

/// Build, split 8:1:1 with `seed`, write <name>.jsonl, stats.json and drops.log.
data::StatsManifest build_pubchemqa_files(const std::string& raw_path, std::uint64_t seed, const std::string& out_dir);
data::StatsManifest build_uniprotqa_files(const std::string& raw_path, std::uint64_t seed, const std::string& out_dir);

/// Trains on every string value found in the JSONL inputs plus the prompt
/// template texts, and writes the tokenizer JSON.
text::Tokenizer train_tokenizer_files(const std::vector<std::string>& inputs, int vocab_size,
                                      const std::string& out_path);

text::Tokenizer load_tokenizer(const std::string& path);

}  // namespace biofusion::harness
