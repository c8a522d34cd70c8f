// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "biofusion/data/mcq.hpp"
#include "biofusion/data/qa.hpp"
#include "biofusion/eval/metrics.hpp"

namespace biofusion::eval {

/// Scores an option by the log-probabilities of its tokens given the record's
/// context and question.
class OptionScorer {
 public:
  virtual ~OptionScorer() = default;
  virtual std::vector<double> option_token_logprobs(const data::McqRecord& record,
                                                    std::size_t option) const = 0;
};

struct McqEvalReport {
  double accuracy = 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;
  std::vector<std::size_t> predictions;
  /// Length-normalized log-likelihood per option, per record.
  std::vector<std::vector<double>> option_scores;

  nlohmann::ordered_json to_json() const;
};

/// Mean token log-probability; -inf for an option with no tokens.
double length_normalized(const std::vector<double>& token_logprobs);

/// Predicts the highest length-normalized option (ties to the lowest index).
/// Throws EmptyInputError for an empty record set.
McqEvalReport mcq_accuracy(const OptionScorer& scorer, const std::vector<data::McqRecord>& records);

/// Produces an answer for a QA record. Must be callable from several threads.
class Answerer {
 public:
  virtual ~Answerer() = default;
  virtual std::string answer(const data::QaRecord& record) const = 0;
};

struct GenEvalReport {
  GenScores scores;
  std::size_t samples = 0;
  std::size_t failures = 0;
  std::vector<std::string> failure_log;

  nlohmann::ordered_json to_json() const;
};

/// Answers every record, logs and skips records whose answer throws, then
/// scores the rest. When `predictions_path` is set, writes one
/// {"record_id","prediction","gold"} line per scored record in input order.
/// Throws EmptyInputError when no record could be scored.
GenEvalReport gen_eval(const Answerer& answerer, const std::vector<data::QaRecord>& records,
                       const std::optional<std::string>& predictions_path = std::nullopt);

}  // namespace biofusion::eval
