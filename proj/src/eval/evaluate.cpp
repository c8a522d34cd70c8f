// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#include "biofusion/eval/evaluate.hpp"

#include <cmath>
#include <limits>

#include "biofusion/core/errors.hpp"
#include "biofusion/core/parallel.hpp"
#include "biofusion/data/jsonl.hpp"

namespace biofusion::eval {

double length_normalized(const std::vector<double>& token_logprobs) {
  if (token_logprobs.empty()) return -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (double lp : token_logprobs) sum += lp;
  return sum / static_cast<double>(token_logprobs.size());
}

McqEvalReport mcq_accuracy(const OptionScorer& scorer, const std::vector<data::McqRecord>& records) {
  if (records.empty()) throw EmptyInputError("no MCQ records to score");
  McqEvalReport report;
  report.total = records.size();
  for (const auto& rec : records) {
    std::vector<double> scores;
    std::size_t best = 0;
    for (std::size_t o = 0; o < rec.options.size(); ++o) {
      scores.push_back(length_normalized(scorer.option_token_logprobs(rec, o)));
      if (scores[o] > scores[best]) best = o;
    }
    if (best == rec.gold) ++report.correct;
    report.predictions.push_back(best);
    report.option_scores.push_back(std::move(scores));
  }
  report.accuracy = static_cast<double>(report.correct) / static_cast<double>(report.total);
  return report;
}

nlohmann::ordered_json McqEvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["accuracy"] = accuracy;
  j["correct"] = correct;
  j["total"] = total;
  j["predictions"] = predictions;
  auto scores = nlohmann::ordered_json::array();
  for (const auto& row : option_scores) {
    auto r = nlohmann::ordered_json::array();
    // -inf is not representable in JSON.
    for (double s : row) r.push_back(std::isfinite(s) ? nlohmann::ordered_json(s) : nlohmann::ordered_json(nullptr));
    scores.push_back(r);
  }
  j["option_scores"] = scores;
  return j;
}

nlohmann::ordered_json GenEvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["bleu2"] = scores.bleu2;
  j["bleu4"] = scores.bleu4;
  j["rouge1"] = scores.rouge1;
  j["rouge2"] = scores.rouge2;
  j["rougeL"] = scores.rougeL;
  j["meteor"] = scores.meteor;
  j["meteor_variant"] = "exact-match";
  j["samples"] = samples;
  j["failures"] = failures;
  j["failure_log"] = failure_log;
  return j;
}

GenEvalReport gen_eval(const Answerer& answerer, const std::vector<data::QaRecord>& records,
                       const std::optional<std::string>& predictions_path) {
  if (records.empty()) throw EmptyInputError("no QA records to evaluate");
  std::vector<std::string> predictions(records.size());
  std::vector<std::string> errors(records.size());
  parallel_for(records.size(), [&](std::size_t i) {
    try {
      predictions[i] = answerer.answer(records[i]);
    } catch (const std::exception& e) {
      errors[i] = e.what();
      if (errors[i].empty()) errors[i] = "answer failed";
    }
  });

  GenEvalReport report;
  std::vector<std::string> candidates, references;
  std::vector<data::OrderedJson> rows;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!errors[i].empty()) {
      ++report.failures;
      report.failure_log.push_back(records[i].record_id + ": " + errors[i]);
      continue;
    }
    candidates.push_back(predictions[i]);
    references.push_back(records[i].answer);
    data::OrderedJson row;
    row["record_id"] = records[i].record_id;
    row["prediction"] = predictions[i];
    row["gold"] = records[i].answer;
    rows.push_back(std::move(row));
  }
  if (candidates.empty()) throw EmptyInputError("every record failed; nothing to score");
  report.samples = candidates.size();
  report.scores = score_generation(candidates, references);
  if (predictions_path) data::write_jsonl(*predictions_path, rows);
  return report;
}

}  // namespace biofusion::eval
