// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "biofusion/eval/evaluate.hpp"
#include "biofusion/fusion/model.hpp"

namespace biofusion::eval {

/// Maps a QA record onto a model entity: SMILES → molecule graph, sequence →
/// protein, context/none → text-only. Without modality encoders, molecule and
/// protein payloads are passed as inline text between the markers.
fusion::Entity entity_for(const fusion::FusionModel& model, const data::QaRecord& record);

/// Question text for a record, with any context prepended.
std::string question_for(const data::QaRecord& record);

class ModelAnswerer : public Answerer {
 public:
  ModelAnswerer(const fusion::FusionModel& model, text::DecodingConfig decoding)
      : model_(model), decoding_(decoding) {}
  std::string answer(const data::QaRecord& record) const override;

 private:
  const fusion::FusionModel& model_;
  text::DecodingConfig decoding_;
};

/// Option likelihood under the text-only prompt: the question is preceded by
/// the record's context when present.
class ModelOptionScorer : public OptionScorer {
 public:
  explicit ModelOptionScorer(const fusion::FusionModel& model) : model_(model) {}
  std::vector<double> option_token_logprobs(const data::McqRecord& record, std::size_t option) const override;

 private:
  const fusion::FusionModel& model_;
};

}  // namespace biofusion::eval
