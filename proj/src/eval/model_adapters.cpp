// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#include "biofusion/eval/model_adapters.hpp"

#include "biofusion/chem/molecular_graph.hpp"
#include "biofusion/protein/sequence.hpp"

namespace biofusion::eval {

fusion::Entity entity_for(const fusion::FusionModel& model, const data::QaRecord& record) {
  switch (record.entity_kind) {
    case data::EntityKind::kSmiles:
      if (!model.has_modalities()) return fusion::InlineEntityText{fusion::Modality::kMolecule, record.entity};
      return chem::parse_smiles(record.entity);
    case data::EntityKind::kProtein:
      if (!model.has_modalities()) return fusion::InlineEntityText{fusion::Modality::kProtein, record.entity};
      return protein::validate_sequence(record.entity);
    case data::EntityKind::kContext:
    case data::EntityKind::kNone:
      break;
  }
  return std::monostate{};
}

std::string question_for(const data::QaRecord& record) {
  if (record.entity_kind == data::EntityKind::kContext && !record.entity.empty()) {
    return record.entity + " " + record.question;
  }
  return record.question;
}

std::string ModelAnswerer::answer(const data::QaRecord& record) const {
  return model_.answer_question(entity_for(model_, record), question_for(record), decoding_);
}

std::vector<double> ModelOptionScorer::option_token_logprobs(const data::McqRecord& record,
                                                             std::size_t option) const {
  const std::string question = record.context ? *record.context + " " + record.question : record.question;
  return model_.answer_token_logprobs(std::monostate{}, question, record.options.at(option));
}

}  // namespace biofusion::eval
