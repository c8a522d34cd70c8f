// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "biofusion/chem/gin.hpp"
#include "biofusion/core/optim.hpp"
#include "biofusion/fusion/adaptor.hpp"
#include "biofusion/fusion/prompt.hpp"
#include "biofusion/protein/encoder.hpp"
#include "biofusion/text/lm.hpp"

namespace biofusion::fusion {

inline constexpr std::string_view kLmGroup = "lm";
inline constexpr std::string_view kMoleculeEncoderGroup = "mol_encoder";
inline constexpr std::string_view kProteinEncoderGroup = "prot_encoder";
inline constexpr std::string_view kMoleculeAdaptorGroup = "mol_adaptor";
inline constexpr std::string_view kProteinAdaptorGroup = "prot_adaptor";
inline constexpr std::string_view kModalityGroups[] = {kMoleculeEncoderGroup, kProteinEncoderGroup,
                                                       kMoleculeAdaptorGroup, kProteinAdaptorGroup};

struct ModelConfig {
  text::LmConfig lm;
  chem::GinConfig molecule;
  protein::ProteinEncoderConfig protein;
};

/// Entity text placed verbatim between the modality markers; the text-only
/// route for a model without modality encoders.
struct InlineEntityText {
  Modality modality = Modality::kMolecule;
  std::string text;
};

using Entity = std::variant<std::monostate, chem::MolecularGraph, protein::ProteinSequence, InlineEntityText>;

struct QaSample {
  Entity entity;
  std::string question;
  std::string answer;
};

/// Language model, molecule and protein encoders, and their adaptors, with all
/// parameters in one ParamStore (groups: lm, mol_encoder, prot_encoder,
/// mol_adaptor, prot_adaptor).
class FusionModel {
 public:
  FusionModel(ModelConfig config, text::Tokenizer tokenizer);

  void init_language_model(Rng& rng);
  /// Adds freshly initialized encoders and adaptors.
  void init_modalities(Rng& rng);
  bool has_language_model() const;
  bool has_modalities() const;

  const ModelConfig& config() const { return config_; }
  const text::Tokenizer& tokenizer() const { return tokenizer_; }
  const text::DecoderLm& lm() const { return lm_; }
  const chem::GinEncoder& molecule_encoder() const { return molecule_encoder_; }
  const protein::ProteinEncoder& protein_encoder() const { return protein_encoder_; }
  const ModalityAdaptor& molecule_adaptor() const { return molecule_adaptor_; }
  const ModalityAdaptor& protein_adaptor() const { return protein_adaptor_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  static const PromptTemplate& template_for(const Entity& entity);

  /// Number of modality rows the entity contributes before context truncation.
  std::size_t modality_rows(const Entity& entity) const;

  /// Layout for the entity's template. When the prompt overflows the context,
  /// modality rows are dropped from the end; the question is never cut.
  PromptLayout layout(const Entity& entity, std::string_view question, const std::optional<std::string>& answer) const;

  struct SampleLoss {
    ad::Var nll_sum;
    std::size_t targets = 0;
  };
  /// Summed answer-token negative log-likelihood of one sample on `bind`'s tape.
  SampleLoss sample_nll(const ad::Binder& bind, const QaSample& sample) const;

  /// Pooled masked loss (mean over all answer tokens + EOS) without training.
  double evaluate_loss(std::span<const QaSample> samples) const;

  FusedPromptBatch assemble(const Entity& entity, std::string_view question,
                            const std::optional<std::string>& answer) const;

  /// Greedy/temperature answer for an inference prompt.
  std::string answer_question(const Entity& entity, std::string_view question,
                              const text::DecodingConfig& decoding) const;

  /// Log-probability of each answer token (EOS excluded) given the prompt.
  std::vector<double> answer_token_logprobs(const Entity& entity, std::string_view question,
                                            std::string_view answer) const;

 private:
  std::optional<ad::Var> modality_forward(const ad::Binder& bind, const Entity& entity, std::size_t rows) const;

  ModelConfig config_;
  text::Tokenizer tokenizer_;
  text::DecoderLm lm_;
  chem::GinEncoder molecule_encoder_;
  protein::ProteinEncoder protein_encoder_;
  ModalityAdaptor molecule_adaptor_;
  ModalityAdaptor protein_adaptor_;
  ParamStore params_;
};

enum class Stage { kLanguageModel, kAlign, kQa };

/// Sets freeze annotations: align freezes the LM and trains encoders and
/// adaptors; lm and qa train the LM and freeze every modality group.
void apply_freeze_policy(FusionModel& model, Stage stage);

struct StepResult {
  double loss = 0.0;
  std::size_t target_tokens = 0;
};

/// One optimizer step on encoders and adaptors with the LM frozen. Requires the
/// align freeze annotations (ConfigError otherwise) and audits every frozen
/// group afterwards (FreezeViolationError on any change).
StepResult alignment_train_step(FusionModel& model, Adam& optimizer, std::span<const QaSample> batch);

/// One optimizer step on the LM from text-only samples. Rejects a frozen LM and
/// samples carrying entities with ConfigError.
StepResult qa_finetune_step(FusionModel& model, Adam& optimizer, std::span<const QaSample> batch);

/// Runs `config.total_steps` steps of the stage's step function over shuffled
/// batches and returns the per-step loss trace.
std::vector<double> train_samples(FusionModel& model, Stage stage, std::span<const QaSample> samples,
                                  const TrainConfig& config,
                                  const std::function<void(std::size_t, double)>& on_step = {});

}  // namespace biofusion::fusion
