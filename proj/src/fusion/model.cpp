// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#include "biofusion/fusion/model.hpp"

#include <cmath>
#include <map>
#include <numeric>

#include "biofusion/core/errors.hpp"
#include "biofusion/core/rng.hpp"

namespace biofusion::fusion {

FusionModel::FusionModel(ModelConfig config, text::Tokenizer tokenizer)
    : config_(config),
      tokenizer_(std::move(tokenizer)),
      lm_(config.lm, std::string(kLmGroup)),
      molecule_encoder_(config.molecule, std::string(kMoleculeEncoderGroup)),
      protein_encoder_(config.protein, std::string(kProteinEncoderGroup)),
      molecule_adaptor_(Modality::kMolecule, config.molecule.hidden, config.lm.width),
      protein_adaptor_(Modality::kProtein, config.protein.width, config.lm.width) {
  if (tokenizer_.vocab_size() > config_.lm.vocab_size) {
    throw ConfigError("tokenizer has " + std::to_string(tokenizer_.vocab_size()) + " tokens but the LM vocabulary holds " +
                      std::to_string(config_.lm.vocab_size));
  }
}

void FusionModel::init_language_model(Rng& rng) {
  if (has_language_model()) throw ConfigError("language model already initialized");
  lm_.init(params_, rng);
}

void FusionModel::init_modalities(Rng& rng) {
  if (has_modalities()) throw ConfigError("modality encoders already initialized");
  molecule_encoder_.init(params_, rng);
  protein_encoder_.init(params_, rng);
  molecule_adaptor_.init(params_, rng);
  protein_adaptor_.init(params_, rng);
}

bool FusionModel::has_language_model() const { return params_.has_group(kLmGroup); }

bool FusionModel::has_modalities() const {
  for (auto g : kModalityGroups) {
    if (!params_.has_group(g)) return false;
  }
  return true;
}

const PromptTemplate& FusionModel::template_for(const Entity& entity) {
  if (std::holds_alternative<chem::MolecularGraph>(entity)) return PromptTemplate::molecule();
  if (std::holds_alternative<protein::ProteinSequence>(entity)) return PromptTemplate::protein();
  if (const auto* inl = std::get_if<InlineEntityText>(&entity)) return PromptTemplate::for_modality(inl->modality);
  return PromptTemplate::text();
}

std::size_t FusionModel::modality_rows(const Entity& entity) const {
  if (const auto* g = std::get_if<chem::MolecularGraph>(&entity)) return g->atom_count();
  if (const auto* p = std::get_if<protein::ProteinSequence>(&entity)) return protein_encoder_.output_rows(*p);
  return 0;
}

PromptLayout FusionModel::layout(const Entity& entity, std::string_view question,
                                 const std::optional<std::string>& answer) const {
  const PromptTemplate& tmpl = template_for(entity);
  std::optional<std::string> inline_text;
  if (const auto* inl = std::get_if<InlineEntityText>(&entity)) inline_text = inl->text;
  const std::size_t rows = modality_rows(entity);
  const auto context = static_cast<std::size_t>(config_.lm.context_length);
  try {
    return layout_prompt(tmpl, rows, question, answer, tokenizer_, context, inline_text);
  } catch (const ContextOverflowError& e) {
    if (!e.truncatable()) throw;
    return layout_prompt(tmpl, rows - e.excess(), question, answer, tokenizer_, context, inline_text);
  }
}

std::optional<ad::Var> FusionModel::modality_forward(const ad::Binder& bind, const Entity& entity,
                                                     std::size_t rows) const {
  if (rows == 0) return std::nullopt;
  if (!has_modalities()) throw ConfigError("model has no modality encoders; run the align stage first");
  ad::Var features;
  const ModalityAdaptor* adaptor = nullptr;
  if (const auto* g = std::get_if<chem::MolecularGraph>(&entity)) {
    features = molecule_encoder_.forward(bind, *g);
    adaptor = &molecule_adaptor_;
  } else if (const auto* p = std::get_if<protein::ProteinSequence>(&entity)) {
    features = protein_encoder_.forward(bind, *p);
    adaptor = &protein_adaptor_;
  } else {
    throw ShapeError("entity has no modality encoder");
  }
  const auto available = bind.tape().value(features).rows();
  if (static_cast<Eigen::Index>(rows) < available) {
    features = ad::slice_rows(features, 0, static_cast<Eigen::Index>(rows));
  }
  return adaptor->forward(bind, features);
}

FusionModel::SampleLoss FusionModel::sample_nll(const ad::Binder& bind, const QaSample& sample) const {
  const PromptLayout lay = layout(sample.entity, sample.question, sample.answer);
  const std::optional<ad::Var> modality = modality_forward(bind, sample.entity, lay.modality_count);
  const ad::Var inputs = fuse_embeddings(bind, lm_, lay, modality);
  const ad::Var logits = lm_.forward(bind, inputs);
  const text::LossMask mask = lay.loss_mask();
  SampleLoss out;
  out.nll_sum = ad::masked_nll_sum(logits, lay.targets(), mask);
  out.targets = static_cast<std::size_t>(std::accumulate(mask.begin(), mask.end(), 0));
  return out;
}

double FusionModel::evaluate_loss(std::span<const QaSample> samples) const {
  double nll = 0.0;
  std::size_t count = 0;
  for (const auto& s : samples) {
    ad::Tape tape(false);
    const ad::Binder bind(tape, params_, nullptr);
    const SampleLoss r = sample_nll(bind, s);
    nll += tape.value(r.nll_sum)(0, 0);
    count += r.targets;
  }
  if (count == 0) throw EmptyMaskError("no answer tokens to evaluate");
  return nll / static_cast<double>(count);
}

FusedPromptBatch FusionModel::assemble(const Entity& entity, std::string_view question,
                                       const std::optional<std::string>& answer) const {
  const PromptLayout lay = layout(entity, question, answer);
  ad::Tape tape(false);
  const ad::Binder bind(tape, params_, nullptr);
  const std::optional<ad::Var> modality = modality_forward(bind, entity, lay.modality_count);
  FusedPromptBatch batch;
  batch.embeddings = tape.value(fuse_embeddings(bind, lm_, lay, modality));
  batch.targets = lay.targets();
  batch.mask = lay.loss_mask();
  batch.segments.assign(lay.segments.begin(), lay.segments.begin() + static_cast<std::ptrdiff_t>(lay.input_length()));
  batch.modality_begin = lay.modality_begin;
  batch.modality_count = lay.modality_count;
  batch.tokens = lay.tokens;
  return batch;
}

std::string FusionModel::answer_question(const Entity& entity, std::string_view question,
                                         const text::DecodingConfig& decoding) const {
  const FusedPromptBatch batch = assemble(entity, question, std::nullopt);
  return text::generate(lm_, params_, tokenizer_, batch.embeddings, decoding).text;
}

std::vector<double> FusionModel::answer_token_logprobs(const Entity& entity, std::string_view question,
                                                       std::string_view answer) const {
  const PromptLayout lay = layout(entity, question, std::string(answer));
  ad::Tape tape(false);
  const ad::Binder bind(tape, params_, nullptr);
  const std::optional<ad::Var> modality = modality_forward(bind, entity, lay.modality_count);
  const Matrix logits = tape.value(lm_.forward(bind, fuse_embeddings(bind, lm_, lay, modality)));
  const auto targets = lay.targets();
  std::vector<double> out;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (lay.segments[i + 1] != Segment::kAnswer) continue;
    const auto row = static_cast<Eigen::Index>(i);
    const double mx = logits.row(row).maxCoeff();
    const double lse = mx + std::log((logits.row(row).array() - mx).exp().sum());
    out.push_back(logits(row, targets[i]) - lse);
  }
  return out;
}

void apply_freeze_policy(FusionModel& model, Stage stage) {
  ParamStore& store = model.params();
  const bool align = stage == Stage::kAlign;
  store.set_frozen(std::string(kLmGroup), align);
  for (auto g : kModalityGroups) store.set_frozen(std::string(g), !align);
}

namespace {

StepResult masked_step(FusionModel& model, Adam& optimizer, std::span<const QaSample> batch) {
  if (batch.empty()) throw EmptyInputError("empty training batch");
  ParamStore& store = model.params();
  std::map<std::string, std::uint32_t, std::less<>> frozen_before;
  for (const auto& g : store.frozen_groups()) frozen_before.emplace(g, store.checksum(g));

  store.zero_grad();
  double nll = 0.0;
  std::size_t targets = 0;
  for (const auto& sample : batch) {
    ad::Tape tape;
    const ad::Binder bind(tape, store, &store);
    const auto r = model.sample_nll(bind, sample);
    nll += tape.value(r.nll_sum)(0, 0);
    targets += r.targets;
    tape.backward(r.nll_sum);
  }
  if (targets == 0) throw EmptyMaskError("batch has no answer tokens");
  const double loss = nll / static_cast<double>(targets);
  if (!std::isfinite(loss)) throw NumericError("training loss became non-finite");
  for (auto& p : store.all()) {
    if (!store.is_frozen(p.group)) p.grad /= static_cast<double>(targets);
  }
  optimizer.step(store);

  for (const auto& [group, crc] : frozen_before) {
    if (store.checksum(group) != crc) throw FreezeViolationError("frozen group '" + group + "' changed during a step");
  }
  return {loss, targets};
}

}  // namespace

StepResult alignment_train_step(FusionModel& model, Adam& optimizer, std::span<const QaSample> batch) {
  const ParamStore& store = model.params();
  if (!model.has_modalities()) throw ConfigError("alignment needs modality encoders and adaptors");
  if (!store.is_frozen(kLmGroup)) throw ConfigError("alignment requires the language model to be frozen");
  bool any_trainable = false;
  for (auto g : kModalityGroups) any_trainable = any_trainable || !store.is_frozen(g);
  if (!any_trainable) throw ConfigError("alignment has no trainable encoder or adaptor");
  for (const auto& s : batch) {
    if (std::holds_alternative<std::monostate>(s.entity) || std::holds_alternative<InlineEntityText>(s.entity)) {
      throw ConfigError("alignment samples must carry a molecule or protein");
    }
  }
  return masked_step(model, optimizer, batch);
}

StepResult qa_finetune_step(FusionModel& model, Adam& optimizer, std::span<const QaSample> batch) {
  const ParamStore& store = model.params();
  if (!model.has_language_model()) throw ConfigError("QA fine-tuning needs a language model");
  if (store.is_frozen(kLmGroup)) throw ConfigError("QA fine-tuning requires a trainable language model");
  for (auto g : kModalityGroups) {
    if (store.has_group(g) && !store.is_frozen(g)) {
      throw ConfigError("QA fine-tuning must leave " + std::string(g) + " frozen");
    }
  }
  for (const auto& s : batch) {
    if (std::holds_alternative<chem::MolecularGraph>(s.entity) ||
        std::holds_alternative<protein::ProteinSequence>(s.entity)) {
      throw ConfigError("QA fine-tuning samples must be text-only");
    }
  }
  return masked_step(model, optimizer, batch);
}

std::vector<double> train_samples(FusionModel& model, Stage stage, std::span<const QaSample> samples,
                                  const TrainConfig& config, const std::function<void(std::size_t, double)>& on_step) {
  if (stage == Stage::kLanguageModel) throw ConfigError("the lm stage trains on corpus chunks, not QA samples");
  if (samples.empty()) throw EmptyInputError("no training samples");
  const std::size_t total = config.total_steps(samples.size());
  Adam adam(config.optimizer, total);
  Rng rng(config.seed);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t cursor = order.size();
  const std::size_t batch_size = std::min(static_cast<std::size_t>(config.batch_size), samples.size());

  std::vector<double> trace;
  trace.reserve(total);
  std::vector<QaSample> batch;
  for (std::size_t step = 0; step < total; ++step) {
    batch.clear();
    while (batch.size() < batch_size) {
      if (cursor == order.size()) {
        rng.shuffle(order);
        cursor = 0;
      }
      batch.push_back(samples[order[cursor++]]);
    }
    const StepResult r = stage == Stage::kAlign ? alignment_train_step(model, adam, batch)
                                                : qa_finetune_step(model, adam, batch);
    trace.push_back(r.loss);
    if (on_step) on_step(step, r.loss);
  }
  return trace;
}

}  // namespace biofusion::fusion
