// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#include "biofusion/text/lm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "biofusion/core/errors.hpp"
#include "biofusion/core/rng.hpp"

namespace biofusion::text {
namespace {

TransformerStackConfig stack_config(const LmConfig& c) {
  return {.blocks = c.blocks, .width = c.width, .heads = c.heads, .ff_width = c.ff_width, .causal = true};
}

}  // namespace

DecoderLm::DecoderLm(LmConfig config, std::string group)
    : config_(config), group_(group), stack_(stack_config(config), group, group) {
  if (config_.vocab_size < kBaseVocabSize) {
    throw ConfigError("LM vocab_size must be at least " + std::to_string(kBaseVocabSize));
  }
  if (config_.context_length < 2) throw ConfigError("context_length must be at least 2");
}

void DecoderLm::init(ParamStore& store, Rng& rng) const {
  init_normal(store.add(token_embedding_name(), group_, config_.vocab_size, config_.width), rng,
              1.0 / std::sqrt(static_cast<double>(config_.width)));
  init_normal(store.add(group_ + ".position_embedding", group_, config_.context_length, config_.width), rng, 0.02);
  stack_.init(store, rng);
}

void DecoderLm::check_params(const ParamStore& store) const {
  const Matrix& tok = store.get(token_embedding_name()).value;
  if (tok.rows() != config_.vocab_size || tok.cols() != config_.width) throw ShapeError("LM token embedding shape mismatch");
  const Matrix& pos = store.get(group_ + ".position_embedding").value;
  if (pos.rows() != config_.context_length || pos.cols() != config_.width) {
    throw ShapeError("LM position embedding shape mismatch");
  }
  stack_.check_params(store);
}

ad::Var DecoderLm::embed(const ad::Binder& bind, std::span<const TokenId> ids) const {
  return ad::gather_rows(bind(token_embedding_name()), ids);
}

ad::Var DecoderLm::forward(const ad::Binder& bind, ad::Var inputs) const {
  const Matrix& x = bind.tape().value(inputs);
  if (x.rows() < 1) throw ShapeError("LM input is empty");
  if (x.rows() > config_.context_length) {
    throw ShapeError("LM input length " + std::to_string(x.rows()) + " exceeds context length " +
                     std::to_string(config_.context_length));
  }
  if (x.cols() != config_.width) throw ShapeError("LM input width " + std::to_string(x.cols()) + " != " + std::to_string(config_.width));
  check_params(bind.store());
  std::vector<TokenId> positions(static_cast<std::size_t>(x.rows()));
  std::iota(positions.begin(), positions.end(), TokenId{0});
  const ad::Var h = ad::add(inputs, ad::gather_rows(bind(group_ + ".position_embedding"), positions));
  return ad::matmul_nt(stack_.forward(bind, h), bind(token_embedding_name()));
}

Matrix DecoderLm::logits(const ParamStore& store, const Matrix& inputs) const {
  ad::Tape tape(false);
  const ad::Binder bind(tape, store, nullptr);
  return tape.value(forward(bind, tape.constant(inputs)));
}

Matrix DecoderLm::token_embeddings(const ParamStore& store, std::span<const TokenId> ids) const {
  ad::Tape tape(false);
  const ad::Binder bind(tape, store, nullptr);
  return tape.value(embed(bind, ids));
}

namespace {

std::size_t mask_count(std::span<const std::uint8_t> mask) {
  return static_cast<std::size_t>(std::count_if(mask.begin(), mask.end(), [](std::uint8_t m) { return m != 0; }));
}

}  // namespace

double autoregressive_loss(const Matrix& logits, std::span<const TokenId> targets, std::span<const std::uint8_t> mask) {
  ad::Tape tape(false);
  return tape.value(autoregressive_loss(tape.constant(logits), targets, mask))(0, 0);
}

ad::Var autoregressive_loss(ad::Var logits, std::span<const TokenId> targets, std::span<const std::uint8_t> mask) {
  const std::size_t count = mask_count(mask);
  if (count == 0) throw EmptyMaskError("loss mask selects no positions");
  return ad::scale(ad::masked_nll_sum(logits, targets, mask), 1.0 / static_cast<double>(count));
}

LmTrainResult train_lm(const DecoderLm& lm, ParamStore& store, std::span<const std::vector<TokenId>> chunks,
                       const TrainConfig& config, const std::function<void(std::size_t, double)>& on_step) {
  struct Sequence {
    std::vector<TokenId> inputs;
    std::vector<TokenId> targets;
  };
  std::vector<Sequence> sequences;
  const auto limit = static_cast<std::size_t>(lm.config().context_length) + 1;
  for (const auto& chunk : chunks) {
    std::vector<TokenId> full;
    full.reserve(chunk.size() + 2);
    full.push_back(kBos);
    full.insert(full.end(), chunk.begin(), chunk.end());
    full.push_back(kEos);
    if (full.size() > limit) full.resize(limit);
    Sequence s;
    s.inputs.assign(full.begin(), full.end() - 1);
    s.targets.assign(full.begin() + 1, full.end());
    sequences.push_back(std::move(s));
  }
  if (sequences.empty()) throw EmptyInputError("no training chunks");

  const std::size_t total = config.total_steps(sequences.size());
  Adam adam(config.optimizer, total);
  Rng rng(config.seed);
  std::vector<std::size_t> order(sequences.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t cursor = order.size();

  LmTrainResult result;
  result.loss_trace.reserve(total);
  const auto batch = static_cast<std::size_t>(config.batch_size);
  for (std::size_t step = 0; step < total; ++step) {
    std::vector<std::size_t> picked;
    while (picked.size() < std::min(batch, sequences.size())) {
      if (cursor == order.size()) {
        rng.shuffle(order);
        cursor = 0;
      }
      picked.push_back(order[cursor++]);
    }
    std::size_t positions = 0;
    for (auto i : picked) positions += sequences[i].targets.size();

    store.zero_grad();
    double loss_sum = 0.0;
    for (auto i : picked) {
      const Sequence& s = sequences[i];
      ad::Tape tape;
      const ad::Binder bind(tape, store, &store);
      const LossMask mask(s.targets.size(), 1);
      const ad::Var nll = ad::masked_nll_sum(lm.forward(bind, lm.embed(bind, s.inputs)), s.targets, mask);
      loss_sum += tape.value(nll)(0, 0);
      tape.backward(ad::scale(nll, 1.0 / static_cast<double>(positions)));
    }
    const double loss = loss_sum / static_cast<double>(positions);
    if (!std::isfinite(loss)) {
      throw NumericError("LM training loss became non-finite at step " + std::to_string(step));
    }
    adam.step(store);
    result.loss_trace.push_back(loss);
    if (on_step) on_step(step, loss);
  }
  return result;
}

Generation generate(const DecoderLm& lm, const ParamStore& store, const Tokenizer& tokenizer, const Matrix& prefix,
                    const DecodingConfig& config) {
  const int context = lm.config().context_length;
  if (prefix.rows() < 1 || prefix.rows() >= context) {
    throw ShapeError("generation prefix length " + std::to_string(prefix.rows()) + " must be in [1, " +
                     std::to_string(context) + ")");
  }
  if (config.temperature < 0.0) throw ConfigError("temperature must be non-negative");
  Rng rng(config.seed);
  Generation out;
  Matrix sequence = prefix;
  const Matrix& table = store.get(lm.token_embedding_name()).value;
  for (int step = 0; step < config.max_new_tokens && sequence.rows() < context; ++step) {
    const Matrix logits = lm.logits(store, sequence);
    const RowVector last = logits.row(logits.rows() - 1);
    TokenId next = 0;
    if (config.temperature == 0.0) {
      Eigen::Index best = 0;
      for (Eigen::Index v = 1; v < last.size(); ++v) {
        if (last(v) > last(best)) best = v;
      }
      next = best;
    } else {
      const RowVector scaled = last / config.temperature;
      const RowVector probs = (scaled.array() - scaled.maxCoeff()).exp();
      double draw = rng.uniform() * probs.sum();
      next = probs.size() - 1;
      for (Eigen::Index v = 0; v < probs.size(); ++v) {
        draw -= probs(v);
        if (draw < 0.0) {
          next = v;
          break;
        }
      }
    }
    if (next == kEos) break;
    out.tokens.push_back(next);
    sequence.conservativeResize(sequence.rows() + 1, Eigen::NoChange);
    sequence.row(sequence.rows() - 1) = table.row(next);
  }
  out.text = tokenizer.decode(out.tokens);
  return out;
}

}  // namespace biofusion::text
