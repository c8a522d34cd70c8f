// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "biofusion/core/autodiff.hpp"
#include "biofusion/core/optim.hpp"
#include "biofusion/core/transformer.hpp"
#include "biofusion/text/tokenizer.hpp"

namespace biofusion::text {

struct LmConfig {
  int vocab_size = 2048;
  int width = 128;
  int blocks = 4;
  int heads = 4;
  int ff_width = 512;
  int context_length = 256;
};

/// Per-target flag selecting the positions that contribute to the loss.
using LossMask = std::vector<std::uint8_t>;

/// Decoder-only language model over embedding sequences. The output
/// projection is tied to the token embedding table.
class DecoderLm {
 public:
  explicit DecoderLm(LmConfig config, std::string group = "lm");

  const LmConfig& config() const { return config_; }
  const std::string& group() const { return group_; }
  std::string token_embedding_name() const { return group_ + ".token_embedding"; }

  void init(ParamStore& store, Rng& rng) const;
  void check_params(const ParamStore& store) const;

  /// Token embedding rows for `ids` (no positional term).
  ad::Var embed(const ad::Binder& bind, std::span<const TokenId> ids) const;

  /// Next-token logits (T x vocab) for an input embedding sequence (T x width).
  /// Row t depends only on input rows <= t. Throws ShapeError when T exceeds
  /// the context length or the width differs.
  ad::Var forward(const ad::Binder& bind, ad::Var inputs) const;

  Matrix logits(const ParamStore& store, const Matrix& inputs) const;
  Matrix token_embeddings(const ParamStore& store, std::span<const TokenId> ids) const;

 private:
  LmConfig config_;
  std::string group_;
  TransformerStack stack_;
};

/// Mean over masked positions of -log softmax(logits)[target]. Throws
/// EmptyMaskError when no position is selected.
double autoregressive_loss(const Matrix& logits, std::span<const TokenId> targets, std::span<const std::uint8_t> mask);
ad::Var autoregressive_loss(ad::Var logits, std::span<const TokenId> targets, std::span<const std::uint8_t> mask);

struct LmTrainResult {
  std::vector<double> loss_trace;
};

/// Trains on token chunks with loss over every position. Each chunk becomes
/// BOS + chunk + EOS, truncated to context_length + 1 tokens. Throws
/// NumericError if the loss stops being finite.
LmTrainResult train_lm(const DecoderLm& lm, ParamStore& store, std::span<const std::vector<TokenId>> chunks,
                       const TrainConfig& config, const std::function<void(std::size_t, double)>& on_step = {});

struct DecodingConfig {
  int max_new_tokens = 64;
  /// 0 selects greedy decoding (ties go to the lowest id).
  double temperature = 0.0;
  std::uint64_t seed = 0;
};

struct Generation {
  std::vector<TokenId> tokens;
  std::string text;
};

/// Continues `prefix` (embedding rows) until EOS, max_new_tokens, or the end
/// of the context window. The returned text excludes the prompt and EOS.
Generation generate(const DecoderLm& lm, const ParamStore& store, const Tokenizer& tokenizer, const Matrix& prefix,
                    const DecodingConfig& config);

}  // namespace biofusion::text
