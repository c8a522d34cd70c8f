// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "biofusion/core/autodiff.hpp"
#include "biofusion/core/params.hpp"

namespace biofusion {

class Rng;

struct TransformerStackConfig {
  int blocks = 4;
  int width = 64;
  int heads = 4;
  int ff_width = 256;
  bool causal = false;
};

/// Pre-norm transformer blocks followed by a final layer norm:
///   x <- x + Attn(LN(x));  x <- x + FFN(LN(x));  out = LN(x)
/// FFN is Linear-GELU-Linear. Shared by the protein encoder (bidirectional)
/// and the decoder LM (causal).
class TransformerStack {
 public:
  TransformerStack(TransformerStackConfig config, std::string prefix, std::string group);

  const TransformerStackConfig& config() const { return config_; }

  void init(ParamStore& store, Rng& rng) const;
  void check_params(const ParamStore& store) const;

  /// `attention_maps`, when given, receives blocks*heads matrices (block-major).
  ad::Var forward(const ad::Binder& bind, ad::Var x, std::vector<Matrix>* attention_maps = nullptr) const;

 private:
  std::string name(int block, const char* field) const;

  TransformerStackConfig config_;
  std::string prefix_;
  std::string group_;
};

}  // namespace biofusion
