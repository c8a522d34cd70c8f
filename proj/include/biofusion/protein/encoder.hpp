// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "biofusion/core/autodiff.hpp"
#include "biofusion/core/transformer.hpp"
#include "biofusion/protein/sequence.hpp"

namespace biofusion::protein {

struct ProteinEncoderConfig {
  int layers = 4;
  int width = 64;
  int heads = 4;
  int ff_width = 256;
  int max_residues = 1024;
};

/// Residue embedding + learned positions, then bidirectional pre-norm
/// transformer blocks. Sequences longer than max_residues are truncated.
class ProteinEncoder {
 public:
  explicit ProteinEncoder(ProteinEncoderConfig config, std::string group = "prot_encoder");

  const ProteinEncoderConfig& config() const { return config_; }
  const std::string& group() const { return group_; }
  int output_dim() const { return config_.width; }

  void init(ParamStore& store, Rng& rng) const;
  void check_params(const ParamStore& store) const;

  /// Number of rows the encoder produces for `seq`.
  std::size_t output_rows(const ProteinSequence& seq) const;

  ad::Var forward(const ad::Binder& bind, const ProteinSequence& seq,
                  std::vector<Matrix>* attention_maps = nullptr) const;

  /// Per-residue features (min(length, max_residues) x width).
  Matrix encode(const ParamStore& store, const ProteinSequence& seq) const;

  /// Attention probabilities, layers*heads matrices.
  std::vector<Matrix> attention_maps(const ParamStore& store, const ProteinSequence& seq) const;

 private:
  ProteinEncoderConfig config_;
  std::string group_;
  TransformerStack stack_;
};

}  // namespace biofusion::protein
