// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#include "biofusion/protein/encoder.hpp"

#include <algorithm>
#include <cmath>

#include "biofusion/core/errors.hpp"
#include "biofusion/core/rng.hpp"

namespace biofusion::protein {

namespace {

TransformerStackConfig stack_config(const ProteinEncoderConfig& c) {
  return {.blocks = c.layers, .width = c.width, .heads = c.heads, .ff_width = c.ff_width, .causal = false};
}

}  // namespace

ProteinEncoder::ProteinEncoder(ProteinEncoderConfig config, std::string group)
    : config_(config), group_(group), stack_(stack_config(config), group, group) {
  if (config_.max_residues < 1) throw ConfigError("max_residues must be positive");
}

void ProteinEncoder::init(ParamStore& store, Rng& rng) const {
  init_normal(store.add(group_ + ".residue_embedding", group_, static_cast<Eigen::Index>(kAlphabet.size()), config_.width),
              rng, 1.0);
  init_normal(store.add(group_ + ".position_embedding", group_, config_.max_residues, config_.width), rng, 0.1);
  stack_.init(store, rng);
}

void ProteinEncoder::check_params(const ParamStore& store) const {
  const auto& res = store.get(group_ + ".residue_embedding").value;
  if (res.rows() != static_cast<Eigen::Index>(kAlphabet.size()) || res.cols() != config_.width) {
    throw ShapeError("protein residue embedding shape mismatch");
  }
  const auto& pos = store.get(group_ + ".position_embedding").value;
  if (pos.rows() != config_.max_residues || pos.cols() != config_.width) {
    throw ShapeError("protein position embedding shape mismatch");
  }
  stack_.check_params(store);
}

std::size_t ProteinEncoder::output_rows(const ProteinSequence& seq) const {
  return std::min(seq.length(), static_cast<std::size_t>(config_.max_residues));
}

ad::Var ProteinEncoder::forward(const ad::Binder& bind, const ProteinSequence& seq,
                                std::vector<Matrix>* attention_maps) const {
  check_params(bind.store());
  const std::size_t n = output_rows(seq);
  std::vector<std::int64_t> ids(n);
  std::vector<std::int64_t> positions(n);
  for (std::size_t i = 0; i < n; ++i) {
    ids[i] = residue_index(seq.residues()[i]);
    positions[i] = static_cast<std::int64_t>(i);
  }
  const ad::Var x = ad::add(ad::gather_rows(bind(group_ + ".residue_embedding"), ids),
                            ad::gather_rows(bind(group_ + ".position_embedding"), positions));
  return stack_.forward(bind, x, attention_maps);
}

Matrix ProteinEncoder::encode(const ParamStore& store, const ProteinSequence& seq) const {
  ad::Tape tape(false);
  const ad::Binder bind(tape, store, nullptr);
  return tape.value(forward(bind, seq));
}

std::vector<Matrix> ProteinEncoder::attention_maps(const ParamStore& store, const ProteinSequence& seq) const {
  ad::Tape tape(false);
  const ad::Binder bind(tape, store, nullptr);
  std::vector<Matrix> maps;
  forward(bind, seq, &maps);
  return maps;
}

}  // namespace biofusion::protein
