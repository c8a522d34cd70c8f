// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "biofusion/chem/molecular_graph.hpp"
#include "biofusion/core/autodiff.hpp"
#include "biofusion/core/params.hpp"

namespace biofusion {
class Rng;
}

namespace biofusion::chem {

struct GinConfig {
  int layers = 5;
  int hidden = 64;
};

/// Graph Isomorphism Network over MolecularGraph. Layer update:
///   h_v <- MLP((1 + eps) h_v + sum_{u in N(v)} (h_u + e_uv))
/// where e_uv is a learned embedding of the bond order and eps a learned
/// scalar per layer. The MLP is Linear-ReLU-Linear; a ReLU follows every layer
/// except the last.
class GinEncoder {
 public:
  explicit GinEncoder(GinConfig config, std::string group = "mol_encoder");

  const GinConfig& config() const { return config_; }
  const std::string& group() const { return group_; }
  int output_dim() const { return config_.hidden; }

  /// Registers and initializes parameters in `store` under the encoder group.
  void init(ParamStore& store, Rng& rng) const;

  /// Throws ShapeError if `store` is missing parameters or any shape differs
  /// from the configured layer count and hidden width.
  void check_params(const ParamStore& store) const;

  ad::Var forward(const ad::Binder& bind, const MolecularGraph& graph) const;

  /// Per-atom output features (atom count x hidden), no gradient recording.
  Matrix encode(const ParamStore& store, const MolecularGraph& graph) const;

  std::string name(int layer, const char* field) const;

 private:
  int input_dim(int layer) const;

  GinConfig config_;
  std::string group_;
};

}  // namespace biofusion::chem
