// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "biofusion/core/autodiff.hpp"
#include "biofusion/fusion/prompt.hpp"

namespace biofusion::fusion {

/// Encoder outputs tagged with their source so they cannot reach the wrong adaptor.
struct AtomFeatureMatrix {
  Matrix values;
};
struct ResidueFeatureMatrix {
  Matrix values;
};

/// Fully-connected projection of per-atom / per-residue features into the LM
/// embedding space: row -> row * W + b.
class ModalityAdaptor {
 public:
  ModalityAdaptor(Modality modality, int input_dim, int output_dim);

  Modality modality() const { return modality_; }
  const std::string& group() const { return group_; }
  std::string weight_name() const { return group_ + ".weight"; }
  std::string bias_name() const { return group_ + ".bias"; }
  int input_dim() const { return input_dim_; }
  int output_dim() const { return output_dim_; }

  /// Small random weights, zero bias.
  void init(ParamStore& store, Rng& rng) const;
  void check_params(const ParamStore& store) const;

  ad::Var forward(const ad::Binder& bind, ad::Var features) const;

 private:
  Modality modality_;
  int input_dim_;
  int output_dim_;
  std::string group_;
};

/// Throws ShapeError when the adaptor serves the other modality or widths differ.
Matrix project_modality(const AtomFeatureMatrix& features, const ModalityAdaptor& adaptor, const ParamStore& store);
Matrix project_modality(const ResidueFeatureMatrix& features, const ModalityAdaptor& adaptor, const ParamStore& store);

}  // namespace biofusion::fusion
