// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#include "biofusion/fusion/adaptor.hpp"

#include <cmath>

#include "biofusion/core/errors.hpp"
#include "biofusion/core/rng.hpp"

namespace biofusion::fusion {

ModalityAdaptor::ModalityAdaptor(Modality modality, int input_dim, int output_dim)
    : modality_(modality),
      input_dim_(input_dim),
      output_dim_(output_dim),
      group_(modality == Modality::kMolecule ? "mol_adaptor" : "prot_adaptor") {
  if (input_dim < 1 || output_dim < 1) throw ConfigError("adaptor dimensions must be positive");
}

void ModalityAdaptor::init(ParamStore& store, Rng& rng) const {
  init_normal(store.add(weight_name(), group_, input_dim_, output_dim_), rng,
              0.1 / std::sqrt(static_cast<double>(input_dim_)));
  store.add(bias_name(), group_, 1, output_dim_, 1);
}

void ModalityAdaptor::check_params(const ParamStore& store) const {
  const Matrix& w = store.get(weight_name()).value;
  const Matrix& b = store.get(bias_name()).value;
  if (w.rows() != input_dim_ || w.cols() != output_dim_ || b.rows() != 1 || b.cols() != output_dim_) {
    throw ShapeError(group_ + ": parameter shapes differ from configuration");
  }
}

ad::Var ModalityAdaptor::forward(const ad::Binder& bind, ad::Var features) const {
  check_params(bind.store());
  if (bind.tape().value(features).cols() != input_dim_) {
    throw ShapeError(group_ + ": feature width " + std::to_string(bind.tape().value(features).cols()) +
                     " != " + std::to_string(input_dim_));
  }
  return ad::add_row(ad::matmul(features, bind(weight_name())), bind(bias_name()));
}

namespace {

Matrix project(const Matrix& features, Modality source, const ModalityAdaptor& adaptor, const ParamStore& store) {
  if (adaptor.modality() != source) throw ShapeError("adaptor modality does not match the feature source");
  ad::Tape tape(false);
  const ad::Binder bind(tape, store, nullptr);
  return tape.value(adaptor.forward(bind, tape.constant(features)));
}

}  // namespace

Matrix project_modality(const AtomFeatureMatrix& features, const ModalityAdaptor& adaptor, const ParamStore& store) {
  return project(features.values, Modality::kMolecule, adaptor, store);
}

Matrix project_modality(const ResidueFeatureMatrix& features, const ModalityAdaptor& adaptor,
                        const ParamStore& store) {
  return project(features.values, Modality::kProtein, adaptor, store);
}

}  // namespace biofusion::fusion
