// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#include "biofusion/chem/gin.hpp"

#include <cmath>

#include "biofusion/core/errors.hpp"
#include "biofusion/core/rng.hpp"

namespace biofusion::chem {

GinEncoder::GinEncoder(GinConfig config, std::string group) : config_(config), group_(std::move(group)) {
  if (config_.layers < 1 || config_.hidden < 1) throw ConfigError("GIN needs at least one layer and a positive width");
}

std::string GinEncoder::name(int layer, const char* field) const {
  return group_ + ".layer" + std::to_string(layer) + "." + field;
}

int GinEncoder::input_dim(int layer) const { return layer == 0 ? kAtomFeatureDim : config_.hidden; }

void GinEncoder::init(ParamStore& store, Rng& rng) const {
  for (int l = 0; l < config_.layers; ++l) {
    const int in = input_dim(l);
    const int h = config_.hidden;
    init_constant(store.add(name(l, "eps"), group_, 1, 1, 0), 0.0);
    init_normal(store.add(name(l, "bond_embedding"), group_, kBondOrderCount, in), rng, 0.1);
    init_normal(store.add(name(l, "mlp.w1"), group_, in, h), rng, 1.0 / std::sqrt(static_cast<double>(in)));
    store.add(name(l, "mlp.b1"), group_, 1, h, 1);
    init_normal(store.add(name(l, "mlp.w2"), group_, h, h), rng, 1.0 / std::sqrt(static_cast<double>(h)));
    store.add(name(l, "mlp.b2"), group_, 1, h, 1);
  }
}

void GinEncoder::check_params(const ParamStore& store) const {
  auto expect = [&](const std::string& n, Eigen::Index rows, Eigen::Index cols) {
    if (!store.contains(n)) throw ShapeError("GIN parameter missing: " + n);
    const Matrix& v = store.get(n).value;
    if (v.rows() != rows || v.cols() != cols) {
      throw ShapeError("GIN parameter " + n + " has shape " + std::to_string(v.rows()) + "x" +
                       std::to_string(v.cols()) + ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
    }
  };
  for (int l = 0; l < config_.layers; ++l) {
    const int in = input_dim(l);
    const int h = config_.hidden;
    expect(name(l, "eps"), 1, 1);
    expect(name(l, "bond_embedding"), kBondOrderCount, in);
    expect(name(l, "mlp.w1"), in, h);
    expect(name(l, "mlp.b1"), 1, h);
    expect(name(l, "mlp.w2"), h, h);
    expect(name(l, "mlp.b2"), 1, h);
  }
  if (store.contains(name(config_.layers, "eps"))) throw ShapeError("GIN parameters describe more layers than configured");
}

ad::Var GinEncoder::forward(const ad::Binder& bind, const MolecularGraph& graph) const {
  validate_graph(graph);
  check_params(bind.store());
  ad::Tape& tape = bind.tape();
  const auto n = static_cast<Eigen::Index>(graph.atom_count());

  Matrix adjacency = Matrix::Zero(n, n);
  Matrix bond_counts = Matrix::Zero(n, kBondOrderCount);
  for (const Bond& b : graph.bonds) {
    const auto i = static_cast<Eigen::Index>(b.begin);
    const auto j = static_cast<Eigen::Index>(b.end);
    adjacency(i, j) += 1.0;
    adjacency(j, i) += 1.0;
    bond_counts(i, static_cast<int>(b.order)) += 1.0;
    bond_counts(j, static_cast<int>(b.order)) += 1.0;
  }
  const ad::Var adj = tape.constant(std::move(adjacency));
  const ad::Var counts = tape.constant(std::move(bond_counts));

  ad::Var h = tape.constant(atom_features(graph));
  for (int l = 0; l < config_.layers; ++l) {
    const ad::Var neighbours = ad::add(ad::matmul(adj, h), ad::matmul(counts, bind(name(l, "bond_embedding"))));
    const ad::Var self = ad::add(h, ad::mul_scalar(h, bind(name(l, "eps"))));
    const ad::Var pre = ad::add(self, neighbours);
    const ad::Var hidden = ad::relu(ad::add_row(ad::matmul(pre, bind(name(l, "mlp.w1"))), bind(name(l, "mlp.b1"))));
    h = ad::add_row(ad::matmul(hidden, bind(name(l, "mlp.w2"))), bind(name(l, "mlp.b2")));
    if (l + 1 < config_.layers) h = ad::relu(h);
  }
  return h;
}

Matrix GinEncoder::encode(const ParamStore& store, const MolecularGraph& graph) const {
  ad::Tape tape(false);
  const ad::Binder bind(tape, store, nullptr);
  return tape.value(forward(bind, graph));
}

}  // namespace biofusion::chem
