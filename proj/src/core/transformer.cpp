// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#include "biofusion/core/transformer.hpp"

#include <cmath>
#include <utility>

#include "biofusion/core/errors.hpp"
#include "biofusion/core/rng.hpp"

namespace biofusion {

TransformerStack::TransformerStack(TransformerStackConfig config, std::string prefix, std::string group)
    : config_(config), prefix_(std::move(prefix)), group_(std::move(group)) {
  if (config_.blocks < 0 || config_.width < 1 || config_.heads < 1 || config_.ff_width < 1) {
    throw ConfigError(prefix_ + ": transformer dimensions must be positive");
  }
  if (config_.width % config_.heads != 0) {
    throw ConfigError(prefix_ + ": width " + std::to_string(config_.width) + " not divisible by " +
                      std::to_string(config_.heads) + " heads");
  }
}

std::string TransformerStack::name(int block, const char* field) const {
  if (block < 0) return prefix_ + "." + field;
  return prefix_ + ".block" + std::to_string(block) + "." + field;
}

void TransformerStack::init(ParamStore& store, Rng& rng) const {
  const int d = config_.width;
  const int ff = config_.ff_width;
  const double proj = 1.0 / std::sqrt(static_cast<double>(d));
  const double residual = proj / std::sqrt(2.0 * std::max(1, config_.blocks));
  auto norm = [&](int b, const char* gain, const char* bias) {
    init_constant(store.add(name(b, gain), group_, 1, d, 1), 1.0);
    store.add(name(b, bias), group_, 1, d, 1);
  };
  for (int b = 0; b < config_.blocks; ++b) {
    norm(b, "ln1.gain", "ln1.bias");
    for (const char* w : {"attn.wq", "attn.wk", "attn.wv"}) init_normal(store.add(name(b, w), group_, d, d), rng, proj);
    for (const char* bias : {"attn.bq", "attn.bk", "attn.bv"}) store.add(name(b, bias), group_, 1, d, 1);
    init_normal(store.add(name(b, "attn.wo"), group_, d, d), rng, residual);
    store.add(name(b, "attn.bo"), group_, 1, d, 1);
    norm(b, "ln2.gain", "ln2.bias");
    init_normal(store.add(name(b, "ffn.w1"), group_, d, ff), rng, proj);
    store.add(name(b, "ffn.b1"), group_, 1, ff, 1);
    init_normal(store.add(name(b, "ffn.w2"), group_, ff, d), rng,
                residual * std::sqrt(static_cast<double>(d) / static_cast<double>(ff)));
    store.add(name(b, "ffn.b2"), group_, 1, d, 1);
  }
  norm(-1, "ln_final.gain", "ln_final.bias");
}

void TransformerStack::check_params(const ParamStore& store) const {
  const int d = config_.width;
  const int ff = config_.ff_width;
  auto expect = [&](const std::string& n, Eigen::Index rows, Eigen::Index cols) {
    if (!store.contains(n)) throw ShapeError("missing parameter: " + n);
    const Matrix& v = store.get(n).value;
    if (v.rows() != rows || v.cols() != cols) {
      throw ShapeError("parameter " + n + " has shape " + std::to_string(v.rows()) + "x" + std::to_string(v.cols()) +
                       ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
    }
  };
  for (int b = 0; b < config_.blocks; ++b) {
    for (const char* f : {"ln1.gain", "ln1.bias", "ln2.gain", "ln2.bias", "attn.bq", "attn.bk", "attn.bv", "attn.bo",
                          "ffn.b2"}) {
      expect(name(b, f), 1, d);
    }
    for (const char* f : {"attn.wq", "attn.wk", "attn.wv", "attn.wo"}) expect(name(b, f), d, d);
    expect(name(b, "ffn.w1"), d, ff);
    expect(name(b, "ffn.b1"), 1, ff);
    expect(name(b, "ffn.w2"), ff, d);
  }
  if (store.contains(name(config_.blocks, "ln1.gain"))) {
    throw ShapeError(prefix_ + ": parameters describe more blocks than configured");
  }
  expect(name(-1, "ln_final.gain"), 1, d);
  expect(name(-1, "ln_final.bias"), 1, d);
}

ad::Var TransformerStack::forward(const ad::Binder& bind, ad::Var x, std::vector<Matrix>* attention_maps) const {
  if (bind.tape().value(x).cols() != config_.width) {
    throw ShapeError(prefix_ + ": input width " + std::to_string(bind.tape().value(x).cols()) + " != " +
                     std::to_string(config_.width));
  }
  if (attention_maps != nullptr) attention_maps->clear();
  for (int b = 0; b < config_.blocks; ++b) {
    auto linear = [&](ad::Var in, const char* w, const char* bias) {
      return ad::add_row(ad::matmul(in, bind(name(b, w))), bind(name(b, bias)));
    };
    const ad::Var h1 = ad::layer_norm(x, bind(name(b, "ln1.gain")), bind(name(b, "ln1.bias")));
    std::vector<Matrix> maps;
    const ad::Var attended =
        ad::attention(linear(h1, "attn.wq", "attn.bq"), linear(h1, "attn.wk", "attn.bk"),
                      linear(h1, "attn.wv", "attn.bv"), config_.heads, config_.causal,
                      attention_maps != nullptr ? &maps : nullptr);
    if (attention_maps != nullptr) {
      for (auto& m : maps) attention_maps->push_back(std::move(m));
    }
    x = ad::add(x, linear(attended, "attn.wo", "attn.bo"));
    const ad::Var h2 = ad::layer_norm(x, bind(name(b, "ln2.gain")), bind(name(b, "ln2.bias")));
    x = ad::add(x, linear(ad::gelu(linear(h2, "ffn.w1", "ffn.b1")), "ffn.w2", "ffn.b2"));
  }
  return ad::layer_norm(x, bind(name(-1, "ln_final.gain")), bind(name(-1, "ln_final.bias")));
}

}  // namespace biofusion
