// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

// Reverse-mode automatic differentiation over dense row-major matrices.
//
// A Tape records every operation in creation order; backward() walks the
// record in reverse and accumulates gradients into the tape nodes and, for
// parameter leaves, into Parameter::grad. Nodes that cannot reach a trainable
// leaf are never differentiated, so frozen sub-networks cost only the
// gradients that flow through them.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "biofusion/core/params.hpp"
#include "biofusion/core/tensor.hpp"

namespace biofusion::ad {

class Tape;

struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;
};

class Tape {
 public:
  using Backprop = std::function<void(Tape&, const Matrix& grad)>;

  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool grad_enabled() const { return grad_enabled_; }

  Var constant(Matrix value);

  /// Leaf bound to `p`. When `grad_sink` is non-null (and the tape records
  /// gradients) backward() adds d(output)/d(p) into grad_sink->grad. Repeated
  /// calls with the same parameter return the same leaf.
  Var param(const Parameter& p, Parameter* grad_sink);

  const Matrix& value(Var v) const { return nodes_[v.id].value; }
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }

  /// Gradient of the last backward() target w.r.t. `v`; zero if unreached.
  Matrix grad(Var v) const;

  /// Seeds d(target)/d(target) = 1 for a 1x1 target and back-propagates.
  void backward(Var target);

  std::size_t size() const { return nodes_.size(); }

  // Op construction interface.
  Var push(Matrix value, std::initializer_list<Var> inputs, Backprop backprop);
  Var push(Matrix value, std::span<const Var> inputs, Backprop backprop);
  bool needs(std::size_t id) const { return nodes_[id].requires_grad; }
  void accumulate(std::size_t id, const Matrix& g);
  /// Mutable gradient slot for `id`, zero-initialized on first touch.
  Matrix& grad_slot(std::size_t id);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    bool has_grad = false;
    Backprop backprop;
  };

  bool grad_enabled_;
  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> param_leaves_;
};

Var matmul(Var a, Var b);
/// a * b^T
Var matmul_nt(Var a, Var b);
Var add(Var a, Var b);
/// Adds the 1xN row `bias` to every row of `a`.
Var add_row(Var a, Var bias);
Var scale(Var a, double factor);
/// Multiplies every entry of `a` by the 1x1 variable `s`.
Var mul_scalar(Var a, Var s);
Var relu(Var a);
/// Tanh approximation of GELU.
Var gelu(Var a);
/// Row-wise layer normalization with 1xN gain and bias.
Var layer_norm(Var x, Var gain, Var bias, double epsilon = 1e-5);

/// Multi-head scaled dot-product attention over projected q, k, v (T x d).
/// When `probabilities` is non-null it receives one T x T matrix per head.
Var attention(Var q, Var k, Var v, int heads, bool causal,
              std::vector<Matrix>* probabilities = nullptr);

Var gather_rows(Var table, std::span<const std::int64_t> ids);
Var concat_rows(std::span<const Var> parts);
Var slice_rows(Var a, Eigen::Index begin, Eigen::Index count);

/// Sum over rows with mask[i] of -log softmax(logits_i)[targets[i]], as 1x1.
Var masked_nll_sum(Var logits, std::span<const std::int64_t> targets, std::span<const std::uint8_t> mask);

}  // namespace biofusion::ad

namespace biofusion::ad {

/// Resolves named parameters to tape leaves. Gradients flow into `sink` for
/// parameters whose group is not frozen; a null sink makes every leaf constant.
class Binder {
 public:
  Binder(Tape& tape, const ParamStore& store, ParamStore* sink)
      : tape_(tape), store_(store), sink_(sink) {}

  Var operator()(std::string_view name) const {
    const Parameter& p = store_.get(name);
    Parameter* target = nullptr;
    if (sink_ != nullptr && !store_.is_frozen(p.group)) target = &sink_->get(name);
    return tape_.param(p, target);
  }

  Tape& tape() const { return tape_; }
  const ParamStore& store() const { return store_; }

 private:
  Tape& tape_;
  const ParamStore& store_;
  ParamStore* sink_;
};

}  // namespace biofusion::ad
