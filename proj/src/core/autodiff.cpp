// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#include "biofusion/core/autodiff.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <string>

#include "biofusion/core/errors.hpp"

namespace biofusion::ad {

Var Tape::constant(Matrix value) {
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var{this, nodes_.size() - 1};
}

Var Tape::param(const Parameter& p, Parameter* grad_sink) {
  if (auto it = param_leaves_.find(&p); it != param_leaves_.end()) return Var{this, it->second};
  Node node;
  node.value = p.value;
  node.requires_grad = grad_enabled_ && grad_sink != nullptr;
  if (node.requires_grad) {
    node.backprop = [grad_sink](Tape&, const Matrix& g) { grad_sink->grad += g; };
  }
  nodes_.push_back(std::move(node));
  param_leaves_.emplace(&p, nodes_.size() - 1);
  return Var{this, nodes_.size() - 1};
}

Matrix Tape::grad(Var v) const {
  const Node& n = nodes_[v.id];
  if (!n.has_grad) return Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

Var Tape::push(Matrix value, std::initializer_list<Var> inputs, Backprop backprop) {
  return push(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()), std::move(backprop));
}

Var Tape::push(Matrix value, std::span<const Var> inputs, Backprop backprop) {
  Node node;
  node.value = std::move(value);
  if (grad_enabled_) {
    for (const Var& in : inputs) {
      if (in.tape != this) throw ShapeError("variable belongs to a different tape");
      node.requires_grad = node.requires_grad || nodes_[in.id].requires_grad;
    }
  }
  if (node.requires_grad) node.backprop = std::move(backprop);
  nodes_.push_back(std::move(node));
  return Var{this, nodes_.size() - 1};
}

Matrix& Tape::grad_slot(std::size_t id) {
  Node& n = nodes_[id];
  if (!n.has_grad) {
    n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
    n.has_grad = true;
  }
  return n.grad;
}

void Tape::accumulate(std::size_t id, const Matrix& g) {
  if (!nodes_[id].requires_grad) return;
  grad_slot(id) += g;
}

void Tape::backward(Var target) {
  if (target.tape != this) throw ShapeError("backward target belongs to a different tape");
  const Node& t = nodes_[target.id];
  if (t.value.rows() != 1 || t.value.cols() != 1) throw ShapeError("backward target must be 1x1");
  for (auto& n : nodes_) {
    n.has_grad = false;
    n.grad.resize(0, 0);
  }
  if (!t.requires_grad) return;
  grad_slot(target.id).setOnes();
  for (std::size_t i = target.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.has_grad || !n.backprop) continue;
    n.backprop(*this, n.grad);
  }
}

namespace {

void check_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
  }
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = *a.tape;
  const Matrix& av = t.value(a);
  const Matrix& bv = t.value(b);
  if (av.cols() != bv.rows()) {
    throw ShapeError("matmul: inner dimensions " + std::to_string(av.cols()) + " vs " +
                     std::to_string(bv.rows()));
  }
  Matrix out = av * bv;
  return t.push(std::move(out), {a, b}, [ai = a.id, bi = b.id](Tape& tp, const Matrix& g) {
    if (tp.needs(ai)) tp.grad_slot(ai).noalias() += g * tp.value(Var{&tp, bi}).transpose();
    if (tp.needs(bi)) tp.grad_slot(bi).noalias() += tp.value(Var{&tp, ai}).transpose() * g;
  });
}

Var matmul_nt(Var a, Var b) {
  Tape& t = *a.tape;
  const Matrix& av = t.value(a);
  const Matrix& bv = t.value(b);
  if (av.cols() != bv.cols()) throw ShapeError("matmul_nt: column counts differ");
  Matrix out = av * bv.transpose();
  return t.push(std::move(out), {a, b}, [ai = a.id, bi = b.id](Tape& tp, const Matrix& g) {
    if (tp.needs(ai)) tp.grad_slot(ai).noalias() += g * tp.value(Var{&tp, bi});
    if (tp.needs(bi)) tp.grad_slot(bi).noalias() += g.transpose() * tp.value(Var{&tp, ai});
  });
}

Var add(Var a, Var b) {
  Tape& t = *a.tape;
  check_same_shape(t.value(a), t.value(b), "add");
  Matrix out = t.value(a) + t.value(b);
  return t.push(std::move(out), {a, b}, [ai = a.id, bi = b.id](Tape& tp, const Matrix& g) {
    tp.accumulate(ai, g);
    tp.accumulate(bi, g);
  });
}

Var add_row(Var a, Var bias) {
  Tape& t = *a.tape;
  const Matrix& av = t.value(a);
  const Matrix& bv = t.value(bias);
  if (bv.rows() != 1 || bv.cols() != av.cols()) throw ShapeError("add_row: bias must be 1x" + std::to_string(av.cols()));
  Matrix out = av.rowwise() + bv.row(0);
  return t.push(std::move(out), {a, bias}, [ai = a.id, bi = bias.id](Tape& tp, const Matrix& g) {
    tp.accumulate(ai, g);
    if (tp.needs(bi)) tp.grad_slot(bi) += g.colwise().sum();
  });
}

Var scale(Var a, double factor) {
  Tape& t = *a.tape;
  Matrix out = t.value(a) * factor;
  return t.push(std::move(out), {a}, [ai = a.id, factor](Tape& tp, const Matrix& g) {
    if (tp.needs(ai)) tp.grad_slot(ai) += g * factor;
  });
}

Var mul_scalar(Var a, Var s) {
  Tape& t = *a.tape;
  const Matrix& sv = t.value(s);
  if (sv.rows() != 1 || sv.cols() != 1) throw ShapeError("mul_scalar: scalar must be 1x1");
  Matrix out = t.value(a) * sv(0, 0);
  return t.push(std::move(out), {a, s}, [ai = a.id, si = s.id](Tape& tp, const Matrix& g) {
    const double sval = tp.value(Var{&tp, si})(0, 0);
    if (tp.needs(ai)) tp.grad_slot(ai) += g * sval;
    if (tp.needs(si)) tp.grad_slot(si)(0, 0) += g.cwiseProduct(tp.value(Var{&tp, ai})).sum();
  });
}

Var relu(Var a) {
  Tape& t = *a.tape;
  Matrix out = t.value(a).cwiseMax(0.0);
  return t.push(std::move(out), {a}, [ai = a.id](Tape& tp, const Matrix& g) {
    if (!tp.needs(ai)) return;
    const Matrix& x = tp.value(Var{&tp, ai});
    tp.grad_slot(ai) += (x.array() > 0.0).select(g, 0.0);
  });
}

namespace {

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;

}  // namespace

Var gelu(Var a) {
  Tape& t = *a.tape;
  const Matrix& x = t.value(a);
  Matrix out = x.unaryExpr([](double v) {
    return 0.5 * v * (1.0 + std::tanh(kGeluC * (v + kGeluA * v * v * v)));
  });
  return t.push(std::move(out), {a}, [ai = a.id](Tape& tp, const Matrix& g) {
    if (!tp.needs(ai)) return;
    const Matrix& xv = tp.value(Var{&tp, ai});
    Matrix d = xv.unaryExpr([](double v) {
      const double inner = kGeluC * (v + kGeluA * v * v * v);
      const double th = std::tanh(inner);
      const double dinner = kGeluC * (1.0 + 3.0 * kGeluA * v * v);
      return 0.5 * (1.0 + th) + 0.5 * v * (1.0 - th * th) * dinner;
    });
    tp.grad_slot(ai) += g.cwiseProduct(d);
  });
}

Var layer_norm(Var x, Var gain, Var bias, double epsilon) {
  Tape& t = *x.tape;
  const Matrix& xv = t.value(x);
  const Matrix& gv = t.value(gain);
  const Matrix& bv = t.value(bias);
  const Eigen::Index n = xv.cols();
  if (gv.rows() != 1 || gv.cols() != n || bv.rows() != 1 || bv.cols() != n) {
    throw ShapeError("layer_norm: gain/bias must be 1x" + std::to_string(n));
  }
  auto normalized = std::make_shared<Matrix>(xv.rows(), n);
  auto inv_std = std::make_shared<Eigen::VectorXd>(xv.rows());
  for (Eigen::Index r = 0; r < xv.rows(); ++r) {
    const double mean = xv.row(r).mean();
    const double var = (xv.row(r).array() - mean).square().mean();
    const double is = 1.0 / std::sqrt(var + epsilon);
    (*inv_std)(r) = is;
    normalized->row(r) = (xv.row(r).array() - mean) * is;
  }
  Matrix out = (normalized->array().rowwise() * gv.row(0).array()).matrix();
  out.rowwise() += bv.row(0);
  return t.push(std::move(out), {x, gain, bias},
                [xi = x.id, gi = gain.id, bi = bias.id, normalized, inv_std](Tape& tp, const Matrix& g) {
                  if (tp.needs(bi)) tp.grad_slot(bi) += g.colwise().sum();
                  if (tp.needs(gi)) tp.grad_slot(gi) += g.cwiseProduct(*normalized).colwise().sum();
                  if (!tp.needs(xi)) return;
                  const Matrix& gain_v = tp.value(Var{&tp, gi});
                  Matrix dxhat = (g.array().rowwise() * gain_v.row(0).array()).matrix();
                  Matrix& dx = tp.grad_slot(xi);
                  for (Eigen::Index r = 0; r < dxhat.rows(); ++r) {
                    const double m1 = dxhat.row(r).mean();
                    const double m2 = dxhat.row(r).cwiseProduct(normalized->row(r)).mean();
                    dx.row(r).array() +=
                        (*inv_std)(r) * (dxhat.row(r).array() - m1 - normalized->row(r).array() * m2);
                  }
                });
}

Var attention(Var q, Var k, Var v, int heads, bool causal, std::vector<Matrix>* probabilities) {
  Tape& t = *q.tape;
  const Matrix& qv = t.value(q);
  const Matrix& kv = t.value(k);
  const Matrix& vv = t.value(v);
  check_same_shape(qv, kv, "attention q/k");
  check_same_shape(qv, vv, "attention q/v");
  const Eigen::Index rows = qv.rows();
  const Eigen::Index width = qv.cols();
  if (heads <= 0 || width % heads != 0) throw ShapeError("attention: width not divisible by heads");
  const Eigen::Index dh = width / heads;
  const double scale_factor = 1.0 / std::sqrt(static_cast<double>(dh));

  auto probs = std::make_shared<std::vector<Matrix>>();
  probs->reserve(static_cast<std::size_t>(heads));
  Matrix out = Matrix::Zero(rows, width);
  for (int h = 0; h < heads; ++h) {
    const auto qh = qv.middleCols(h * dh, dh);
    const auto kh = kv.middleCols(h * dh, dh);
    const auto vh = vv.middleCols(h * dh, dh);
    Matrix p = Matrix::Zero(rows, rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
      // Causal rows only ever read keys/values at positions <= i.
      const Eigen::Index span = causal ? i + 1 : rows;
      RowVector scores = (qh.row(i) * kh.topRows(span).transpose()) * scale_factor;
      const double mx = scores.maxCoeff();
      scores = (scores.array() - mx).exp();
      scores /= scores.sum();
      p.row(i).head(span) = scores;
      out.row(i).segment(h * dh, dh).noalias() = scores * vh.topRows(span);
    }
    probs->push_back(std::move(p));
  }
  if (probabilities != nullptr) *probabilities = *probs;

  return t.push(std::move(out), {q, k, v},
                [qi = q.id, ki = k.id, vi = v.id, heads, dh, scale_factor, probs](Tape& tp, const Matrix& g) {
                  const Matrix& qv2 = tp.value(Var{&tp, qi});
                  const Matrix& kv2 = tp.value(Var{&tp, ki});
                  const Matrix& vv2 = tp.value(Var{&tp, vi});
                  for (int h = 0; h < heads; ++h) {
                    const Matrix& p = (*probs)[static_cast<std::size_t>(h)];
                    const auto go = g.middleCols(h * dh, dh);
                    if (tp.needs(vi)) tp.grad_slot(vi).middleCols(h * dh, dh).noalias() += p.transpose() * go;
                    if (!tp.needs(qi) && !tp.needs(ki)) continue;
                    Matrix dp = go * vv2.middleCols(h * dh, dh).transpose();
                    Eigen::VectorXd rowdot = dp.cwiseProduct(p).rowwise().sum();
                    Matrix ds = p.cwiseProduct((dp.colwise() - rowdot));
                    ds *= scale_factor;
                    if (tp.needs(qi)) tp.grad_slot(qi).middleCols(h * dh, dh).noalias() += ds * kv2.middleCols(h * dh, dh);
                    if (tp.needs(ki)) tp.grad_slot(ki).middleCols(h * dh, dh).noalias() += ds.transpose() * qv2.middleCols(h * dh, dh);
                  }
                });
}

Var gather_rows(Var table, std::span<const std::int64_t> ids) {
  Tape& t = *table.tape;
  const Matrix& tv = t.value(table);
  Matrix out(static_cast<Eigen::Index>(ids.size()), tv.cols());
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] < 0 || ids[r] >= tv.rows()) throw ShapeError("gather_rows: id " + std::to_string(ids[r]) + " out of range");
    out.row(static_cast<Eigen::Index>(r)) = tv.row(ids[r]);
  }
  std::vector<std::int64_t> kept(ids.begin(), ids.end());
  return t.push(std::move(out), {table}, [ti = table.id, kept = std::move(kept)](Tape& tp, const Matrix& g) {
    if (!tp.needs(ti)) return;
    Matrix& dt = tp.grad_slot(ti);
    for (std::size_t r = 0; r < kept.size(); ++r) dt.row(kept[r]) += g.row(static_cast<Eigen::Index>(r));
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  Tape& t = *parts.front().tape;
  Eigen::Index rows = 0;
  const Eigen::Index cols = t.value(parts.front()).cols();
  std::vector<std::pair<std::size_t, Eigen::Index>> layout;
  for (const Var& p : parts) {
    const Matrix& pv = t.value(p);
    if (pv.cols() != cols) throw ShapeError("concat_rows: column counts differ");
    layout.emplace_back(p.id, pv.rows());
    rows += pv.rows();
  }
  Matrix out(rows, cols);
  Eigen::Index at = 0;
  for (const Var& p : parts) {
    const Matrix& pv = t.value(p);
    out.middleRows(at, pv.rows()) = pv;
    at += pv.rows();
  }
  return t.push(std::move(out), parts, [layout = std::move(layout)](Tape& tp, const Matrix& g) {
    Eigen::Index offset = 0;
    for (const auto& [id, n] : layout) {
      if (tp.needs(id)) tp.grad_slot(id) += g.middleRows(offset, n);
      offset += n;
    }
  });
}

Var slice_rows(Var a, Eigen::Index begin, Eigen::Index count) {
  Tape& t = *a.tape;
  const Matrix& av = t.value(a);
  if (begin < 0 || count < 0 || begin + count > av.rows()) throw ShapeError("slice_rows: range out of bounds");
  Matrix out = av.middleRows(begin, count);
  return t.push(std::move(out), {a}, [ai = a.id, begin, count](Tape& tp, const Matrix& g) {
    if (tp.needs(ai)) tp.grad_slot(ai).middleRows(begin, count) += g;
  });
}

Var masked_nll_sum(Var logits, std::span<const std::int64_t> targets, std::span<const std::uint8_t> mask) {
  Tape& t = *logits.tape;
  const Matrix& lv = t.value(logits);
  const auto rows = static_cast<std::size_t>(lv.rows());
  if (targets.size() != rows || mask.size() != rows) {
    throw ShapeError("masked_nll_sum: logits have " + std::to_string(rows) + " rows, targets " +
                     std::to_string(targets.size()) + ", mask " + std::to_string(mask.size()));
  }
  auto softmax = std::make_shared<Matrix>(Matrix::Zero(lv.rows(), lv.cols()));
  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (!mask[r]) continue;
    const auto row = static_cast<Eigen::Index>(r);
    if (targets[r] < 0 || targets[r] >= lv.cols()) throw ShapeError("masked_nll_sum: target id out of range");
    const double mx = lv.row(row).maxCoeff();
    RowVector e = (lv.row(row).array() - mx).exp();
    const double z = e.sum();
    total += std::log(z) + mx - lv(row, targets[r]);
    softmax->row(row) = e / z;
  }
  Matrix out(1, 1);
  out(0, 0) = total;
  std::vector<std::int64_t> tg(targets.begin(), targets.end());
  std::vector<std::uint8_t> mk(mask.begin(), mask.end());
  return t.push(std::move(out), {logits},
                [li = logits.id, softmax, tg = std::move(tg), mk = std::move(mk)](Tape& tp, const Matrix& g) {
                  if (!tp.needs(li)) return;
                  Matrix& dl = tp.grad_slot(li);
                  const double s = g(0, 0);
                  for (std::size_t r = 0; r < tg.size(); ++r) {
                    if (!mk[r]) continue;
                    const auto row = static_cast<Eigen::Index>(r);
                    dl.row(row) += s * softmax->row(row);
                    dl(row, tg[r]) -= s;
                  }
                });
}

}  // namespace biofusion::ad
