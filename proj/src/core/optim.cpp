// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#include "biofusion/core/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "biofusion/core/errors.hpp"

namespace biofusion {

double scheduled_learning_rate(const OptimizerConfig& config, std::size_t step, std::size_t total_steps) {
  if (total_steps == 0) return config.learning_rate;
  const auto warmup = static_cast<std::size_t>(std::ceil(config.warmup_fraction * static_cast<double>(total_steps)));
  if (step < warmup) {
    return config.learning_rate * static_cast<double>(step + 1) / static_cast<double>(warmup);
  }
  const std::size_t decay_steps = total_steps > warmup ? total_steps - warmup : 1;
  const double progress = std::min(1.0, static_cast<double>(step - warmup) / static_cast<double>(decay_steps));
  const double cosine = 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
  const double floor = config.min_lr_ratio;
  return config.learning_rate * (floor + (1.0 - floor) * cosine);
}

Adam::Adam(OptimizerConfig config, std::size_t total_steps) : config_(config), total_steps_(total_steps) {
  if (config_.learning_rate < 0.0) throw ConfigError("learning rate must be non-negative");
  if (config_.beta1 < 0.0 || config_.beta1 >= 1.0 || config_.beta2 < 0.0 || config_.beta2 >= 1.0) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (config_.warmup_fraction < 0.0 || config_.warmup_fraction > 1.0) {
    throw ConfigError("warmup fraction must lie in [0, 1]");
  }
}

double Adam::step(ParamStore& params) {
  const double lr = scheduled_learning_rate(config_, step_, total_steps_);
  ++step_;

  double clip_scale = 1.0;
  if (config_.grad_clip > 0.0) {
    double sq = 0.0;
    for (const auto& p : params.all()) {
      if (!params.is_frozen(p.group)) sq += p.grad.squaredNorm();
    }
    const double norm = std::sqrt(sq);
    if (norm > config_.grad_clip) clip_scale = config_.grad_clip / norm;
  }

  const double bias1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
  const double bias2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
  for (auto& p : params.all()) {
    if (params.is_frozen(p.group)) continue;
    auto& moments = state_[p.group][p.name];
    if (moments.m.size() == 0) {
      moments.m = Matrix::Zero(p.value.rows(), p.value.cols());
      moments.v = Matrix::Zero(p.value.rows(), p.value.cols());
    }
    const Matrix g = p.grad * clip_scale;
    moments.m = config_.beta1 * moments.m + (1.0 - config_.beta1) * g;
    moments.v = config_.beta2 * moments.v + (1.0 - config_.beta2) * g.cwiseProduct(g);
    if (lr == 0.0) continue;
    const Matrix update = (moments.m / bias1).array() / ((moments.v / bias2).array().sqrt() + config_.epsilon);
    p.value -= lr * update;
    if (config_.weight_decay > 0.0) p.value -= lr * config_.weight_decay * p.value;
  }
  return lr;
}

}  // namespace biofusion

namespace biofusion {

std::size_t TrainConfig::total_steps(std::size_t samples) const {
  if (batch_size < 1) throw ConfigError("batch_size must be positive");
  if (max_steps > 0) return static_cast<std::size_t>(max_steps);
  if (epochs < 1) throw ConfigError("epochs must be positive when max_steps is unset");
  const std::size_t per_epoch = (samples + static_cast<std::size_t>(batch_size) - 1) / static_cast<std::size_t>(batch_size);
  return per_epoch * static_cast<std::size_t>(epochs);
}

}  // namespace biofusion
