// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>

#include "biofusion/core/params.hpp"

namespace biofusion {

struct OptimizerConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;
  /// Global gradient-norm clip over trainable parameters; 0 disables.
  double grad_clip = 0.0;
  double warmup_fraction = 0.03;
  /// Cosine decay ends at learning_rate * min_lr_ratio.
  double min_lr_ratio = 0.0;
};

/// Linear warmup over ceil(warmup_fraction * total_steps) steps, then cosine decay.
double scheduled_learning_rate(const OptimizerConfig& config, std::size_t step, std::size_t total_steps);

/// Adam with moment state kept per parameter group. Groups frozen in the
/// ParamStore are skipped entirely: no value update and no moment update.
class Adam {
 public:
  Adam(OptimizerConfig config, std::size_t total_steps);

  /// Applies one update from the accumulated Parameter::grad values and
  /// returns the learning rate that was used.
  double step(ParamStore& params);

  std::size_t steps_taken() const { return step_; }
  const OptimizerConfig& config() const { return config_; }

 private:
  struct Moments {
    Matrix m;
    Matrix v;
  };

  OptimizerConfig config_;
  std::size_t total_steps_;
  std::size_t step_ = 0;
  std::map<std::string, std::map<std::string, Moments>> state_;  // group -> name -> moments
};

}  // namespace biofusion

namespace biofusion {

/// Schedule and batching settings for one training run.
struct TrainConfig {
  OptimizerConfig optimizer;
  int batch_size = 8;
  int epochs = 1;
  /// When positive, overrides epochs * ceil(samples / batch_size).
  int max_steps = 0;
  std::uint64_t seed = 0;

  std::size_t total_steps(std::size_t samples) const;
};

}  // namespace biofusion
