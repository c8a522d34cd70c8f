// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "biofusion/core/tensor.hpp"

namespace biofusion {

class Rng;

/// A named trainable tensor. Rank 0 and 1 tensors are stored as 1xN matrices.
struct Parameter {
  std::string name;
  std::string group;
  int rank = 2;
  Matrix value;
  Matrix grad;
};

/// Insertion-ordered collection of named parameters with per-group freeze flags.
/// Addresses of stored parameters stay valid while parameters are appended.
class ParamStore {
 public:
  Parameter& add(std::string name, std::string group, Eigen::Index rows, Eigen::Index cols,
                 int rank = 2);

  bool contains(std::string_view name) const;
  Parameter& get(std::string_view name);
  const Parameter& get(std::string_view name) const;

  std::deque<Parameter>& all() { return params_; }
  const std::deque<Parameter>& all() const { return params_; }
  std::size_t size() const { return params_.size(); }

  std::vector<std::string> groups() const;
  bool has_group(std::string_view group) const;

  void set_frozen(const std::string& group, bool frozen);
  bool is_frozen(std::string_view group) const;
  const std::set<std::string, std::less<>>& frozen_groups() const { return frozen_; }

  void zero_grad();

  /// Scalar element count, optionally restricted to one group.
  std::size_t element_count(std::string_view group = {}) const;

  /// CRC-32 over names and raw values, optionally restricted to one group.
  std::uint32_t checksum(std::string_view group = {}) const;

 private:
  std::deque<Parameter> params_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::set<std::string, std::less<>> frozen_;
};

void init_normal(Parameter& p, Rng& rng, double stddev);
void init_constant(Parameter& p, double value);

}  // namespace biofusion
