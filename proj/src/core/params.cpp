// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#include "biofusion/core/params.hpp"

#include <zlib.h>

#include "biofusion/core/errors.hpp"
#include "biofusion/core/rng.hpp"

namespace biofusion {

Parameter& ParamStore::add(std::string name, std::string group, Eigen::Index rows,
                           Eigen::Index cols, int rank) {
  if (index_.contains(name)) throw ConfigError("duplicate parameter name: " + name);
  if (rank < 0 || rank > 2) throw ShapeError("unsupported rank for " + name);
  if ((rank == 0 && (rows != 1 || cols != 1)) || (rank == 1 && rows != 1)) {
    throw ShapeError("rank/shape mismatch for " + name);
  }
  Parameter p;
  p.name = name;
  p.group = std::move(group);
  p.rank = rank;
  p.value = Matrix::Zero(rows, cols);
  p.grad = Matrix::Zero(rows, cols);
  index_.emplace(std::move(name), params_.size());
  params_.push_back(std::move(p));
  return params_.back();
}

bool ParamStore::contains(std::string_view name) const { return index_.find(name) != index_.end(); }

Parameter& ParamStore::get(std::string_view name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ShapeError("missing parameter: " + std::string(name));
  return params_[it->second];
}

const Parameter& ParamStore::get(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ShapeError("missing parameter: " + std::string(name));
  return params_[it->second];
}

std::vector<std::string> ParamStore::groups() const {
  std::vector<std::string> out;
  for (const auto& p : params_) {
    if (out.empty() || out.back() != p.group) {
      bool seen = false;
      for (const auto& g : out) seen = seen || g == p.group;
      if (!seen) out.push_back(p.group);
    }
  }
  return out;
}

bool ParamStore::has_group(std::string_view group) const {
  for (const auto& p : params_) {
    if (p.group == group) return true;
  }
  return false;
}

void ParamStore::set_frozen(const std::string& group, bool frozen) {
  if (frozen) {
    frozen_.insert(group);
  } else {
    frozen_.erase(group);
  }
}

bool ParamStore::is_frozen(std::string_view group) const { return frozen_.find(group) != frozen_.end(); }

void ParamStore::zero_grad() {
  for (auto& p : params_) p.grad.setZero();
}

std::size_t ParamStore::element_count(std::string_view group) const {
  std::size_t n = 0;
  for (const auto& p : params_) {
    if (group.empty() || p.group == group) n += static_cast<std::size_t>(p.value.size());
  }
  return n;
}

std::uint32_t ParamStore::checksum(std::string_view group) const {
  uLong crc = crc32(0L, Z_NULL, 0);
  for (const auto& p : params_) {
    if (!group.empty() && p.group != group) continue;
    crc = crc32(crc, reinterpret_cast<const Bytef*>(p.name.data()), static_cast<uInt>(p.name.size()));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(p.value.data()),
                static_cast<uInt>(p.value.size() * sizeof(double)));
  }
  return static_cast<std::uint32_t>(crc);
}

void init_normal(Parameter& p, Rng& rng, double stddev) {
  for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = rng.normal() * stddev;
}

void init_constant(Parameter& p, double value) { p.value.setConstant(value); }

}  // namespace biofusion
