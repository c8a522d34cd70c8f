// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "biofusion/fusion/model.hpp"
#include "biofusion/harness/config.hpp"

namespace biofusion::harness {

inline constexpr char kCheckpointMagic[8] = {'B', 'M', 'G', 'P', 'T', 'C', 'K', 'P'};
inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr std::uint8_t kDtypeFloat64 = 1;

struct StageRecord {
  std::string stage;
  std::size_t steps = 0;
};

struct CheckpointBundle {
  RunConfig config;
  /// Stage that produced the bundle and its step count.
  std::string stage;
  std::size_t step = 0;
  /// Earlier stages first, this one last.
  std::vector<StageRecord> history;
  fusion::FusionModel model;
};

/// Layout (all integers little-endian):
///   "BMGPTCKP" | u32 version | u64 manifest bytes | manifest JSON
///   | u64 tensor count | per tensor: u32 name bytes, name, u8 dtype, u8 rank,
///     u64 dims[rank], f64 payload, u32 crc32(record bytes before it)
///   | u32 crc32(everything before it)
/// The manifest holds the config and its hash, stage, step, history,
/// per-group parameter counts, frozen groups and the tokenizer.
std::vector<std::uint8_t> serialize_checkpoint(const CheckpointBundle& bundle);
CheckpointBundle deserialize_checkpoint(const std::vector<std::uint8_t>& bytes);

/// Writes through a temporary file and renames. Throws IoError.
void save_checkpoint(const CheckpointBundle& bundle, const std::string& path);

/// Throws IoError when unreadable and CorruptCheckpointError on any magic,
/// version, checksum, manifest or shape mismatch.
CheckpointBundle load_checkpoint(const std::string& path);

/// Manifest JSON alone (validated like load_checkpoint).
nlohmann::json read_checkpoint_manifest(const std::string& path);

}  // namespace biofusion::harness
