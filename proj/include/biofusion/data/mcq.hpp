// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace biofusion::data {

struct McqRecord {
  std::string question;
  std::vector<std::string> options;
  std::size_t gold = 0;
  std::optional<std::string> context;

  bool operator==(const McqRecord&) const = default;
};

enum class McqFormat { kMedMcqaLike, kPubMedQaLike, kUsmleLike };

/// "medmcqa-like" | "pubmedqa-like" | "usmle-like"; UsageError otherwise.
McqFormat parse_mcq_format(std::string_view name);

/// Formats:
///   medmcqa-like  {"question","options":[..],"gold":int,"context"?}
///   pubmedqa-like {"question","context":str|[str],"answer":"yes"|"no"|"maybe"}
///                 options become ["yes","no","maybe"]
///   usmle-like    {"question","options":{"A":..,..},"answer_idx":"A"}
///                 options ordered by key
/// Every record needs >= 2 distinct options and an in-range gold index.
/// Throws SchemaError carrying the 1-based line number.
std::vector<McqRecord> load_mcq_benchmark(const std::string& path, McqFormat format);

/// Writes the medmcqa-like schema.
void save_mcq(const std::string& path, const std::vector<McqRecord>& records);

}  // namespace biofusion::data
