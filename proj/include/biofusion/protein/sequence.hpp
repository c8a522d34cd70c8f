// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace biofusion::protein {

/// 20 canonical amino acids followed by the unknown residue X.
inline constexpr std::string_view kAlphabet = "ACDEFGHIKLMNPQRSTVWYX";

/// Validated, uppercase amino-acid sequence of length >= 1.
class ProteinSequence {
 public:
  const std::string& residues() const { return residues_; }
  std::size_t length() const { return residues_.size(); }
  bool operator==(const ProteinSequence&) const = default;

 private:
  friend ProteinSequence validate_sequence(std::string_view text);
  explicit ProteinSequence(std::string residues) : residues_(std::move(residues)) {}
  std::string residues_;
};

/// Uppercases and validates `text`. Throws AlphabetError naming the first
/// offending character (or ShapeError for empty input).
ProteinSequence validate_sequence(std::string_view text);

/// Index of `residue` in kAlphabet; the residue must be valid.
int residue_index(char residue);

}  // namespace biofusion::protein
