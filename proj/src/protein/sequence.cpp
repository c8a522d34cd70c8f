// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#include "biofusion/protein/sequence.hpp"

#include <cctype>

#include "biofusion/core/errors.hpp"

namespace biofusion::protein {

ProteinSequence validate_sequence(std::string_view text) {
  if (text.empty()) throw ShapeError("empty protein sequence");
  std::string residues;
  residues.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char upper = static_cast<char>(std::toupper(static_cast<unsigned char>(text[i])));
    if (kAlphabet.find(upper) == std::string_view::npos) throw AlphabetError(text[i], i);
    residues.push_back(upper);
  }
  return ProteinSequence(std::move(residues));
}

int residue_index(char residue) {
  const auto at = kAlphabet.find(residue);
  if (at == std::string_view::npos) throw AlphabetError(residue, 0);
  return static_cast<int>(at);
}

}  // namespace biofusion::protein
