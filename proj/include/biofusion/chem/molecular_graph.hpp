// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biofusion/core/tensor.hpp"

namespace biofusion::chem {

/// Bond orders; the numeric value indexes the bond embedding table.
enum class BondOrder : std::uint8_t { kSingle = 0, kDouble = 1, kTriple = 2, kAromatic = 3 };
inline constexpr int kBondOrderCount = 4;

struct Atom {
  std::string element;
  int formal_charge = 0;
  bool aromatic = false;
  /// Hydrogens written inside a bracket atom; 0 for organic-subset atoms.
  int explicit_hydrogens = 0;

  bool operator==(const Atom&) const = default;
};

struct Bond {
  std::size_t begin = 0;
  std::size_t end = 0;
  BondOrder order = BondOrder::kSingle;

  bool operator==(const Bond&) const = default;
};

/// Attributed 2D molecular graph. Atoms are kept in first-appearance order of
/// the source SMILES; that order is also the order of modality tokens.
struct MolecularGraph {
  std::vector<Atom> atoms;
  std::vector<Bond> bonds;
  std::string source_smiles;

  std::size_t atom_count() const { return atoms.size(); }
  bool operator==(const MolecularGraph&) const = default;
};

/// Parses the supported SMILES subset: organic-subset atoms (B C N O P S F Cl
/// Br I and aromatic b c n o p s), bracket atoms with hydrogen count and
/// charge, bonds - = # :, branches, ring closures (digits and %nn).
/// Stereochemistry, isotopes, atom classes and '.' are rejected.
/// Throws ParseError.
MolecularGraph parse_smiles(std::string_view smiles);

/// Throws ShapeError if bond endpoints are invalid, self-loops or duplicate
/// pairs exist, or the graph has no atoms.
void validate_graph(const MolecularGraph& graph);

/// Relabels atoms so that old atom i becomes atom new_index[i].
MolecularGraph permute_atoms(const MolecularGraph& graph, std::span<const std::size_t> new_index);

/// Elements with a dedicated one-hot column, in column order.
inline constexpr std::string_view kFeaturizedElements[] = {"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"};
/// 10 element columns + "other" + formal charge + aromatic flag.
inline constexpr int kAtomFeatureDim = 13;

/// Initial per-atom features, one row per atom in graph order.
Matrix atom_features(const MolecularGraph& graph);

}  // namespace biofusion::chem
