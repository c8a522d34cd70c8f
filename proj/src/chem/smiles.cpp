// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <utility>

#include "biofusion/chem/molecular_graph.hpp"
#include "biofusion/core/errors.hpp"

namespace biofusion::chem {
namespace {

constexpr std::array<std::string_view, 118> kElements = {
    "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg", "Al", "Si", "P",  "S",
    "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",  "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge",
    "As", "Se", "Br", "Kr", "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd",
    "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd", "Pm", "Sm", "Eu", "Gd",
    "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W",  "Re", "Os", "Ir", "Pt", "Au", "Hg",
    "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U",  "Np", "Pu", "Am", "Cm",
    "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs", "Mt", "Ds", "Rg", "Cn",
    "Nh", "Fl", "Mc", "Lv", "Ts", "Og"};

bool is_element(std::string_view symbol) {
  return std::find(kElements.begin(), kElements.end(), symbol) != kElements.end();
}

class SmilesParser {
 public:
  explicit SmilesParser(std::string_view text) : text_(text) { graph_.source_smiles = std::string(text); }

  MolecularGraph run() {
    if (text_.empty()) throw ParseError("empty SMILES", 0);
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      switch (c) {
        case '(':
          open_branch();
          break;
        case ')':
          close_branch();
          break;
        case '-':
          set_bond(BondOrder::kSingle);
          break;
        case '=':
          set_bond(BondOrder::kDouble);
          break;
        case '#':
          set_bond(BondOrder::kTriple);
          break;
        case ':':
          set_bond(BondOrder::kAromatic);
          break;
        case '/':
        case '\\':
          throw ParseError("directional bonds (stereochemistry) are not supported", pos_);
        case '[':
          bracket_atom();
          break;
        case '%':
          ring_closure_percent();
          break;
        default:
          if (std::isdigit(static_cast<unsigned char>(c))) {
            ring_closure(c - '0', pos_);
            ++pos_;
          } else {
            organic_atom();
          }
      }
    }
    if (!branches_.empty()) throw ParseError("unbalanced '('", branches_.back().position);
    if (pending_) throw ParseError("dangling bond", pending_->position);
    if (!rings_.empty()) throw ParseError("dangling ring bond " + std::to_string(rings_.begin()->first), rings_.begin()->second.position);
    if (graph_.atoms.empty()) throw ParseError("no atoms", pos_);
    return std::move(graph_);
  }

 private:
  struct PendingBond {
    BondOrder order;
    std::size_t position;
  };
  struct OpenRing {
    std::size_t atom;
    std::optional<BondOrder> order;
    std::size_t position;
  };
  struct Branch {
    std::size_t anchor;
    std::size_t atoms_before;
    std::size_t position;
  };

  void open_branch() {
    if (!previous_) throw ParseError("branch without a preceding atom", pos_);
    if (pending_) throw ParseError("bond before branch", pending_->position);
    branches_.push_back({*previous_, graph_.atoms.size(), pos_});
    ++pos_;
  }

  void close_branch() {
    if (branches_.empty()) throw ParseError("unbalanced ')'", pos_);
    if (pending_) throw ParseError("dangling bond", pending_->position);
    const Branch b = branches_.back();
    if (graph_.atoms.size() == b.atoms_before) throw ParseError("empty branch", pos_);
    branches_.pop_back();
    previous_ = b.anchor;
    ++pos_;
  }

  void set_bond(BondOrder order) {
    if (!previous_) throw ParseError("bond without a preceding atom", pos_);
    if (pending_) throw ParseError("consecutive bond symbols", pos_);
    pending_ = PendingBond{order, pos_};
    ++pos_;
  }

  void ring_closure_percent() {
    const std::size_t start = pos_;
    if (pos_ + 2 >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])) ||
        !std::isdigit(static_cast<unsigned char>(text_[pos_ + 2]))) {
      throw ParseError("'%' must be followed by two digits", start);
    }
    const int number = (text_[pos_ + 1] - '0') * 10 + (text_[pos_ + 2] - '0');
    ring_closure(number, start);
    pos_ += 3;
  }

  void ring_closure(int number, std::size_t position) {
    if (!previous_) throw ParseError("ring bond without a preceding atom", position);
    std::optional<BondOrder> order;
    if (pending_) order = pending_->order;
    pending_.reset();
    auto it = rings_.find(number);
    if (it == rings_.end()) {
      rings_.emplace(number, OpenRing{*previous_, order, position});
      return;
    }
    const OpenRing open = it->second;
    rings_.erase(it);
    if (open.atom == *previous_) throw ParseError("ring bond closes on its own atom", position);
    if (open.order && order && *open.order != *order) throw ParseError("conflicting ring bond orders", position);
    const std::optional<BondOrder> chosen = order ? order : open.order;
    add_bond(open.atom, *previous_, chosen, position);
  }

  void organic_atom() {
    const char c = text_[pos_];
    Atom atom;
    std::size_t width = 1;
    switch (c) {
      case 'B':
        if (pos_ + 1 < text_.size() && text_[pos_ + 1] == 'r') {
          atom.element = "Br";
          width = 2;
        } else {
          atom.element = "B";
        }
        break;
      case 'C':
        if (pos_ + 1 < text_.size() && text_[pos_ + 1] == 'l') {
          atom.element = "Cl";
          width = 2;
        } else {
          atom.element = "C";
        }
        break;
      case 'N':
      case 'O':
      case 'P':
      case 'S':
      case 'F':
      case 'I':
        atom.element = std::string(1, c);
        break;
      case 'b':
      case 'c':
      case 'n':
      case 'o':
      case 'p':
      case 's':
        atom.element = std::string(1, static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
        atom.aromatic = true;
        break;
      case '@':
        throw ParseError("chirality is not supported", pos_);
      default:
        throw ParseError(std::string("unknown token '") + c + "'", pos_);
    }
    const std::size_t at = pos_;
    pos_ += width;
    push_atom(std::move(atom), at);
  }

  void bracket_atom() {
    const std::size_t start = pos_;
    ++pos_;
    auto peek = [&]() -> char { return pos_ < text_.size() ? text_[pos_] : '\0'; };
    if (std::isdigit(static_cast<unsigned char>(peek()))) throw ParseError("isotopes are not supported", pos_);

    Atom atom;
    const char first = peek();
    if (std::isupper(static_cast<unsigned char>(first))) {
      std::string two;
      if (pos_ + 1 < text_.size() && std::islower(static_cast<unsigned char>(text_[pos_ + 1]))) {
        two = text_.substr(pos_, 2);
      }
      if (!two.empty() && is_element(two)) {
        atom.element = two;
        pos_ += 2;
      } else if (is_element(std::string_view(&text_[pos_], 1))) {
        atom.element = std::string(1, first);
        pos_ += 1;
      } else {
        throw ParseError("unknown element in bracket atom", pos_);
      }
    } else if (std::islower(static_cast<unsigned char>(first))) {
      const std::string_view rest = text_.substr(pos_);
      if (rest.starts_with("se") || rest.starts_with("as")) {
        atom.element = rest.starts_with("se") ? "Se" : "As";
        pos_ += 2;
      } else if (first == 'b' || first == 'c' || first == 'n' || first == 'o' || first == 'p' || first == 's') {
        atom.element = std::string(1, static_cast<char>(std::toupper(static_cast<unsigned char>(first))));
        pos_ += 1;
      } else {
        throw ParseError("unknown aromatic element in bracket atom", pos_);
      }
      atom.aromatic = true;
    } else {
      throw ParseError("bracket atom without element symbol", pos_);
    }

    if (peek() == '@') throw ParseError("chirality is not supported", pos_);
    if (peek() == 'H') {
      ++pos_;
      atom.explicit_hydrogens = 1;
      if (std::isdigit(static_cast<unsigned char>(peek()))) {
        atom.explicit_hydrogens = read_number();
      }
    }
    if (peek() == '+' || peek() == '-') {
      const char sign = peek();
      const int unit = sign == '+' ? 1 : -1;
      ++pos_;
      int magnitude = 1;
      if (std::isdigit(static_cast<unsigned char>(peek()))) {
        magnitude = read_number();
      } else {
        while (peek() == sign) {
          ++magnitude;
          ++pos_;
        }
      }
      atom.formal_charge = unit * magnitude;
    }
    if (peek() == ':') throw ParseError("atom classes are not supported", pos_);
    if (peek() != ']') throw ParseError("unterminated bracket atom", start);
    ++pos_;
    push_atom(std::move(atom), start);
  }

  int read_number() {
    int value = 0;
    int digits = 0;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      value = value * 10 + (text_[pos_] - '0');
      ++pos_;
      if (++digits > 3) throw ParseError("number too long", pos_);
    }
    return value;
  }

  void push_atom(Atom atom, std::size_t position) {
    graph_.atoms.push_back(std::move(atom));
    const std::size_t index = graph_.atoms.size() - 1;
    if (previous_) {
      std::optional<BondOrder> order;
      if (pending_) order = pending_->order;
      add_bond(*previous_, index, order, position);
    } else if (pending_) {
      throw ParseError("bond without a preceding atom", pending_->position);
    }
    pending_.reset();
    previous_ = index;
  }

  void add_bond(std::size_t a, std::size_t b, std::optional<BondOrder> order, std::size_t position) {
    const auto key = std::minmax(a, b);
    if (!pairs_.insert(key).second) throw ParseError("duplicate bond", position);
    BondOrder chosen = BondOrder::kSingle;
    if (order) {
      chosen = *order;
    } else if (graph_.atoms[a].aromatic && graph_.atoms[b].aromatic) {
      chosen = BondOrder::kAromatic;
    }
    graph_.bonds.push_back({a, b, chosen});
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  MolecularGraph graph_;
  std::optional<std::size_t> previous_;
  std::optional<PendingBond> pending_;
  std::vector<Branch> branches_;
  std::map<int, OpenRing> rings_;
  std::set<std::pair<std::size_t, std::size_t>> pairs_;
};

}  // namespace

MolecularGraph parse_smiles(std::string_view smiles) { return SmilesParser(smiles).run(); }

void validate_graph(const MolecularGraph& graph) {
  if (graph.atoms.empty()) throw ShapeError("molecular graph has no atoms");
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const Bond& b : graph.bonds) {
    if (b.begin >= graph.atoms.size() || b.end >= graph.atoms.size()) throw ShapeError("bond endpoint out of range");
    if (b.begin == b.end) throw ShapeError("self bond");
    if (static_cast<int>(b.order) >= kBondOrderCount) throw ShapeError("unknown bond order");
    if (!seen.insert(std::minmax(b.begin, b.end)).second) throw ShapeError("duplicate bond");
  }
}

MolecularGraph permute_atoms(const MolecularGraph& graph, std::span<const std::size_t> new_index) {
  if (new_index.size() != graph.atoms.size()) throw ShapeError("permutation size differs from atom count");
  MolecularGraph out;
  out.source_smiles = graph.source_smiles;
  out.atoms.resize(graph.atoms.size());
  std::vector<bool> used(graph.atoms.size(), false);
  for (std::size_t i = 0; i < graph.atoms.size(); ++i) {
    if (new_index[i] >= graph.atoms.size() || used[new_index[i]]) throw ShapeError("not a permutation");
    used[new_index[i]] = true;
    out.atoms[new_index[i]] = graph.atoms[i];
  }
  for (const Bond& b : graph.bonds) out.bonds.push_back({new_index[b.begin], new_index[b.end], b.order});
  return out;
}

Matrix atom_features(const MolecularGraph& graph) {
  Matrix features = Matrix::Zero(static_cast<Eigen::Index>(graph.atoms.size()), kAtomFeatureDim);
  constexpr int kOtherColumn = 10;
  for (std::size_t i = 0; i < graph.atoms.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    const Atom& atom = graph.atoms[i];
    int column = kOtherColumn;
    for (int e = 0; e < 10; ++e) {
      if (kFeaturizedElements[e] == atom.element) column = e;
    }
    features(row, column) = 1.0;
    features(row, 11) = static_cast<double>(atom.formal_charge);
    features(row, 12) = atom.aromatic ? 1.0 : 0.0;
  }
  return features;
}

}  // namespace biofusion::chem
