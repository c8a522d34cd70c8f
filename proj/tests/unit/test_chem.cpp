// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <set>

#include "biofusion/chem/gin.hpp"
#include "biofusion/chem/molecular_graph.hpp"
#include "biofusion/core/errors.hpp"
#include "biofusion/core/rng.hpp"
#include "support/synthetic.hpp"

using namespace biofusion;
using chem::BondOrder;

namespace {

int column_of(std::string_view element) {
  for (int i = 0; i < 10; ++i) {
    if (chem::kFeaturizedElements[i] == element) return i;
  }
  return 10;
}

std::set<std::pair<std::size_t, std::size_t>> edge_set(const chem::MolecularGraph& g) {
  std::set<std::pair<std::size_t, std::size_t>> edges;
  for (const auto& b : g.bonds) edges.insert({std::min(b.begin, b.end), std::max(b.begin, b.end)});
  return edges;
}

void zero_group(ParamStore& store, std::string_view group) {
  for (auto& p : store.all()) {
    if (p.group == group) p.value.setZero();
  }
}

}  // namespace

TEST_CASE("single carbon has one atom and no bonds") {
  const auto g = chem::parse_smiles("C");
  REQUIRE(g.atom_count() == 1);
  CHECK(g.atoms[0].element == "C");
  CHECK(g.bonds.empty());
}

TEST_CASE("ring closure forms a triangle of single bonds") {
  const auto g = chem::parse_smiles("C1CC1");
  REQUIRE(g.atom_count() == 3);
  REQUIRE(g.bonds.size() == 3);
  for (const auto& b : g.bonds) CHECK(b.order == BondOrder::kSingle);
  CHECK(edge_set(g) == std::set<std::pair<std::size_t, std::size_t>>{{0, 1}, {1, 2}, {0, 2}});
}

TEST_CASE("grammar errors") {
  CHECK_THROWS_AS(chem::parse_smiles("C("), ParseError);
  CHECK_THROWS_AS(chem::parse_smiles("C1CC"), ParseError);
  CHECK_THROWS_AS(chem::parse_smiles(""), ParseError);
  CHECK_THROWS_AS(chem::parse_smiles("C)"), ParseError);
  CHECK_THROWS_AS(chem::parse_smiles("[13CH4]"), ParseError);
  CHECK_THROWS_AS(chem::parse_smiles("F/C=C/F"), ParseError);
  CHECK_THROWS_AS(chem::parse_smiles("C.C"), ParseError);
  CHECK_THROWS_AS(chem::parse_smiles("Xx"), ParseError);
}

TEST_CASE("parse error reports the offending offset") {
  try {
    chem::parse_smiles("CC(C");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.position() <= 4);
    CHECK(e.code() == ErrorCode::kParse);
  }
}

TEST_CASE("branches, bond orders and two-digit ring labels") {
  const auto g = chem::parse_smiles("CC(=O)O");
  REQUIRE(g.atom_count() == 4);
  REQUIRE(g.bonds.size() == 3);
  CHECK(edge_set(g) == std::set<std::pair<std::size_t, std::size_t>>{{0, 1}, {1, 2}, {1, 3}});
  int doubles = 0;
  for (const auto& b : g.bonds) doubles += b.order == BondOrder::kDouble;
  CHECK(doubles == 1);

  const auto triple = chem::parse_smiles("C#N");
  CHECK(triple.bonds.at(0).order == BondOrder::kTriple);

  const auto big = chem::parse_smiles("C%12CC%12");
  CHECK(big.bonds.size() == 3);

  const auto halo = chem::parse_smiles("ClCBr");
  CHECK(halo.atoms[0].element == "Cl");
  CHECK(halo.atoms[2].element == "Br");
}

TEST_CASE("aromatic ring bonds are aromatic") {
  const auto g = chem::parse_smiles("c1ccccc1");
  REQUIRE(g.atom_count() == 6);
  REQUIRE(g.bonds.size() == 6);
  for (const auto& b : g.bonds) CHECK(b.order == BondOrder::kAromatic);
}

TEST_CASE("parsing is stable") {
  for (const char* s : {"CCO", "c1ccccc1CC(=O)O", "[NH4+]", "N#CC1CC1"}) {
    CHECK(chem::parse_smiles(s) == chem::parse_smiles(s));
  }
}

TEST_CASE("atom features") {
  SUBCASE("carbon") {
    const Matrix f = chem::atom_features(chem::parse_smiles("C"));
    REQUIRE(f.rows() == 1);
    REQUIRE(f.cols() == chem::kAtomFeatureDim);
    CHECK(f.row(0).head(11).sum() == 1.0);
    CHECK(f(0, column_of("C")) == 1.0);
    CHECK(f(0, 11) == 0.0);
    CHECK(f(0, 12) == 0.0);
  }
  SUBCASE("bracket ammonium") {
    const auto g = chem::parse_smiles("[NH4+]");
    CHECK(g.atoms[0].explicit_hydrogens == 4);
    const Matrix f = chem::atom_features(g);
    CHECK(f(0, column_of("N")) == 1.0);
    CHECK(f.row(0).head(11).sum() == 1.0);
    CHECK(f(0, 11) == 1.0);
  }
  SUBCASE("benzene") {
    const Matrix f = chem::atom_features(chem::parse_smiles("c1ccccc1"));
    REQUIRE(f.rows() == 6);
    for (int i = 0; i < 6; ++i) CHECK(f(i, 12) == 1.0);
  }
  SUBCASE("unlisted element") {
    const Matrix f = chem::atom_features(chem::parse_smiles("[Na+]"));
    CHECK(f(0, 10) == 1.0);
  }
}

TEST_CASE("permute_atoms moves atom i to new_index[i]") {
  const auto g = chem::parse_smiles("CCO");
  const std::array<std::size_t, 3> perm = {2, 0, 1};
  const auto p = chem::permute_atoms(g, perm);
  CHECK(p.atoms[2].element == "C");
  CHECK(p.atoms[0].element == "C");
  CHECK(p.atoms[1].element == "O");
  CHECK(p.bonds.size() == g.bonds.size());
  chem::validate_graph(p);
}

TEST_CASE("validate_graph rejects malformed graphs") {
  chem::MolecularGraph g = chem::parse_smiles("CC");
  g.bonds.push_back({0, 0, BondOrder::kSingle});
  CHECK_THROWS_AS(chem::validate_graph(g), ShapeError);
  chem::MolecularGraph empty;
  CHECK_THROWS_AS(chem::validate_graph(empty), ShapeError);
}

TEST_CASE("zero GIN parameters give a zero row") {
  chem::GinEncoder enc({.layers = 2, .hidden = 8});
  ParamStore store;
  Rng rng(3);
  enc.init(store, rng);
  zero_group(store, enc.group());
  const Matrix out = enc.encode(store, chem::parse_smiles("C"));
  REQUIRE(out.rows() == 1);
  REQUIRE(out.cols() == 8);
  CHECK(out.isZero(0.0));
}

TEST_CASE("GIN is permutation equivariant") {
  chem::GinEncoder enc({.layers = 5, .hidden = 16});
  ParamStore store;
  Rng rng(11);
  enc.init(store, rng);
  for (const char* smiles : {"CCO", "c1ccccc1CC(=O)O", "N#CC1CC1Cl"}) {
    const auto g = chem::parse_smiles(smiles);
    std::vector<std::size_t> perm(g.atom_count());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    rng.shuffle(perm);
    const Matrix a = enc.encode(store, g);
    const Matrix b = enc.encode(store, chem::permute_atoms(g, perm));
    for (std::size_t i = 0; i < perm.size(); ++i) {
      const double diff = (a.row(static_cast<Eigen::Index>(i)) - b.row(static_cast<Eigen::Index>(perm[i]))).cwiseAbs().maxCoeff();
      CHECK(diff <= 1e-6);
    }
  }
}

TEST_CASE("symmetric neighbourhoods give equal rows under an identity-like MLP") {
  chem::GinEncoder enc({.layers = 1, .hidden = chem::kAtomFeatureDim});
  ParamStore store;
  Rng rng(5);
  enc.init(store, rng);
  zero_group(store, enc.group());
  store.get(enc.name(0, "mlp.w1")).value.setIdentity();
  store.get(enc.name(0, "mlp.w2")).value.setIdentity();
  const Matrix out = enc.encode(store, chem::parse_smiles("CC"));
  // Hand evaluation: each carbon sees itself plus one carbon neighbour.
  Matrix expected = Matrix::Zero(1, chem::kAtomFeatureDim);
  expected(0, column_of("C")) = 2.0;
  CHECK(out.row(0) == out.row(1));
  CHECK(out.row(0) == expected.row(0));
}

TEST_CASE("GIN output is deterministic") {
  chem::GinEncoder enc({.layers = 3, .hidden = 8});
  ParamStore store;
  Rng rng(2);
  enc.init(store, rng);
  const auto g = chem::parse_smiles("c1ccccc1O");
  CHECK(enc.encode(store, g) == enc.encode(store, g));
}

TEST_CASE("GIN parameter shape checks") {
  chem::GinEncoder enc({.layers = 2, .hidden = 8});
  ParamStore store;
  Rng rng(2);
  enc.init(store, rng);
  CHECK_NOTHROW(enc.check_params(store));
  chem::GinEncoder wider({.layers = 2, .hidden = 16});
  CHECK_THROWS_AS(wider.check_params(store), ShapeError);
  chem::GinEncoder deeper({.layers = 3, .hidden = 8});
  CHECK_THROWS_AS(deeper.check_params(store), ShapeError);
  chem::GinEncoder shallower({.layers = 1, .hidden = 8});
  CHECK_THROWS_AS(shallower.check_params(store), ShapeError);
}

TEST_CASE("GIN gradients match central differences") {
  chem::GinEncoder enc({.layers = 2, .hidden = 8});
  ParamStore store;
  Rng rng(17);
  enc.init(store, rng);
  // Nonzero eps and biases so every parameter kind is exercised away from zero.
  for (auto& p : store.all()) {
    if (p.name.find("eps") != std::string::npos || p.name.find(".b") != std::string::npos) {
      for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = 0.1 * rng.normal();
    }
  }
  const auto g = chem::parse_smiles("c1ccccc1C(=O)N");
  const auto n = static_cast<Eigen::Index>(g.atom_count());
  Matrix u(1, n);
  Matrix v(8, 1);
  for (Eigen::Index i = 0; i < u.size(); ++i) u.data()[i] = rng.normal();
  for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = rng.normal();
  // Random bilinear read-out u^T H v of the atom features.
  const testing::ScalarBuild build = [&](const ad::Binder& bind) {
    const ad::Var out = enc.forward(bind, g);
    return ad::matmul(ad::matmul(bind.tape().constant(u), out), bind.tape().constant(v));
  };
  const auto result = testing::check_group_gradients(store, enc.group(), build, 40, rng);
  INFO("worst " << result.worst_name << " rel " << result.worst_relative);
  CHECK(result.checked == 40);
  CHECK(result.failed == 0);
}
