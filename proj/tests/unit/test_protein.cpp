// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "biofusion/core/errors.hpp"
#include "biofusion/core/rng.hpp"
#include "biofusion/protein/encoder.hpp"
#include "biofusion/protein/sequence.hpp"
#include "support/synthetic.hpp"

using namespace biofusion;
using protein::ProteinEncoder;
using protein::validate_sequence;

namespace {

ProteinEncoder small_encoder(ParamStore& store, std::uint64_t seed, int layers = 1, int max_residues = 32) {
  ProteinEncoder enc({.layers = layers, .width = 8, .heads = 2, .ff_width = 16, .max_residues = max_residues});
  Rng rng(seed);
  enc.init(store, rng);
  return enc;
}

}  // namespace

TEST_CASE("sequence validation") {
  CHECK(validate_sequence("mkv").residues() == "MKV");
  CHECK(validate_sequence("ACDEFGHIKLMNPQRSTVWYX").length() == 21);
  try {
    validate_sequence("MK1");
    FAIL("expected AlphabetError");
  } catch (const AlphabetError& e) {
    CHECK(e.position() == 2);
    CHECK(e.offending() == '1');
  }
  CHECK_THROWS_AS(validate_sequence(""), ShapeError);
  CHECK_THROWS_AS(validate_sequence("MK V"), AlphabetError);
  CHECK(protein::residue_index('A') == 0);
  CHECK(protein::residue_index('X') == 20);
}

TEST_CASE("zero parameters give zero rows") {
  ParamStore store;
  const auto enc = small_encoder(store, 1, 2);
  for (auto& p : store.all()) p.value.setZero();
  const Matrix out = enc.encode(store, validate_sequence("MKVLA"));
  CHECK(out.rows() == 5);
  CHECK(out.isZero(0.0));
}

TEST_CASE("single residue shape") {
  ParamStore store;
  const auto enc = small_encoder(store, 2);
  const Matrix out = enc.encode(store, validate_sequence("M"));
  CHECK(out.rows() == 1);
  CHECK(out.cols() == 8);
}

TEST_CASE("a single substitution changes every output row") {
  ParamStore store;
  const auto enc = small_encoder(store, 3);
  const Matrix a = enc.encode(store, validate_sequence("MKVLAGW"));
  const Matrix b = enc.encode(store, validate_sequence("MKVYAGW"));
  for (Eigen::Index r = 0; r < a.rows(); ++r) CHECK((a.row(r) - b.row(r)).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("attention rows are probability vectors") {
  ParamStore store;
  const auto enc = small_encoder(store, 4, 2);
  const auto maps = enc.attention_maps(store, validate_sequence("MKVLAGWPRT"));
  CHECK(maps.size() == 4);
  for (const auto& m : maps) {
    CHECK(m.rows() == 10);
    CHECK(m.minCoeff() >= 0.0);
    for (Eigen::Index r = 0; r < m.rows(); ++r) CHECK(std::abs(m.row(r).sum() - 1.0) <= 1e-6);
  }
}

TEST_CASE("long sequences are truncated to their prefix") {
  ParamStore store;
  const auto enc = small_encoder(store, 5, 1, 6);
  const auto long_seq = validate_sequence("MKVLAGWPRTQ");
  const auto prefix = validate_sequence("MKVLAG");
  CHECK(enc.output_rows(long_seq) == 6);
  CHECK(enc.encode(store, long_seq) == enc.encode(store, prefix));
}

TEST_CASE("parameter shape checks") {
  ParamStore store;
  const auto enc = small_encoder(store, 6);
  CHECK_NOTHROW(enc.check_params(store));
  ProteinEncoder wider({.layers = 1, .width = 16, .heads = 2, .ff_width = 16, .max_residues = 32});
  CHECK_THROWS_AS(wider.check_params(store), ShapeError);
}

TEST_CASE("protein encoder gradients match central differences") {
  ParamStore store;
  const auto enc = small_encoder(store, 7, 1);
  Rng rng(8);
  for (auto& p : store.all()) {
    if (p.rank == 1) {
      for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] += 0.1 * rng.normal();
    }
  }
  const auto seq = validate_sequence("MKVLAGW");
  Matrix u(1, 7);
  Matrix v(8, 1);
  for (Eigen::Index i = 0; i < u.size(); ++i) u.data()[i] = rng.normal();
  for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = rng.normal();
  const testing::ScalarBuild build = [&](const ad::Binder& bind) {
    const ad::Var out = enc.forward(bind, seq);
    return ad::matmul(ad::matmul(bind.tape().constant(u), out), bind.tape().constant(v));
  };
  const auto result = testing::check_group_gradients(store, enc.group(), build, 40, rng);
  INFO("worst " << result.worst_name << " rel " << result.worst_relative);
  CHECK(result.failed == 0);
}
