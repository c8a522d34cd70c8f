// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

// Writes the raw fixture tree used by the C API and CLI tests.

#include <cstdio>
#include <filesystem>

#include "support/fixtures.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: make_fixtures DIR\n");
    return 2;
  }
  std::filesystem::remove_all(argv[1]);
  biofusion::testing::write_fixture_tree(argv[1]);
  return 0;
}
