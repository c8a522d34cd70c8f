// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace biofusion::text {

using TokenId = std::int64_t;

/// Reserved ids. Every tokenizer starts with these, then the 256 byte tokens,
/// then learned merges.
enum SpecialToken : TokenId {
  kPad = 0,
  kBos = 1,
  kEos = 2,
  kMoleculeOpen = 3,
  kMoleculeClose = 4,
  kProteinOpen = 5,
  kProteinClose = 6,
};
inline constexpr std::array<std::string_view, 7> kSpecialTexts = {
    "<pad>", "<bos>", "<eos>", "<molecule>", "</molecule>", "<protein>", "</protein>"};
inline constexpr TokenId kSpecialCount = 7;
inline constexpr TokenId kByteOffset = kSpecialCount;
inline constexpr int kBaseVocabSize = static_cast<int>(kSpecialCount) + 256;

/// Byte-level BPE tokenizer. Text is first split into pieces at every
/// whitespace run that follows a non-whitespace byte (the whitespace starts the
/// next piece); merges never cross piece boundaries. encode() never emits
/// special ids, so decode(encode(s)) == s for every byte string s.
class Tokenizer {
 public:
  /// Byte-only tokenizer without merges.
  Tokenizer();

  /// Learns merges by descending pair frequency; ties go to the
  /// lexicographically smallest (left bytes, right bytes). Stops at
  /// `vocab_size` or when no pair occurs at least twice. Throws ConfigError if
  /// vocab_size < kBaseVocabSize or the corpus is empty.
  static Tokenizer train(std::span<const std::string> corpus, int vocab_size);

  std::vector<TokenId> encode(std::string_view text) const;

  /// Concatenated bytes of `ids`. Special tokens render as their text when
  /// `render_specials` is set and are skipped otherwise.
  std::string decode(std::span<const TokenId> ids, bool render_specials = false) const;

  int vocab_size() const { return static_cast<int>(vocab_.size()); }
  const std::string& token_text(TokenId id) const;
  const std::vector<std::pair<TokenId, TokenId>>& merges() const { return merges_; }

  nlohmann::json to_json() const;
  static Tokenizer from_json(const nlohmann::json& j);

  bool operator==(const Tokenizer& other) const { return merges_ == other.merges_; }

 private:
  void add_merge(TokenId left, TokenId right);

  std::vector<std::string> vocab_;
  std::vector<std::pair<TokenId, TokenId>> merges_;
  std::map<std::pair<TokenId, TokenId>, std::size_t> merge_rank_;
};

/// Splits text into BPE pieces (see Tokenizer).
std::vector<std::string_view> pre_tokenize(std::string_view text);

}  // namespace biofusion::text
