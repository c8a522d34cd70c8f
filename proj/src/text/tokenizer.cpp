// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#include "biofusion/text/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <unordered_map>

#include "biofusion/core/errors.hpp"

namespace biofusion::text {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

struct PairHash {
  std::size_t operator()(const std::pair<TokenId, TokenId>& p) const noexcept {
    return std::hash<TokenId>()(p.first * 1000003 + p.second);
  }
};

void apply_merge(std::vector<TokenId>& symbols, TokenId left, TokenId right, TokenId merged) {
  std::size_t out = 0;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (i + 1 < symbols.size() && symbols[i] == left && symbols[i + 1] == right) {
      symbols[out++] = merged;
      ++i;
    } else {
      symbols[out++] = symbols[i];
    }
  }
  symbols.resize(out);
}

}  // namespace

std::vector<std::string_view> pre_tokenize(std::string_view text) {
  std::vector<std::string_view> pieces;
  std::size_t start = 0;
  for (std::size_t i = 1; i < text.size(); ++i) {
    if (is_space(text[i]) && !is_space(text[i - 1])) {
      pieces.push_back(text.substr(start, i - start));
      start = i;
    }
  }
  if (start < text.size()) pieces.push_back(text.substr(start));
  return pieces;
}

Tokenizer::Tokenizer() {
  vocab_.reserve(kBaseVocabSize);
  for (auto s : kSpecialTexts) vocab_.emplace_back(s);
  for (int b = 0; b < 256; ++b) vocab_.emplace_back(1, static_cast<char>(b));
}

const std::string& Tokenizer::token_text(TokenId id) const {
  if (id < 0 || id >= static_cast<TokenId>(vocab_.size())) throw ShapeError("token id out of range: " + std::to_string(id));
  return vocab_[static_cast<std::size_t>(id)];
}

void Tokenizer::add_merge(TokenId left, TokenId right) {
  const TokenId merged = static_cast<TokenId>(vocab_.size());
  vocab_.push_back(token_text(left) + token_text(right));
  merge_rank_.emplace(std::make_pair(left, right), merges_.size());
  merges_.emplace_back(left, right);
  (void)merged;
}

Tokenizer Tokenizer::train(std::span<const std::string> corpus, int vocab_size) {
  if (vocab_size < kBaseVocabSize) {
    throw ConfigError("vocab_size " + std::to_string(vocab_size) + " is below the base vocabulary of " +
                      std::to_string(kBaseVocabSize));
  }
  if (corpus.empty()) throw ConfigError("tokenizer corpus is empty");

  std::map<std::string, std::int64_t> piece_counts;
  for (const auto& line : corpus) {
    for (auto piece : pre_tokenize(line)) ++piece_counts[std::string(piece)];
  }
  if (piece_counts.empty()) throw ConfigError("tokenizer corpus is empty");

  struct Word {
    std::vector<TokenId> symbols;
    std::int64_t count;
  };
  std::vector<Word> words;
  words.reserve(piece_counts.size());
  for (const auto& [piece, count] : piece_counts) {
    Word w;
    w.count = count;
    for (unsigned char c : piece) w.symbols.push_back(kByteOffset + c);
    words.push_back(std::move(w));
  }

  Tokenizer tok;
  while (tok.vocab_size() < vocab_size) {
    std::unordered_map<std::pair<TokenId, TokenId>, std::int64_t, PairHash> pair_counts;
    for (const auto& w : words) {
      for (std::size_t i = 0; i + 1 < w.symbols.size(); ++i) pair_counts[{w.symbols[i], w.symbols[i + 1]}] += w.count;
    }
    const std::pair<TokenId, TokenId>* best = nullptr;
    std::int64_t best_count = 0;
    for (const auto& [pair, count] : pair_counts) {
      const std::string merged = tok.token_text(pair.first) + tok.token_text(pair.second);
      if (std::find(kSpecialTexts.begin(), kSpecialTexts.end(), merged) != kSpecialTexts.end()) continue;
      bool better = count > best_count;
      if (!better && count == best_count && best != nullptr) {
        const auto lhs = std::tie(tok.token_text(pair.first), tok.token_text(pair.second));
        const auto rhs = std::tie(tok.token_text(best->first), tok.token_text(best->second));
        better = lhs < rhs;
      }
      if (better) {
        best = &pair;
        best_count = count;
      }
    }
    if (best == nullptr || best_count < 2) break;
    const auto [left, right] = *best;
    const TokenId merged = tok.vocab_size();
    tok.add_merge(left, right);
    for (auto& w : words) apply_merge(w.symbols, left, right, merged);
  }
  return tok;
}

std::vector<TokenId> Tokenizer::encode(std::string_view text) const {
  std::vector<TokenId> out;
  out.reserve(text.size());
  std::vector<TokenId> symbols;
  for (auto piece : pre_tokenize(text)) {
    symbols.clear();
    for (unsigned char c : piece) symbols.push_back(kByteOffset + c);
    while (symbols.size() > 1) {
      std::size_t best_rank = std::numeric_limits<std::size_t>::max();
      for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
        auto it = merge_rank_.find({symbols[i], symbols[i + 1]});
        if (it != merge_rank_.end() && it->second < best_rank) best_rank = it->second;
      }
      if (best_rank == std::numeric_limits<std::size_t>::max()) break;
      const auto [left, right] = merges_[best_rank];
      apply_merge(symbols, left, right, kBaseVocabSize + static_cast<TokenId>(best_rank));
    }
    out.insert(out.end(), symbols.begin(), symbols.end());
  }
  return out;
}

std::string Tokenizer::decode(std::span<const TokenId> ids, bool render_specials) const {
  std::string out;
  for (TokenId id : ids) {
    if (id < kSpecialCount && !render_specials) {
      token_text(id);
      continue;
    }
    out += token_text(id);
  }
  return out;
}

nlohmann::json Tokenizer::to_json() const {
  nlohmann::json merges = nlohmann::json::array();
  for (const auto& [l, r] : merges_) merges.push_back({l, r});
  return {{"type", "byte-bpe"}, {"special_tokens", kSpecialTexts}, {"merges", merges}};
}

Tokenizer Tokenizer::from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("type", "") != "byte-bpe" || !j.contains("merges") || !j["merges"].is_array()) {
    throw FormatError("not a byte-bpe tokenizer description");
  }
  Tokenizer tok;
  for (const auto& m : j["merges"]) {
    if (!m.is_array() || m.size() != 2) throw FormatError("malformed merge entry");
    const auto l = m[0].get<TokenId>();
    const auto r = m[1].get<TokenId>();
    if (l < kByteOffset || r < kByteOffset || l >= tok.vocab_size() || r >= tok.vocab_size()) {
      throw FormatError("merge references unknown token");
    }
    tok.add_merge(l, r);
  }
  return tok;
}

}  // namespace biofusion::text
