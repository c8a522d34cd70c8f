// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "biofusion/data/jsonl.hpp"
#include "biofusion/text/tokenizer.hpp"

namespace biofusion::data {

/// Byte range [start, end) of the body tagged as author, reference or chart text.
struct TaggedSpan {
  std::string kind;
  std::size_t start = 0;
  std::size_t end = 0;
};

struct CorpusDoc {
  std::string doc_id;
  std::optional<std::string> pmid;
  std::optional<std::string> pmcid;
  std::string title;
  std::string body;
  std::vector<TaggedSpan> spans;
  nlohmann::json metadata = nlohmann::json::object();
};

CorpusDoc corpus_doc_from_json(const nlohmann::json& row, std::size_t line);
OrderedJson corpus_doc_to_json(const CorpusDoc& doc);
std::vector<CorpusDoc> load_corpus(const std::string& path);
void save_corpus(const std::string& path, const std::vector<CorpusDoc>& docs);

/// Keeps docs with an allowlisted pmid or pmcid, then drops docs whose body is
/// blank, then drops any doc sharing a doc_id, pmid or pmcid with an earlier
/// kept doc. Input order is preserved.
std::vector<CorpusDoc> filter_biomedical(const std::vector<CorpusDoc>& docs,
                                         const std::set<std::string>& id_allowlist,
                                         StageStats* stats = nullptr);

/// Removes the union of tagged spans. Text on either side of a removed region
/// is joined with exactly one space (none at the body edges). A doc without
/// spans is returned unchanged. Throws FormatError when start > end, end is
/// past the body, or the kind is not author/reference/chart.
CorpusDoc strip_nonbody(const CorpusDoc& doc);

/// Sentence boundaries: after '.', '!' or '?' when followed by whitespace and
/// then an uppercase letter, digit or end of text. The whitespace starts the
/// next sentence, so the returned pieces concatenate to `body` exactly.
std::vector<std::string_view> split_sentences(std::string_view body);

struct TextChunk {
  std::vector<text::TokenId> tokens;
  std::string text;
};

struct ChunkedDoc {
  std::vector<TextChunk> chunks;
  std::size_t total_tokens = 0;
};

/// Greedy sentence packing into chunks of at most `max_tokens` tokens. Each
/// sentence is encoded on its own. A sentence longer than max_tokens closes the
/// open chunk and is split at token boundaries into max_tokens pieces; the last
/// piece stays open for packing. Throws ConfigError if max_tokens < 16.
ChunkedDoc chunk_sentences(const CorpusDoc& doc, const text::Tokenizer& tokenizer,
                           std::size_t max_tokens);

}  // namespace biofusion::data
