// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#include "biofusion/data/corpus.hpp"

#include <algorithm>
#include <utility>

#include "biofusion/core/errors.hpp"

namespace biofusion::data {
namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

std::optional<std::string> optional_id(const nlohmann::json& row, const char* key, std::size_t line) {
  auto it = row.find(key);
  if (it == row.end() || it->is_null()) return std::nullopt;
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<std::int64_t>());
  throw SchemaError(std::string("field '") + key + "' must be a string or integer", line);
}

std::string_view trim_left(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  return s;
}

std::string_view trim_right(std::string_view s) {
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

}  // namespace

CorpusDoc corpus_doc_from_json(const nlohmann::json& row, std::size_t line) {
  CorpusDoc doc;
  doc.doc_id = require_string(row, "doc_id", line);
  doc.pmid = optional_id(row, "pmid", line);
  doc.pmcid = optional_id(row, "pmcid", line);
  doc.title = optional_string(row, "title", line);
  doc.body = require_string(row, "body", line);
  if (auto it = row.find("spans"); it != row.end() && !it->is_null()) {
    if (!it->is_array()) throw SchemaError("field 'spans' must be an array", line);
    for (const auto& s : *it) {
      if (!s.is_object()) throw SchemaError("span must be an object", line);
      const auto start = require_int(s, "start", line);
      const auto end = require_int(s, "end", line);
      if (start < 0 || end < 0) throw SchemaError("span offsets must be non-negative", line);
      doc.spans.push_back({require_string(s, "kind", line), static_cast<std::size_t>(start),
                           static_cast<std::size_t>(end)});
    }
  }
  if (auto it = row.find("metadata"); it != row.end() && !it->is_null()) {
    if (!it->is_object()) throw SchemaError("field 'metadata' must be an object", line);
    doc.metadata = *it;
  }
  return doc;
}

OrderedJson corpus_doc_to_json(const CorpusDoc& doc) {
  OrderedJson j;
  j["doc_id"] = doc.doc_id;
  j["pmid"] = doc.pmid ? OrderedJson(*doc.pmid) : OrderedJson(nullptr);
  j["pmcid"] = doc.pmcid ? OrderedJson(*doc.pmcid) : OrderedJson(nullptr);
  j["title"] = doc.title;
  j["body"] = doc.body;
  j["spans"] = OrderedJson::array();
  for (const auto& s : doc.spans) {
    j["spans"].push_back(OrderedJson{{"kind", s.kind}, {"start", s.start}, {"end", s.end}});
  }
  if (!doc.metadata.empty()) j["metadata"] = OrderedJson::parse(doc.metadata.dump());
  return j;
}

std::vector<CorpusDoc> load_corpus(const std::string& path) {
  std::vector<CorpusDoc> docs;
  read_jsonl(path, [&](const nlohmann::json& row, std::size_t line) {
    docs.push_back(corpus_doc_from_json(row, line));
  });
  return docs;
}

void save_corpus(const std::string& path, const std::vector<CorpusDoc>& docs) {
  std::vector<OrderedJson> rows;
  rows.reserve(docs.size());
  for (const auto& d : docs) rows.push_back(corpus_doc_to_json(d));
  write_jsonl(path, rows);
}

std::vector<CorpusDoc> filter_biomedical(const std::vector<CorpusDoc>& docs,
                                         const std::set<std::string>& id_allowlist,
                                         StageStats* stats) {
  StageStats local;
  local.stage = "filter_biomedical";
  local.in = docs.size();
  local.drops = {{"not_allowlisted", 0}, {"empty_body", 0}, {"duplicate_id", 0}};
  std::set<std::string> seen_doc, seen_pmid, seen_pmcid;
  std::vector<CorpusDoc> kept;
  for (const auto& doc : docs) {
    const bool listed = (doc.pmid && id_allowlist.count(*doc.pmid)) ||
                        (doc.pmcid && id_allowlist.count(*doc.pmcid));
    if (!listed) {
      ++local.drops["not_allowlisted"];
      continue;
    }
    if (trim_left(doc.body).empty()) {
      ++local.drops["empty_body"];
      continue;
    }
    const bool duplicate = seen_doc.count(doc.doc_id) || (doc.pmid && seen_pmid.count(*doc.pmid)) ||
                           (doc.pmcid && seen_pmcid.count(*doc.pmcid));
    if (duplicate) {
      ++local.drops["duplicate_id"];
      continue;
    }
    seen_doc.insert(doc.doc_id);
    if (doc.pmid) seen_pmid.insert(*doc.pmid);
    if (doc.pmcid) seen_pmcid.insert(*doc.pmcid);
    kept.push_back(doc);
  }
  local.out = kept.size();
  if (stats) *stats = std::move(local);
  return kept;
}

CorpusDoc strip_nonbody(const CorpusDoc& doc) {
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  for (const auto& s : doc.spans) {
    if (s.kind != "author" && s.kind != "reference" && s.kind != "chart") {
      throw FormatError("doc " + doc.doc_id + ": unknown span kind '" + s.kind + "'");
    }
    if (s.start > s.end || s.end > doc.body.size()) {
      throw FormatError("doc " + doc.doc_id + ": span [" + std::to_string(s.start) + ", " +
                        std::to_string(s.end) + ") outside body of " +
                        std::to_string(doc.body.size()) + " bytes");
    }
    if (s.start < s.end) ranges.emplace_back(s.start, s.end);
  }
  CorpusDoc out = doc;
  out.spans.clear();
  if (ranges.empty()) return out;

  std::sort(ranges.begin(), ranges.end());
  std::vector<std::pair<std::size_t, std::size_t>> merged;
  for (const auto& r : ranges) {
    if (!merged.empty() && r.first <= merged.back().second) {
      merged.back().second = std::max(merged.back().second, r.second);
    } else {
      merged.push_back(r);
    }
  }

  const std::string_view body = doc.body;
  std::vector<std::string_view> pieces;
  std::size_t cursor = 0;
  for (std::size_t i = 0; i <= merged.size(); ++i) {
    const std::size_t stop = i < merged.size() ? merged[i].first : body.size();
    std::string_view piece = body.substr(cursor, stop - cursor);
    if (i > 0) piece = trim_left(piece);
    if (i < merged.size()) piece = trim_right(piece);
    if (!piece.empty()) pieces.push_back(piece);
    if (i < merged.size()) cursor = merged[i].second;
  }
  out.body.clear();
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    if (i) out.body += ' ';
    out.body += pieces[i];
  }
  return out;
}

std::vector<std::string_view> split_sentences(std::string_view body) {
  std::vector<std::string_view> sentences;
  std::size_t begin = 0;
  for (std::size_t i = 0; i + 1 < body.size(); ++i) {
    const char c = body[i];
    if ((c != '.' && c != '!' && c != '?') || !is_space(body[i + 1])) continue;
    std::size_t j = i + 1;
    while (j < body.size() && is_space(body[j])) ++j;
    if (j == body.size()) break;
    const char next = body[j];
    if ((next >= 'A' && next <= 'Z') || (next >= '0' && next <= '9')) {
      sentences.push_back(body.substr(begin, i + 1 - begin));
      begin = i + 1;
    }
  }
  if (begin < body.size()) sentences.push_back(body.substr(begin));
  return sentences;
}

ChunkedDoc chunk_sentences(const CorpusDoc& doc, const text::Tokenizer& tokenizer,
                           std::size_t max_tokens) {
  if (max_tokens < 16) throw ConfigError("max_tokens must be at least 16");
  ChunkedDoc result;
  TextChunk open;
  auto flush = [&] {
    if (open.tokens.empty()) return;
    result.total_tokens += open.tokens.size();
    result.chunks.push_back(std::move(open));
    open = TextChunk{};
  };
  for (std::string_view sentence : split_sentences(doc.body)) {
    std::vector<text::TokenId> ids = tokenizer.encode(sentence);
    if (ids.size() <= max_tokens) {
      if (open.tokens.size() + ids.size() > max_tokens) flush();
      open.tokens.insert(open.tokens.end(), ids.begin(), ids.end());
      open.text += sentence;
      continue;
    }
    flush();
    for (std::size_t at = 0; at < ids.size(); at += max_tokens) {
      const std::size_t stop = std::min(ids.size(), at + max_tokens);
      open.tokens.assign(ids.begin() + at, ids.begin() + stop);
      open.text = tokenizer.decode(std::span(open.tokens));
      if (stop < ids.size()) flush();
    }
  }
  flush();
  return result;
}

}  // namespace biofusion::data
