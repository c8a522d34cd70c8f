// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>

#include "biofusion/core/errors.hpp"
#include "biofusion/data/corpus.hpp"
#include "biofusion/data/jsonl.hpp"
#include "biofusion/data/mcq.hpp"
#include "biofusion/data/qa.hpp"
#include "biofusion/text/tokenizer.hpp"
#include "support/temp_dir.hpp"

using namespace biofusion;
using namespace biofusion::data;

namespace {

CorpusDoc doc(std::string id, std::optional<std::string> pmid, std::optional<std::string> pmcid, std::string body) {
  CorpusDoc d;
  d.doc_id = std::move(id);
  d.pmid = std::move(pmid);
  d.pmcid = std::move(pmcid);
  d.body = std::move(body);
  return d;
}

std::string words(std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out += (i ? " w" : "w") + std::to_string(i);
  return out;
}

QaRecord record(std::string id, std::string entity) {
  QaRecord r;
  r.record_id = std::move(id);
  r.entity_id = std::move(entity);
  r.answer = "x";
  return r;
}

}  // namespace

TEST_CASE("biomedical filter") {
  const std::set<std::string> allow = {"111", "PMC9", "PMC7"};
  StageStats stats;
  SUBCASE("allowlisted doc with a body is kept") {
    const auto out = filter_biomedical({doc("a", "111", std::nullopt, "text")}, allow, &stats);
    CHECK(out.size() == 1);
  }
  SUBCASE("second doc sharing a pmcid is dropped") {
    const auto out =
        filter_biomedical({doc("a", std::nullopt, "PMC9", "one"), doc("b", "111", "PMC9", "two")}, allow, &stats);
    REQUIRE(out.size() == 1);
    CHECK(out[0].doc_id == "a");
    CHECK(stats.drops["duplicate_id"] == 1);
  }
  SUBCASE("empty body is dropped") {
    const auto out = filter_biomedical({doc("a", "111", std::nullopt, "  \n")}, allow, &stats);
    CHECK(out.empty());
    CHECK(stats.drops["empty_body"] == 1);
  }
  SUBCASE("conservation over a mixed set") {
    const auto out = filter_biomedical({doc("a", "111", std::nullopt, "x"), doc("b", "222", std::nullopt, "y"),
                                        doc("c", std::nullopt, "PMC7", ""), doc("a", std::nullopt, "PMC9", "z")},
                                       allow, &stats);
    CHECK(out.size() == 1);
    CHECK(stats.in == 4);
    CHECK(stats.out == 1);
    CHECK(stats.conserved());
    CHECK(stats.drops["not_allowlisted"] == 1);
  }
}

TEST_CASE("strip non-body spans") {
  SUBCASE("one reference span joins neighbours with one space") {
    auto d = doc("a", "1", std::nullopt, "Cells divide [12, 13] rapidly.");
    d.spans = {{"reference", 13, 21}};
    CHECK(strip_nonbody(d).body == "Cells divide rapidly.");
  }
  SUBCASE("no spans is the identity") {
    const auto d = doc("a", "1", std::nullopt, "Unchanged  text\n");
    CHECK(strip_nonbody(d).body == d.body);
  }
  SUBCASE("overlapping spans remove their union") {
    // Interval-union oracle: [4,10) U [8,15) = [4,15).
    auto d = doc("a", "1", std::nullopt, "abc AUTHORS1234 def");
    d.spans = {{"author", 4, 10}, {"chart", 8, 15}};
    const std::string body = d.body;
    const std::string expected = body.substr(0, 3) + " " + body.substr(16);
    CHECK(strip_nonbody(d).body == expected);
  }
  SUBCASE("leading and trailing spans leave no edge spaces") {
    auto d = doc("a", "1", std::nullopt, "Smith J. Body text. Ref 1");
    d.spans = {{"author", 0, 8}, {"reference", 20, 25}};
    CHECK(strip_nonbody(d).body == "Body text.");
  }
  SUBCASE("malformed offsets") {
    auto d = doc("a", "1", std::nullopt, "short");
    d.spans = {{"reference", 3, 2}};
    CHECK_THROWS_AS(strip_nonbody(d), FormatError);
    d.spans = {{"reference", 0, 9}};
    CHECK_THROWS_AS(strip_nonbody(d), FormatError);
    d.spans = {{"footnote", 0, 1}};
    CHECK_THROWS_AS(strip_nonbody(d), FormatError);
  }
}

TEST_CASE("sentence splitting") {
  const std::string body = "First one. Second one! 3 is a number? yes lower. End";
  const auto parts = split_sentences(body);
  REQUIRE(parts.size() == 4);
  CHECK(parts[0] == "First one.");
  CHECK(parts[1] == " Second one!");
  CHECK(parts[2] == " 3 is a number? yes lower.");
  std::string joined;
  for (auto p : parts) joined += p;
  CHECK(joined == body);
}

TEST_CASE("sentence chunking") {
  const text::Tokenizer bytes;  // one token per byte
  SUBCASE("short body is one chunk") {
    const auto out = chunk_sentences(doc("a", "1", std::nullopt, "Tiny body. Two sentences."), bytes, 64);
    REQUIRE(out.chunks.size() == 1);
    CHECK(out.total_tokens == 25);
  }
  SUBCASE("two 100-token sentences with max 150 give two chunks") {
    const std::string s1 = "A" + std::string(98, 'a') + ".";
    const std::string s2 = " B" + std::string(97, 'b') + ".";
    REQUIRE(s1.size() == 100);
    REQUIRE(s2.size() == 100);
    const auto out = chunk_sentences(doc("a", "1", std::nullopt, s1 + s2), bytes, 150);
    REQUIRE(out.chunks.size() == 2);
    CHECK(out.chunks[0].text == s1);
    CHECK(out.chunks[1].text == s2);
    CHECK(out.total_tokens == 200);
  }
  SUBCASE("chunk texts concatenate to the body") {
    std::string body;
    for (int i = 0; i < 30; ++i) body += (i ? " " : "") + std::string("Sentence number ") + std::to_string(i) + ".";
    body += " " + std::string(70, 'Z') + ".";
    const auto out = chunk_sentences(doc("a", "1", std::nullopt, body), bytes, 32);
    std::string joined;
    for (const auto& c : out.chunks) {
      CHECK(c.tokens.size() <= 32);
      joined += c.text;
    }
    CHECK(joined == body);
  }
  SUBCASE("minimum chunk size") {
    CHECK_THROWS_AS(chunk_sentences(doc("a", "1", std::nullopt, "x"), bytes, 15), ConfigError);
  }
}

TEST_CASE("word rules") {
  CHECK(count_words("  a  b\tc\n") == 3);
  CHECK(count_words("") == 0);
  CHECK(crop_words("a b c d", 2) == "a b");
  CHECK(crop_words("a b", 5) == "a b");
}

TEST_CASE("PubChemQA builder") {
  SUBCASE("3-word description is dropped, 300 words are cropped") {
    const auto out = build_pubchemqa({{"1", "CCO", "too short here"}, {"2", "CCO", words(300)}});
    REQUIRE(out.records.size() == 1);
    CHECK(count_words(out.records[0].answer) == 256);
    CHECK(out.records[0].question == kMoleculeQuestion);
    CHECK(out.stats.extra.at("cropped") == 1);
  }
  SUBCASE("10 raw rows with 2 bad SMILES and 1 short text give 7 records") {
    std::vector<RawMoleculeText> raw;
    for (int i = 0; i < 10; ++i) raw.push_back({std::to_string(i % 6), "CC(=O)O", "a small organic acid molecule"});
    raw[2].smiles = "C(";
    raw[5].smiles = "C1CC";
    raw[7].description = "three word text";
    const auto out = build_pubchemqa(raw);
    CHECK(out.records.size() == 7);
    CHECK(out.stats.in == 10);
    CHECK(out.stats.drops.at("smiles_parse") == 2);
    CHECK(out.stats.drops.at("short_description") == 1);
    CHECK(out.stats.conserved());
    std::set<std::string> cids;
    for (const auto& r : out.records) cids.insert(r.entity_id);
    CHECK(out.stats.extra.at("unique_molecules") == cids.size());
    CHECK(out.stats.extra.at("pairs") == 7);
  }
}

TEST_CASE("UniProtQA builder") {
  RawProteinEntry full{"P1", "MKV", "binds ATP", "Kinase 1", "kinase family", "nucleus"};
  SUBCASE("four annotations give four records") {
    const auto out = build_uniprotqa({full});
    REQUIRE(out.records.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(out.records[i].question == kProteinQuestions[i].question);
      CHECK(out.records[i].question_type == kProteinQuestions[i].type);
    }
  }
  SUBCASE("missing family gives three records") {
    auto e = full;
    e.family.reset();
    CHECK(build_uniprotqa({e}).records.size() == 3);
  }
  SUBCASE("invalid sequence gives no records and one log line") {
    auto e = full;
    e.sequence = "MK1";
    const auto out = build_uniprotqa({e});
    CHECK(out.records.empty());
    CHECK(out.log.size() == 1);
    CHECK(out.stats.drops.at("invalid_sequence") == 1);
  }
}

TEST_CASE("entity-grouped splitting") {
  SUBCASE("10 singletons split 8/1/1 deterministically") {
    std::vector<QaRecord> records;
    for (int i = 0; i < 10; ++i) records.push_back(record(std::to_string(i), "e" + std::to_string(i)));
    const auto a = split_dataset(records, {8, 1, 1}, 5);
    const auto b = split_dataset(records, {8, 1, 1}, 5);
    std::map<std::string, int> counts;
    for (std::size_t i = 0; i < a.size(); ++i) {
      ++counts[a[i].split];
      CHECK(a[i].split == b[i].split);
      CHECK(a[i].record_id == records[i].record_id);
    }
    CHECK(counts["train"] == 8);
    CHECK(counts["val"] == 1);
    CHECK(counts["test"] == 1);
  }
  SUBCASE("records of one entity share a split") {
    std::vector<QaRecord> records;
    for (int i = 0; i < 12; ++i) records.push_back(record(std::to_string(i), "e" + std::to_string(i)));
    for (int i = 0; i < 3; ++i) records.push_back(record("g" + std::to_string(i), "group"));
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto out = split_dataset(records, {8, 1, 1}, seed);
      std::set<std::string> group_splits;
      for (const auto& r : out) {
        if (r.entity_id == "group") group_splits.insert(r.split);
      }
      CHECK(group_splits.size() == 1);
    }
  }
  SUBCASE("bad ratios") {
    CHECK_THROWS_AS(split_dataset({}, {0, 0, 0}, 1), ConfigError);
    CHECK_THROWS_AS(split_dataset({}, {8, -1, 1}, 1), ConfigError);
  }
}

TEST_CASE("MCQ benchmark loading") {
  testing::TempDir dir;
  SUBCASE("pubmedqa-like maybe maps to index 2") {
    const auto path = dir.file("p.jsonl");
    testing::write_text(path, R"({"question":"Does it work?","context":["a","b"],"answer":"maybe"})" "\n");
    const auto recs = load_mcq_benchmark(path, McqFormat::kPubMedQaLike);
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].gold == 2);
    CHECK(recs[0].options == std::vector<std::string>{"yes", "no", "maybe"});
    CHECK(recs[0].context.has_value());
  }
  SUBCASE("missing options is a schema error with its line") {
    const auto path = dir.file("m.jsonl");
    testing::write_text(path, "{\"question\":\"q\",\"options\":[\"a\",\"b\"],\"gold\":0}\n{\"question\":\"q\",\"gold\":0}\n");
    try {
      load_mcq_benchmark(path, McqFormat::kMedMcqaLike);
      FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
      CHECK(e.line() == 2);
    }
  }
  SUBCASE("medmcqa-like round trip") {
    const std::vector<McqRecord> recs = {{"Which drug?", {"a", "b", "c", "d"}, 3, std::nullopt},
                                         {"Which organ?", {"liver", "heart", "lung", "skin"}, 0, "ctx"}};
    const auto path = dir.file("r.jsonl");
    save_mcq(path, recs);
    CHECK(load_mcq_benchmark(path, McqFormat::kMedMcqaLike) == recs);
  }
  SUBCASE("usmle-like options are ordered by key") {
    const auto path = dir.file("u.jsonl");
    testing::write_text(path, R"({"question":"q","options":{"B":"second","A":"first"},"answer_idx":"B"})" "\n");
    const auto recs = load_mcq_benchmark(path, McqFormat::kUsmleLike);
    CHECK(recs[0].options == std::vector<std::string>{"first", "second"});
    CHECK(recs[0].gold == 1);
  }
  SUBCASE("format names") {
    CHECK(parse_mcq_format("usmle-like") == McqFormat::kUsmleLike);
    CHECK_THROWS_AS(parse_mcq_format("csv"), UsageError);
  }
}

TEST_CASE("JSONL helpers") {
  testing::TempDir dir;
  const auto path = dir.file("x.jsonl");
  testing::write_text(path, "{\"a\":1}\r\n\n[1,2]\n");
  std::size_t rows = 0;
  CHECK_THROWS_AS(read_jsonl(path, [&](const nlohmann::json&, std::size_t) { ++rows; }), SchemaError);
  CHECK(rows == 1);
  CHECK_THROWS_AS(read_jsonl(dir.file("missing.jsonl"), [](const nlohmann::json&, std::size_t) {}), IoError);
}
