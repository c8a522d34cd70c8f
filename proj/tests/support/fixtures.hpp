// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

// On-disk fixture tree for pipeline, C API and CLI tests:
//   raw_molecules.jsonl raw_proteins.jsonl corpus.jsonl allowlist.txt
//   mcq.jsonl pubmedqa.jsonl config.json
// config.json points at outputs the build commands write under work/.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "support/synthetic.hpp"
#include "support/temp_dir.hpp"

namespace biofusion::testing {

inline void write_jsonl_rows(const std::string& path, const std::vector<nlohmann::ordered_json>& rows) {
  std::string text;
  for (const auto& r : rows) text += r.dump() + "\n";
  write_text(path, text);
}

inline nlohmann::ordered_json fixture_config_json() {
  return {
      {"model",
       {{"lm", {{"vocab_size", 400}, {"width", 16}, {"blocks", 1}, {"heads", 2}, {"ff_width", 32}, {"context_length", 256}}},
        {"molecule", {{"layers", 2}, {"hidden", 8}}},
        {"protein", {{"layers", 1}, {"width", 8}, {"heads", 2}, {"ff_width", 16}, {"max_residues", 32}}}}},
      {"optimizer", {{"learning_rate", 3e-3}}},
      {"training", {{"batch_size", 4}, {"epochs", 1}, {"max_steps", 6}, {"seed", 7}}},
      {"data",
       {{"tokenizer", "work/tokenizer.json"},
        {"corpus", "work/corpus/corpus.jsonl"},
        {"chunk_max_tokens", 64},
        {"align_train",
         {{{"path", "work/pubchemqa/pubchemqa.jsonl"}, {"format", "pubchemqa"}},
          {{"path", "work/uniprotqa/uniprotqa.jsonl"}, {"format", "uniprotqa"}}}},
        {"qa_train",
         {{{"path", "mcq.jsonl"}, {"format", "medmcqa-like"}},
          {{"path", "pubmedqa.jsonl"}, {"format", "pubmedqa-like"}}}}}},
      {"decoding", {{"max_new_tokens", 8}}},
  };
}

/// Writes the raw fixture files into `dir` (created if missing).
inline void write_fixture_tree(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto file = [&](const char* name) { return (dir / name).string(); };

  std::vector<nlohmann::ordered_json> molecules;
  const auto synth = synthetic_molecules(40, 5);
  for (std::size_t i = 0; i < synth.size(); ++i) {
    molecules.push_back({{"cid", std::to_string(1000 + i % 30)}, {"smiles", synth[i].smiles}, {"description", synth[i].caption}});
  }
  molecules.push_back({{"cid", "9001"}, {"smiles", "C1CC"}, {"description", "an unclosed ring that never parses"}});
  molecules.push_back({{"cid", "9002"}, {"smiles", "CCO"}, {"description", "too short"}});
  write_jsonl_rows(file("raw_molecules.jsonl"), molecules);

  const char* seqs[] = {"MKVLAGWPRT", "MSTNPKPQRK", "MALWMRLLPLLALLALWGPDPAAA", "MKTAYIAKQRQISFVKSHFSRQ",
                        "MEEPQSDPSV", "MGSSHHHHHH", "MQIFVKTLTG", "MKWVTFISLL", "MK1INVALID", "MTEYKLVVVG"};
  std::vector<nlohmann::ordered_json> proteins;
  for (std::size_t i = 0; i < std::size(seqs); ++i) {
    nlohmann::ordered_json e{{"accession", "P" + std::to_string(10 + i)}, {"sequence", seqs[i]}};
    e["function"] = "catalyzes step " + std::to_string(i) + " of a pathway";
    if (i % 2 == 0) e["official_name"] = "Enzyme " + std::to_string(i);
    if (i % 3 != 0) e["family"] = "family " + std::to_string(i % 4);
    e["subcellular_location"] = i % 2 ? "cytoplasm" : "nucleus";
    proteins.push_back(e);
  }
  write_jsonl_rows(file("raw_proteins.jsonl"), proteins);

  std::vector<nlohmann::ordered_json> docs;
  for (int i = 0; i < 6; ++i) {
    const std::string body = "Smith J, Doe A. The kinase binds ATP in the nucleus. Binding changes its shape! "
                             "A second study confirmed the result [4]. Figure 2: 10 20 30.";
    nlohmann::ordered_json d{{"doc_id", "doc" + std::to_string(i)}, {"pmid", std::to_string(500 + i)}, {"title", "t"},
                             {"body", i == 4 ? std::string("   ") : body}};
    d["spans"] = nlohmann::ordered_json::array(
        {{{"kind", "author"}, {"start", 0}, {"end", 15}}, {{"kind", "reference"}, {"start", 116}, {"end", 119}},
         {{"kind", "chart"}, {"start", 121}, {"end", 140}}});
    if (i == 4) d["spans"] = nlohmann::ordered_json::array();
    docs.push_back(d);
  }
  docs.push_back({{"doc_id", "doc1"}, {"pmid", "999"}, {"title", "dup"}, {"body", "Duplicate id."}});
  write_jsonl_rows(file("corpus.jsonl"), docs);
  write_text(file("allowlist.txt"), "500\n501\n502\n503\n504\n999\n");

  write_jsonl_rows(file("mcq.jsonl"),
                   {{{"question", "Which organ filters blood?"}, {"options", nlohmann::ordered_json::array({"kidney", "skin", "bone"})}, {"gold", 0}},
                    {{"question", "Which molecule stores energy?"}, {"options", nlohmann::ordered_json::array({"water", "ATP"})}, {"gold", 1}},
                    {{"question", "Which cell carries oxygen?"}, {"options", nlohmann::ordered_json::array({"neuron", "red cell", "platelet"})}, {"gold", 1}}});
  write_jsonl_rows(file("pubmedqa.jsonl"),
                   {{{"question", "Does ATP bind the kinase?"}, {"context", nlohmann::ordered_json::array({"The kinase binds ATP."})}, {"answer", "yes"}},
                    {{"question", "Is the effect permanent?"}, {"context", "Results were mixed."}, {"answer", "maybe"}}});

  write_text(file("config.json"), fixture_config_json().dump(2) + "\n");
}

}  // namespace biofusion::testing
