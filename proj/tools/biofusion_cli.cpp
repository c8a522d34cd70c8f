// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

// Command-line front end over the C API.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "biofusion/biofusion.h"

namespace {

constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

struct Owned {
  char* s = nullptr;
  ~Owned() { bf_string_free(s); }
};

struct ModelHandle {
  bf_model* m = nullptr;
  ~ModelHandle() { bf_model_free(m); }
};

int report(bf_status status, const char* command) {
  if (status == BF_OK) return 0;
  std::cerr << "biofusion " << command << ": " << bf_status_name(status) << " error: " << bf_last_error() << "\n";
  return status == BF_ERR_USAGE ? kExitUsage : kExitData;
}

int print_json(bf_status status, const char* command, const Owned& json) {
  if (status == BF_OK && json.s) std::cout << json.s << "\n";
  return report(status, command);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"biofusion: molecule/protein to language-model alignment toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(bf_version()));

  std::string config, out, corpus, allowlist, tokenizer, raw, checkpoint, data, format, split = "test";
  std::string smiles, protein, text, question, from;
  std::vector<std::string> inputs;
  std::optional<std::int64_t> seed;
  int max_tokens = 256;
  int vocab_size = 2048;
  int max_new_tokens = 0;

  auto* build_corpus = app.add_subcommand("build-corpus", "filter, strip and chunk a corpus JSONL");
  build_corpus->add_option("--corpus", corpus, "corpus JSONL")->required();
  build_corpus->add_option("--allowlist", allowlist, "file with one PMID/PMCID per line")->required();
  build_corpus->add_option("--tokenizer", tokenizer, "tokenizer JSON; enables chunking");
  build_corpus->add_option("--max-tokens", max_tokens, "tokens per chunk")->check(CLI::Range(16, 1 << 20));
  build_corpus->add_option("--out", out, "output directory")->required();
  build_corpus->add_option("--config", config, "unused; accepted for uniformity");
  build_corpus->add_option("--seed", seed, "unused; accepted for uniformity");

  auto* build_pubchem = app.add_subcommand("build-pubchemqa", "build and split molecule-description QA");
  auto* build_uniprot = app.add_subcommand("build-uniprotqa", "build and split protein QA");
  for (auto* cmd : {build_pubchem, build_uniprot}) {
    cmd->add_option("--raw", raw, "raw JSONL")->required();
    cmd->add_option("--out", out, "output directory")->required();
    cmd->add_option("--seed", seed, "split seed (default 0)");
    cmd->add_option("--config", config, "unused; accepted for uniformity");
  }

  auto* train_tok = app.add_subcommand("train-tokenizer", "train the byte-level BPE tokenizer");
  train_tok->add_option("--input", inputs, "JSONL inputs (repeatable)")->required();
  train_tok->add_option("--vocab-size", vocab_size, "target vocabulary size");
  train_tok->add_option("--out", out, "output directory (writes tokenizer.json)")->required();
  train_tok->add_option("--config", config, "unused; accepted for uniformity");
  train_tok->add_option("--seed", seed, "unused; training is deterministic");

  auto* train_lm = app.add_subcommand("train-lm", "stage lm: autoregressive training on corpus chunks");
  auto* align = app.add_subcommand("align", "stage align: train encoders and adaptors against the frozen LM");
  auto* finetune = app.add_subcommand("finetune-qa", "stage qa: fine-tune the LM on text QA");
  for (auto* cmd : {train_lm, align, finetune}) {
    cmd->add_option("--config", config, "run config JSON")->required();
    cmd->add_option("--out", out, "output directory")->required();
    cmd->add_option("--seed", seed, "overrides training.seed");
    cmd->add_option("--from", from, "checkpoint of the previous stage");
  }

  auto* eval_gen = app.add_subcommand("eval-gen", "BLEU/ROUGE/METEOR on generated answers");
  eval_gen->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
  eval_gen->add_option("--data", data, "QA JSONL")->required();
  eval_gen->add_option("--format", format, "pubchemqa | uniprotqa")->required();
  eval_gen->add_option("--split", split, "split to evaluate; empty for all records");
  eval_gen->add_option("--out", out, "output directory")->required();
  eval_gen->add_option("--config", config, "unused; decoding comes from the checkpoint");
  eval_gen->add_option("--seed", seed, "unused");

  auto* eval_mcq = app.add_subcommand("eval-mcq", "multiple-choice accuracy by option likelihood");
  eval_mcq->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
  eval_mcq->add_option("--data", data, "benchmark JSONL")->required();
  eval_mcq->add_option("--format", format, "medmcqa-like | pubmedqa-like | usmle-like")->required();
  eval_mcq->add_option("--out", out, "output directory")->required();
  eval_mcq->add_option("--config", config, "unused");
  eval_mcq->add_option("--seed", seed, "unused");

  auto* ask = app.add_subcommand("ask", "answer one question");
  ask->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
  auto* smiles_opt = ask->add_option("--smiles", smiles, "molecule as SMILES");
  auto* protein_opt = ask->add_option("--protein", protein, "protein sequence");
  auto* text_opt = ask->add_option("--text", text, "context text");
  smiles_opt->excludes(protein_opt)->excludes(text_opt);
  protein_opt->excludes(text_opt);
  ask->add_option("--question", question, "question")->required();
  ask->add_option("--max-new-tokens", max_new_tokens, "decoding limit (default from the checkpoint)");
  ask->add_option("--config", config, "unused");
  ask->add_option("--seed", seed, "unused");
  ask->add_option("--out", out, "unused");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (build_corpus->parsed()) {
    Owned stats;
    const auto st = bf_build_corpus(corpus.c_str(), allowlist.c_str(), tokenizer.empty() ? nullptr : tokenizer.c_str(),
                                    max_tokens, out.c_str(), &stats.s);
    return print_json(st, "build-corpus", stats);
  }
  if (build_pubchem->parsed() || build_uniprot->parsed()) {
    Owned stats;
    const auto s = static_cast<std::uint64_t>(seed.value_or(0));
    const auto st = build_pubchem->parsed() ? bf_build_pubchemqa(raw.c_str(), s, out.c_str(), &stats.s)
                                            : bf_build_uniprotqa(raw.c_str(), s, out.c_str(), &stats.s);
    return print_json(st, build_pubchem->parsed() ? "build-pubchemqa" : "build-uniprotqa", stats);
  }
  if (train_tok->parsed()) {
    std::vector<const char*> paths;
    for (const auto& p : inputs) paths.push_back(p.c_str());
    const std::string target = (std::filesystem::path(out) / "tokenizer.json").string();
    const auto st = bf_train_tokenizer(paths.data(), paths.size(), vocab_size, target.c_str());
    if (st == BF_OK) std::cout << target << "\n";
    return report(st, "train-tokenizer");
  }
  for (auto [cmd, stage] : {std::pair{train_lm, "lm"}, std::pair{align, "align"}, std::pair{finetune, "qa"}}) {
    if (!cmd->parsed()) continue;
    Owned summary;
    const auto st = bf_run_stage(stage, config.c_str(), from.empty() ? nullptr : from.c_str(), seed.value_or(-1),
                                 out.c_str(), &summary.s);
    return print_json(st, cmd->get_name().c_str(), summary);
  }

  ModelHandle model;
  if (const auto st = bf_model_load(checkpoint.c_str(), &model.m); st != BF_OK) return report(st, "load");
  if (eval_gen->parsed()) {
    Owned r;
    const auto st = bf_eval_gen(model.m, data.c_str(), format.c_str(), split.c_str(), out.c_str(), &r.s);
    return print_json(st, "eval-gen", r);
  }
  if (eval_mcq->parsed()) {
    Owned r;
    const auto st = bf_eval_mcq(model.m, data.c_str(), format.c_str(), out.c_str(), &r.s);
    return print_json(st, "eval-mcq", r);
  }
  const char* kind = !smiles.empty() ? "molecule" : (!protein.empty() ? "protein" : "text");
  const std::string& entity = !smiles.empty() ? smiles : (!protein.empty() ? protein : text);
  Owned answer;
  const auto st = bf_model_ask(model.m, kind, entity.empty() ? nullptr : entity.c_str(), question.c_str(),
                               max_new_tokens, &answer.s);
  if (st == BF_OK) std::cout << answer.s << "\n";
  return report(st, "ask");
}
