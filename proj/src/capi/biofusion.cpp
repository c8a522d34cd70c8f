// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#include "biofusion/biofusion.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <new>
#include <optional>
#include <string>

#include "biofusion/chem/molecular_graph.hpp"
#include "biofusion/core/errors.hpp"
#include "biofusion/data/mcq.hpp"
#include "biofusion/data/qa.hpp"
#include "biofusion/eval/evaluate.hpp"
#include "biofusion/eval/model_adapters.hpp"
#include "biofusion/harness/checkpoint.hpp"
#include "biofusion/harness/pipeline.hpp"
#include "biofusion/protein/sequence.hpp"

struct bf_model {
  biofusion::harness::CheckpointBundle bundle;
};

struct bf_tokenizer {
  biofusion::text::Tokenizer tokenizer;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename Fn>
bf_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return BF_OK;
  } catch (const biofusion::Error& e) {
    g_last_error = e.what();
    return static_cast<bf_status>(static_cast<int>(e.code()));
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return BF_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return BF_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return BF_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) throw biofusion::UsageError(std::string(what) + " must not be null");
}

void put_json(char** out, const std::string& json) {
  if (out) *out = dup_string(json);
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw biofusion::IoError("cannot write " + path);
  out << text;
  if (!out) throw biofusion::IoError("write failed for " + path);
}

std::string in_dir(const char* dir, const char* name) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw biofusion::IoError(std::string("cannot create ") + dir + ": " + ec.message());
  return (std::filesystem::path(dir) / name).string();
}

}  // namespace

extern "C" {

const char* bf_version(void) { return "0.1.0"; }

const char* bf_last_error(void) { return g_last_error.c_str(); }

const char* bf_status_name(bf_status status) {
  switch (status) {
    case BF_OK: return "ok";
    case BF_ERR_USAGE: return "usage";
    case BF_ERR_PARSE: return "parse";
    case BF_ERR_ALPHABET: return "alphabet";
    case BF_ERR_SHAPE: return "shape";
    case BF_ERR_CONFIG: return "config";
    case BF_ERR_IO: return "io";
    case BF_ERR_CORRUPT_CHECKPOINT: return "corrupt_checkpoint";
    case BF_ERR_SCHEMA: return "schema";
    case BF_ERR_CONTEXT_OVERFLOW: return "context_overflow";
    case BF_ERR_MISSING_PREREQUISITE: return "missing_prerequisite";
    case BF_ERR_FREEZE_VIOLATION: return "freeze_violation";
    case BF_ERR_EMPTY_INPUT: return "empty_input";
    case BF_ERR_EMPTY_MASK: return "empty_mask";
    case BF_ERR_NUMERIC: return "numeric";
    case BF_ERR_FORMAT: return "format";
    case BF_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

void bf_string_free(char* s) { std::free(s); }

bf_status bf_build_corpus(const char* corpus_path, const char* allowlist_path, const char* tokenizer_path,
                          int max_tokens, const char* out_dir, char** stats_json) {
  return guarded([&] {
    need(corpus_path, "corpus_path");
    need(allowlist_path, "allowlist_path");
    need(out_dir, "out_dir");
    std::optional<std::string> tok;
    if (tokenizer_path && *tokenizer_path) tok = tokenizer_path;
    const auto manifest = biofusion::harness::build_corpus_files(corpus_path, allowlist_path, tok, max_tokens, out_dir);
    put_json(stats_json, manifest.to_json().dump(2));
  });
}

bf_status bf_build_pubchemqa(const char* raw_path, uint64_t seed, const char* out_dir, char** stats_json) {
  return guarded([&] {
    need(raw_path, "raw_path");
    need(out_dir, "out_dir");
    put_json(stats_json, biofusion::harness::build_pubchemqa_files(raw_path, seed, out_dir).to_json().dump(2));
  });
}

bf_status bf_build_uniprotqa(const char* raw_path, uint64_t seed, const char* out_dir, char** stats_json) {
  return guarded([&] {
    need(raw_path, "raw_path");
    need(out_dir, "out_dir");
    put_json(stats_json, biofusion::harness::build_uniprotqa_files(raw_path, seed, out_dir).to_json().dump(2));
  });
}

bf_status bf_train_tokenizer(const char* const* input_paths, size_t n_inputs, int vocab_size, const char* out_path) {
  return guarded([&] {
    need(out_path, "out_path");
    if (n_inputs > 0) need(input_paths, "input_paths");
    std::vector<std::string> inputs;
    for (size_t i = 0; i < n_inputs; ++i) {
      need(input_paths[i], "input path");
      inputs.emplace_back(input_paths[i]);
    }
    biofusion::harness::train_tokenizer_files(inputs, vocab_size, out_path);
  });
}

bf_status bf_tokenizer_load(const char* path, bf_tokenizer** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new bf_tokenizer{biofusion::harness::load_tokenizer(path)};
  });
}

void bf_tokenizer_free(bf_tokenizer* tokenizer) { delete tokenizer; }

int bf_tokenizer_vocab_size(const bf_tokenizer* tokenizer) {
  return tokenizer ? tokenizer->tokenizer.vocab_size() : 0;
}

bf_status bf_tokenizer_encode(const bf_tokenizer* tokenizer, const char* text, int64_t* ids, size_t capacity,
                              size_t* n_ids) {
  return guarded([&] {
    need(tokenizer, "tokenizer");
    need(text, "text");
    need(n_ids, "n_ids");
    const auto encoded = tokenizer->tokenizer.encode(text);
    *n_ids = encoded.size();
    if (capacity > 0) need(ids, "ids");
    for (size_t i = 0; i < encoded.size() && i < capacity; ++i) ids[i] = encoded[i];
  });
}

bf_status bf_tokenizer_decode(const bf_tokenizer* tokenizer, const int64_t* ids, size_t n_ids, char** text) {
  return guarded([&] {
    need(tokenizer, "tokenizer");
    need(text, "text");
    if (n_ids > 0) need(ids, "ids");
    std::vector<biofusion::text::TokenId> v(ids, ids + n_ids);
    for (auto id : v) {
      if (id < 0 || id >= tokenizer->tokenizer.vocab_size()) {
        throw biofusion::UsageError("token id " + std::to_string(id) + " outside the vocabulary");
      }
    }
    *text = dup_string(tokenizer->tokenizer.decode(v));
  });
}

bf_status bf_run_stage(const char* stage, const char* config_path, const char* from_checkpoint, int64_t seed,
                       const char* out_dir, char** summary_json) {
  return guarded([&] {
    need(stage, "stage");
    need(config_path, "config_path");
    need(out_dir, "out_dir");
    auto config = biofusion::harness::load_run_config(config_path);
    if (seed >= 0) config.seed = static_cast<std::uint64_t>(seed);
    biofusion::harness::StageOptions options;
    options.out_dir = out_dir;
    if (from_checkpoint && *from_checkpoint) options.from_checkpoint = from_checkpoint;
    const auto outcome = biofusion::harness::run_stage(biofusion::harness::parse_stage(stage), config, options);
    nlohmann::ordered_json j;
    j["stage"] = stage;
    j["steps"] = outcome.loss_trace.size();
    j["final_loss"] = outcome.loss_trace.empty() ? nlohmann::ordered_json(nullptr)
                                                 : nlohmann::ordered_json(outcome.loss_trace.back());
    j["checkpoint"] = outcome.checkpoint_path;
    j["loss_csv"] = outcome.loss_csv_path;
    put_json(summary_json, j.dump(2));
  });
}

bf_status bf_model_load(const char* checkpoint_path, bf_model** out) {
  return guarded([&] {
    need(checkpoint_path, "checkpoint_path");
    need(out, "out");
    *out = new bf_model{biofusion::harness::load_checkpoint(checkpoint_path)};
  });
}

void bf_model_free(bf_model* model) { delete model; }

bf_status bf_model_ask(const bf_model* model, const char* entity_kind, const char* entity, const char* question,
                       int max_new_tokens, char** answer) {
  return guarded([&] {
    need(model, "model");
    need(entity_kind, "entity_kind");
    need(question, "question");
    need(answer, "answer");
    biofusion::data::QaRecord record;
    const std::string kind = entity_kind;
    if (kind == "molecule") {
      need(entity, "entity");
      record.entity_kind = biofusion::data::EntityKind::kSmiles;
    } else if (kind == "protein") {
      need(entity, "entity");
      record.entity_kind = biofusion::data::EntityKind::kProtein;
    } else if (kind == "text") {
      record.entity_kind = entity && *entity ? biofusion::data::EntityKind::kContext : biofusion::data::EntityKind::kNone;
    } else {
      throw biofusion::UsageError("entity_kind must be molecule, protein or text");
    }
    if (entity) record.entity = entity;
    record.question = question;
    auto decoding = model->bundle.config.decoding;
    if (max_new_tokens > 0) decoding.max_new_tokens = max_new_tokens;
    biofusion::eval::ModelAnswerer answerer(model->bundle.model, decoding);
    *answer = dup_string(answerer.answer(record));
  });
}

bf_status bf_eval_gen(const bf_model* model, const char* qa_path, const char* qa_format, const char* split,
                      const char* out_dir, char** report_json) {
  return guarded([&] {
    need(model, "model");
    need(qa_path, "qa_path");
    need(qa_format, "qa_format");
    need(out_dir, "out_dir");
    const std::string format = qa_format;
    std::vector<biofusion::data::QaRecord> records;
    if (format == "pubchemqa") {
      records = biofusion::data::load_pubchemqa(qa_path);
    } else if (format == "uniprotqa") {
      records = biofusion::data::load_uniprotqa(qa_path);
    } else {
      throw biofusion::UsageError("qa_format must be pubchemqa or uniprotqa");
    }
    if (split && *split) {
      std::erase_if(records, [&](const auto& r) { return r.split != split; });
    }
    biofusion::eval::ModelAnswerer answerer(model->bundle.model, model->bundle.config.decoding);
    const auto report = biofusion::eval::gen_eval(answerer, records, in_dir(out_dir, "predictions.jsonl"));
    const std::string json = report.to_json().dump(2);
    write_file(in_dir(out_dir, "gen_report.json"), json + "\n");
    put_json(report_json, json);
  });
}

bf_status bf_eval_mcq(const bf_model* model, const char* mcq_path, const char* mcq_format, const char* out_dir,
                      char** report_json) {
  return guarded([&] {
    need(model, "model");
    need(mcq_path, "mcq_path");
    need(mcq_format, "mcq_format");
    need(out_dir, "out_dir");
    const auto records = biofusion::data::load_mcq_benchmark(mcq_path, biofusion::data::parse_mcq_format(mcq_format));
    biofusion::eval::ModelOptionScorer scorer(model->bundle.model);
    const auto report = biofusion::eval::mcq_accuracy(scorer, records);
    const std::string json = report.to_json().dump(2);
    write_file(in_dir(out_dir, "mcq_report.json"), json + "\n");
    put_json(report_json, json);
  });
}

bf_status bf_parse_smiles(const char* smiles, size_t* n_atoms, size_t* n_bonds) {
  return guarded([&] {
    need(smiles, "smiles");
    const auto graph = biofusion::chem::parse_smiles(smiles);
    if (n_atoms) *n_atoms = graph.atoms.size();
    if (n_bonds) *n_bonds = graph.bonds.size();
  });
}

}  // extern "C"
