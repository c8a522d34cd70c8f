// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#include "biofusion/harness/config.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <set>

#include "biofusion/core/errors.hpp"

namespace biofusion::harness {
namespace {

using Json = nlohmann::json;
using OJson = nlohmann::ordered_json;

void only_keys(const Json& j, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
      throw ConfigError("unknown key '" + it.key() + "' in " + std::string(where));
    }
  }
}

void read(const Json& j, const char* key, int& out) {
  if (!j.contains(key)) return;
  const auto& v = j[key];
  if (!v.is_number_integer()) throw ConfigError(std::string("'") + key + "' must be an integer");
  out = v.get<int>();
}

void read(const Json& j, const char* key, std::uint64_t& out) {
  if (!j.contains(key)) return;
  const auto& v = j[key];
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    throw ConfigError(std::string("'") + key + "' must be a non-negative integer");
  }
  out = v.get<std::uint64_t>();
}

void read(const Json& j, const char* key, double& out) {
  if (!j.contains(key)) return;
  const auto& v = j[key];
  if (!v.is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
  out = v.get<double>();
}

void read(const Json& j, const char* key, std::string& out) {
  if (!j.contains(key)) return;
  const auto& v = j[key];
  if (!v.is_string()) throw ConfigError(std::string("'") + key + "' must be a string");
  out = v.get<std::string>();
}

std::vector<DatasetRef> read_datasets(const Json& j, const char* key) {
  std::vector<DatasetRef> refs;
  if (!j.contains(key)) return refs;
  if (!j[key].is_array()) throw ConfigError(std::string("'") + key + "' must be an array");
  for (const auto& item : j[key]) {
    only_keys(item, key, {"path", "format"});
    DatasetRef ref;
    read(item, "path", ref.path);
    read(item, "format", ref.format);
    refs.push_back(ref);
  }
  return refs;
}

OJson datasets_json(const std::vector<DatasetRef>& refs) {
  OJson arr = OJson::array();
  for (const auto& r : refs) arr.push_back(OJson{{"path", r.path}, {"format", r.format}});
  return arr;
}

bool is_modality_group(std::string_view g) {
  return std::find(std::begin(fusion::kModalityGroups), std::end(fusion::kModalityGroups), g) !=
         std::end(fusion::kModalityGroups);
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

std::string resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return p;
  std::filesystem::path path(p);
  if (path.is_absolute()) return p;
  return (base / path).lexically_normal().string();
}

}  // namespace

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.optimizer = optimizer;
  t.batch_size = batch_size;
  t.epochs = epochs;
  t.max_steps = max_steps;
  t.seed = seed;
  return t;
}

RunConfig default_run_config() {
  RunConfig c;
  std::vector<std::string> modality(std::begin(fusion::kModalityGroups), std::end(fusion::kModalityGroups));
  c.freeze["lm"] = modality;
  c.freeze["align"] = {std::string(fusion::kLmGroup)};
  c.freeze["qa"] = modality;
  return c;
}

RunConfig run_config_from_json(const Json& j) {
  RunConfig c = default_run_config();
  only_keys(j, "config", {"model", "optimizer", "training", "freeze", "data", "decoding"});
  if (j.contains("model")) {
    const auto& m = j["model"];
    only_keys(m, "model", {"lm", "molecule", "protein"});
    if (m.contains("lm")) {
      const auto& lm = m["lm"];
      only_keys(lm, "model.lm", {"vocab_size", "width", "blocks", "heads", "ff_width", "context_length"});
      read(lm, "vocab_size", c.model.lm.vocab_size);
      read(lm, "width", c.model.lm.width);
      read(lm, "blocks", c.model.lm.blocks);
      read(lm, "heads", c.model.lm.heads);
      read(lm, "ff_width", c.model.lm.ff_width);
      read(lm, "context_length", c.model.lm.context_length);
    }
    if (m.contains("molecule")) {
      only_keys(m["molecule"], "model.molecule", {"layers", "hidden"});
      read(m["molecule"], "layers", c.model.molecule.layers);
      read(m["molecule"], "hidden", c.model.molecule.hidden);
    }
    if (m.contains("protein")) {
      const auto& p = m["protein"];
      only_keys(p, "model.protein", {"layers", "width", "heads", "ff_width", "max_residues"});
      read(p, "layers", c.model.protein.layers);
      read(p, "width", c.model.protein.width);
      read(p, "heads", c.model.protein.heads);
      read(p, "ff_width", c.model.protein.ff_width);
      read(p, "max_residues", c.model.protein.max_residues);
    }
  }
  if (j.contains("optimizer")) {
    const auto& o = j["optimizer"];
    only_keys(o, "optimizer", {"learning_rate", "beta1", "beta2", "epsilon", "weight_decay", "grad_clip",
                               "warmup_fraction", "min_lr_ratio"});
    read(o, "learning_rate", c.optimizer.learning_rate);
    read(o, "beta1", c.optimizer.beta1);
    read(o, "beta2", c.optimizer.beta2);
    read(o, "epsilon", c.optimizer.epsilon);
    read(o, "weight_decay", c.optimizer.weight_decay);
    read(o, "grad_clip", c.optimizer.grad_clip);
    read(o, "warmup_fraction", c.optimizer.warmup_fraction);
    read(o, "min_lr_ratio", c.optimizer.min_lr_ratio);
  }
  if (j.contains("training")) {
    const auto& t = j["training"];
    only_keys(t, "training", {"batch_size", "epochs", "max_steps", "seed"});
    read(t, "batch_size", c.batch_size);
    read(t, "epochs", c.epochs);
    read(t, "max_steps", c.max_steps);
    read(t, "seed", c.seed);
  }
  if (j.contains("freeze")) {
    const auto& f = j["freeze"];
    only_keys(f, "freeze", {"lm", "align", "qa"});
    for (auto it = f.begin(); it != f.end(); ++it) {
      if (!it->is_array()) throw ConfigError("freeze." + it.key() + " must be an array of group names");
      std::vector<std::string> groups;
      for (const auto& g : *it) {
        if (!g.is_string()) throw ConfigError("freeze." + it.key() + " must hold strings");
        groups.push_back(g.get<std::string>());
      }
      c.freeze[it.key()] = groups;
    }
  }
  if (j.contains("data")) {
    const auto& d = j["data"];
    only_keys(d, "data", {"tokenizer", "corpus", "chunk_max_tokens", "align_train", "qa_train"});
    read(d, "tokenizer", c.data.tokenizer);
    read(d, "corpus", c.data.corpus);
    read(d, "chunk_max_tokens", c.data.chunk_max_tokens);
    c.data.align_train = read_datasets(d, "align_train");
    c.data.qa_train = read_datasets(d, "qa_train");
  }
  if (j.contains("decoding")) {
    const auto& d = j["decoding"];
    only_keys(d, "decoding", {"max_new_tokens", "temperature", "seed"});
    read(d, "max_new_tokens", c.decoding.max_new_tokens);
    read(d, "temperature", c.decoding.temperature);
    read(d, "seed", c.decoding.seed);
  }
  return c;
}

OJson run_config_to_json(const RunConfig& c) {
  OJson j;
  const auto& lm = c.model.lm;
  j["model"]["lm"] = {{"vocab_size", lm.vocab_size}, {"width", lm.width},       {"blocks", lm.blocks},
                      {"heads", lm.heads},           {"ff_width", lm.ff_width}, {"context_length", lm.context_length}};
  j["model"]["molecule"] = {{"layers", c.model.molecule.layers}, {"hidden", c.model.molecule.hidden}};
  const auto& p = c.model.protein;
  j["model"]["protein"] = {{"layers", p.layers},
                           {"width", p.width},
                           {"heads", p.heads},
                           {"ff_width", p.ff_width},
                           {"max_residues", p.max_residues}};
  const auto& o = c.optimizer;
  j["optimizer"] = {{"learning_rate", o.learning_rate}, {"beta1", o.beta1},
                    {"beta2", o.beta2},                 {"epsilon", o.epsilon},
                    {"weight_decay", o.weight_decay},   {"grad_clip", o.grad_clip},
                    {"warmup_fraction", o.warmup_fraction}, {"min_lr_ratio", o.min_lr_ratio}};
  j["training"] = {{"batch_size", c.batch_size}, {"epochs", c.epochs}, {"max_steps", c.max_steps}, {"seed", c.seed}};
  j["freeze"] = OJson::object();
  for (const auto& [stage, groups] : c.freeze) j["freeze"][stage] = groups;
  j["data"] = {{"tokenizer", c.data.tokenizer},
               {"corpus", c.data.corpus},
               {"chunk_max_tokens", c.data.chunk_max_tokens},
               {"align_train", datasets_json(c.data.align_train)},
               {"qa_train", datasets_json(c.data.qa_train)}};
  j["decoding"] = {{"max_new_tokens", c.decoding.max_new_tokens},
                   {"temperature", c.decoding.temperature},
                   {"seed", c.decoding.seed}};
  return j;
}

void validate(const RunConfig& c) {
  const auto& lm = c.model.lm;
  require(lm.vocab_size > 0 && lm.width > 0 && lm.blocks > 0 && lm.heads > 0 && lm.ff_width > 0,
          "model.lm dimensions must be positive");
  require(lm.context_length >= 2, "model.lm.context_length must be at least 2");
  require(lm.width % lm.heads == 0, "model.lm.width must be divisible by heads");
  require(c.model.molecule.layers > 0 && c.model.molecule.hidden > 0, "model.molecule dimensions must be positive");
  const auto& p = c.model.protein;
  require(p.layers > 0 && p.width > 0 && p.heads > 0 && p.ff_width > 0 && p.max_residues > 0,
          "model.protein dimensions must be positive");
  require(p.width % p.heads == 0, "model.protein.width must be divisible by heads");

  const auto& o = c.optimizer;
  require(std::isfinite(o.learning_rate) && o.learning_rate >= 0.0, "optimizer.learning_rate must be >= 0");
  require(o.beta1 >= 0.0 && o.beta1 < 1.0 && o.beta2 >= 0.0 && o.beta2 < 1.0, "optimizer betas must be in [0, 1)");
  require(o.epsilon > 0.0, "optimizer.epsilon must be positive");
  require(o.weight_decay >= 0.0 && o.grad_clip >= 0.0, "optimizer.weight_decay and grad_clip must be >= 0");
  require(o.warmup_fraction >= 0.0 && o.warmup_fraction <= 1.0, "optimizer.warmup_fraction must be in [0, 1]");
  require(o.min_lr_ratio >= 0.0 && o.min_lr_ratio <= 1.0, "optimizer.min_lr_ratio must be in [0, 1]");
  require(c.batch_size > 0 && c.epochs > 0 && c.max_steps >= 0, "training batch_size/epochs must be positive");

  for (const auto& [stage, groups] : c.freeze) {
    require(stage == "lm" || stage == "align" || stage == "qa", "unknown stage '" + stage + "' in freeze");
    for (const auto& g : groups) {
      require(g == fusion::kLmGroup || is_modality_group(g), "unknown parameter group '" + g + "' in freeze." + stage);
    }
  }
  auto frozen = [&](const std::string& stage, std::string_view group) {
    auto it = c.freeze.find(stage);
    if (it == c.freeze.end()) return false;
    return std::find(it->second.begin(), it->second.end(), group) != it->second.end();
  };
  require(frozen("align", fusion::kLmGroup), "stage align must freeze the lm group");
  bool any_trainable = false;
  for (auto g : fusion::kModalityGroups) any_trainable = any_trainable || !frozen("align", g);
  require(any_trainable, "stage align must leave at least one encoder or adaptor trainable");
  for (const char* stage : {"lm", "qa"}) {
    require(!frozen(stage, fusion::kLmGroup), std::string("stage ") + stage + " must not freeze the lm group");
    for (auto g : fusion::kModalityGroups) {
      require(frozen(stage, g), std::string("stage ") + stage + " must freeze " + std::string(g));
    }
  }

  require(c.data.chunk_max_tokens == 0 || c.data.chunk_max_tokens >= 16, "data.chunk_max_tokens must be 0 or >= 16");
  for (const auto& r : c.data.align_train) {
    require(r.format == "pubchemqa" || r.format == "uniprotqa",
            "align_train format must be pubchemqa or uniprotqa, got '" + r.format + "'");
  }
  for (const auto& r : c.data.qa_train) {
    require(r.format == "pubchemqa" || r.format == "uniprotqa" || r.format == "medmcqa-like" ||
                r.format == "pubmedqa-like" || r.format == "usmle-like",
            "unknown qa_train format '" + r.format + "'");
  }
  require(c.decoding.max_new_tokens > 0, "decoding.max_new_tokens must be positive");
  require(c.decoding.temperature >= 0.0, "decoding.temperature must be >= 0");
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  RunConfig c = run_config_from_json(j);
  const auto base = std::filesystem::path(path).parent_path();
  c.data.tokenizer = resolve(base, c.data.tokenizer);
  c.data.corpus = resolve(base, c.data.corpus);
  for (auto& r : c.data.align_train) r.path = resolve(base, r.path);
  for (auto& r : c.data.qa_train) r.path = resolve(base, r.path);
  validate(c);
  return c;
}

std::string config_hash(const RunConfig& config) {
  const std::string dump = run_config_to_json(config).dump();
  const auto crc = crc32(0L, reinterpret_cast<const Bytef*>(dump.data()), static_cast<uInt>(dump.size()));
  char buf[9];
  std::snprintf(buf, sizeof(buf), "%08lx", static_cast<unsigned long>(crc));
  return buf;
}

fusion::Stage parse_stage(std::string_view name) {
  if (name == "lm") return fusion::Stage::kLanguageModel;
  if (name == "align") return fusion::Stage::kAlign;
  if (name == "qa") return fusion::Stage::kQa;
  throw UsageError("unknown stage '" + std::string(name) + "'");
}

std::string_view stage_name(fusion::Stage stage) {
  switch (stage) {
    case fusion::Stage::kLanguageModel: return "lm";
    case fusion::Stage::kAlign: return "align";
    case fusion::Stage::kQa: return "qa";
  }
  return "lm";
}

}  // namespace biofusion::harness
