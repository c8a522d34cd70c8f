// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#include "biofusion/harness/pipeline.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>

#include "biofusion/chem/molecular_graph.hpp"
#include "biofusion/core/errors.hpp"
#include "biofusion/core/rng.hpp"
#include "biofusion/data/corpus.hpp"
#include "biofusion/data/mcq.hpp"
#include "biofusion/data/qa.hpp"
#include "biofusion/protein/sequence.hpp"

namespace biofusion::harness {
namespace {

namespace fs = std::filesystem;

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
}

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("write failed for " + path);
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::string text;
  for (const auto& l : lines) text += l + '\n';
  write_text(path, text);
}

bool trains_on(const data::QaRecord& r) { return r.split.empty() || r.split == "train"; }

std::vector<data::QaRecord> load_qa(const DatasetRef& ref) {
  if (ref.format == "pubchemqa") return data::load_pubchemqa(ref.path);
  if (ref.format == "uniprotqa") return data::load_uniprotqa(ref.path);
  throw ConfigError("unsupported QA format '" + ref.format + "'");
}

bool same_model(const fusion::ModelConfig& a, const fusion::ModelConfig& b) {
  const auto& x = a.lm;
  const auto& y = b.lm;
  return x.vocab_size == y.vocab_size && x.width == y.width && x.blocks == y.blocks && x.heads == y.heads &&
         x.ff_width == y.ff_width && x.context_length == y.context_length &&
         a.molecule.layers == b.molecule.layers && a.molecule.hidden == b.molecule.hidden &&
         a.protein.layers == b.protein.layers && a.protein.width == b.protein.width &&
         a.protein.heads == b.protein.heads && a.protein.ff_width == b.protein.ff_width &&
         a.protein.max_residues == b.protein.max_residues;
}

void collect_strings(const nlohmann::json& v, std::vector<std::string>& out) {
  if (v.is_string()) {
    out.push_back(v.get<std::string>());
  } else if (v.is_array() || v.is_object()) {
    for (const auto& item : v) collect_strings(item, out);
  }
}

}  // namespace

OutputLock::OutputLock(const std::string& dir) {
  ensure_dir(dir);
  path_ = join(dir, kLockFileName);
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    const std::string reason = errno == EEXIST ? "another run holds " : std::string(std::strerror(errno)) + ": ";
    throw IoError(reason + path_);
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] auto written = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

OutputLock::~OutputLock() { std::remove(path_.c_str()); }

void apply_stage_freeze(ParamStore& store, const RunConfig& config, fusion::Stage stage) {
  std::set<std::string> listed;
  if (auto it = config.freeze.find(std::string(stage_name(stage))); it != config.freeze.end()) {
    listed.insert(it->second.begin(), it->second.end());
  }
  for (const auto& g : store.groups()) store.set_frozen(g, listed.count(g) > 0);
}

std::vector<fusion::QaSample> load_stage_samples(const std::vector<DatasetRef>& refs, fusion::Stage stage) {
  std::vector<fusion::QaSample> samples;
  for (const auto& ref : refs) {
    if (ref.format == "pubchemqa" || ref.format == "uniprotqa") {
      for (const auto& r : load_qa(ref)) {
        if (!trains_on(r)) continue;
        const auto modality =
            r.entity_kind == data::EntityKind::kSmiles ? fusion::Modality::kMolecule : fusion::Modality::kProtein;
        fusion::Entity entity;
        if (stage == fusion::Stage::kAlign) {
          if (modality == fusion::Modality::kMolecule) {
            entity = chem::parse_smiles(r.entity);
          } else {
            entity = protein::validate_sequence(r.entity);
          }
        } else {
          entity = fusion::InlineEntityText{modality, r.entity};
        }
        samples.push_back({std::move(entity), r.question, r.answer});
      }
    } else {
      if (stage == fusion::Stage::kAlign) throw ConfigError("MCQ data cannot drive the align stage");
      for (const auto& m : data::load_mcq_benchmark(ref.path, data::parse_mcq_format(ref.format))) {
        const std::string question = m.context ? *m.context + " " + m.question : m.question;
        samples.push_back({std::monostate{}, question, m.options[m.gold]});
      }
    }
  }
  if (samples.empty()) throw EmptyInputError("no training samples for stage " + std::string(stage_name(stage)));
  return samples;
}

std::vector<std::vector<text::TokenId>> load_lm_chunks(const RunConfig& config, const text::Tokenizer& tokenizer) {
  if (config.data.corpus.empty()) throw ConfigError("stage lm needs data.corpus");
  const int max_tokens =
      config.data.chunk_max_tokens > 0 ? config.data.chunk_max_tokens : config.model.lm.context_length - 1;
  std::vector<std::vector<text::TokenId>> chunks;
  for (const auto& doc : data::load_corpus(config.data.corpus)) {
    for (auto& c : data::chunk_sentences(doc, tokenizer, static_cast<std::size_t>(std::max(16, max_tokens))).chunks) {
      chunks.push_back(std::move(c.tokens));
    }
  }
  if (chunks.empty()) throw EmptyInputError("corpus produced no chunks");
  return chunks;
}

StageRun train_stage(fusion::Stage stage, const RunConfig& config, std::optional<CheckpointBundle> prior,
                     const std::vector<fusion::QaSample>* samples_override) {
  validate(config);
  const std::string name(stage_name(stage));
  if (stage != fusion::Stage::kLanguageModel && !prior) {
    throw MissingPrerequisiteError("stage " + name + " needs a checkpoint from an earlier stage");
  }
  if (prior && !same_model(prior->config.model, config.model)) {
    throw ConfigError("model dimensions in the config differ from the checkpoint");
  }
  std::vector<StageRecord> history;
  std::optional<fusion::FusionModel> model;
  if (prior) {
    history = prior->history;
    model.emplace(std::move(prior->model));
    if (!model->has_language_model()) throw MissingPrerequisiteError("checkpoint has no language model");
  } else {
    if (config.data.tokenizer.empty()) throw ConfigError("stage lm without a checkpoint needs data.tokenizer");
    model.emplace(config.model, load_tokenizer(config.data.tokenizer));
    Rng rng(config.seed);
    model->init_language_model(rng);
  }
  if (stage == fusion::Stage::kAlign && !model->has_modalities()) {
    Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    model->init_modalities(rng);
  }
  apply_stage_freeze(model->params(), config, stage);

  std::vector<double> trace;
  if (stage == fusion::Stage::kLanguageModel) {
    const auto chunks = load_lm_chunks(config, model->tokenizer());
    trace = text::train_lm(model->lm(), model->params(), chunks, config.train_config()).loss_trace;
  } else {
    std::vector<fusion::QaSample> loaded;
    if (!samples_override) {
      loaded = load_stage_samples(stage == fusion::Stage::kAlign ? config.data.align_train : config.data.qa_train,
                                  stage);
    }
    const auto& samples = samples_override ? *samples_override : loaded;
    trace = fusion::train_samples(*model, stage, samples, config.train_config());
  }
  history.push_back({name, trace.size()});
  return StageRun{CheckpointBundle{config, name, trace.size(), std::move(history), std::move(*model)},
                  std::move(trace)};
}

void write_loss_csv(const std::string& path, const std::vector<double>& trace) {
  std::string text = "step,loss\n";
  char buf[64];
  for (std::size_t i = 0; i < trace.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i + 1, trace[i]);
    text += buf;
  }
  write_text(path, text);
}

StageOutcome run_stage(fusion::Stage stage, const RunConfig& config, const StageOptions& options) {
  if (options.out_dir.empty()) throw UsageError("an output directory is required");
  OutputLock lock(options.out_dir);
  std::optional<CheckpointBundle> prior;
  if (options.from_checkpoint) {
    if (!fs::exists(*options.from_checkpoint)) {
      throw MissingPrerequisiteError("checkpoint " + *options.from_checkpoint + " does not exist");
    }
    prior.emplace(load_checkpoint(*options.from_checkpoint));
  }
  StageRun run = train_stage(stage, config, std::move(prior));
  const std::string name(stage_name(stage));
  StageOutcome outcome;
  outcome.checkpoint_path = join(options.out_dir, name + ".ckpt");
  outcome.loss_csv_path = join(options.out_dir, name + "_loss.csv");
  save_checkpoint(run.bundle, outcome.checkpoint_path);
  write_loss_csv(outcome.loss_csv_path, run.loss_trace);
  nlohmann::ordered_json report;
  report["stage"] = name;
  report["steps"] = run.loss_trace.size();
  report["final_loss"] = run.loss_trace.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(run.loss_trace.back());
  report["config_hash"] = config_hash(config);
  report["checkpoint"] = fs::path(outcome.checkpoint_path).filename().string();
  write_text(join(options.out_dir, name + "_run.json"), report.dump(2) + "\n");
  outcome.loss_trace = std::move(run.loss_trace);
  return outcome;
}

data::StatsManifest build_corpus_files(const std::string& corpus_path, const std::string& allowlist_path,
                                       const std::optional<std::string>& tokenizer_path, int max_tokens,
                                       const std::string& out_dir) {
  std::set<std::string> allowlist;
  {
    std::ifstream in(allowlist_path);
    if (!in) throw IoError("cannot open allowlist " + allowlist_path);
    std::string line;
    while (std::getline(in, line)) {
      while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.pop_back();
      const auto first = line.find_first_not_of(" \t");
      if (first != std::string::npos) allowlist.insert(line.substr(first));
    }
  }
  const auto docs = data::load_corpus(corpus_path);
  data::StatsManifest manifest;
  data::StageStats filter_stats;
  auto kept = data::filter_biomedical(docs, allowlist, &filter_stats);
  manifest.stages.push_back(filter_stats);

  data::StageStats strip_stats;
  strip_stats.stage = "strip_nonbody";
  strip_stats.in = kept.size();
  strip_stats.drops = {{"malformed_spans", 0}, {"empty_after_strip", 0}};
  std::vector<data::CorpusDoc> stripped;
  std::vector<std::string> log;
  for (const auto& doc : kept) {
    try {
      auto clean = data::strip_nonbody(doc);
      if (clean.body.empty()) {
        ++strip_stats.drops["empty_after_strip"];
        log.push_back("doc " + doc.doc_id + ": dropped, empty after stripping");
        continue;
      }
      stripped.push_back(std::move(clean));
    } catch (const FormatError& e) {
      ++strip_stats.drops["malformed_spans"];
      log.push_back(std::string("doc ") + doc.doc_id + ": dropped, " + e.what());
    }
  }
  strip_stats.out = stripped.size();
  manifest.stages.push_back(strip_stats);

  ensure_dir(out_dir);
  data::save_corpus(join(out_dir, "corpus.jsonl"), stripped);
  if (tokenizer_path) {
    const auto tokenizer = load_tokenizer(*tokenizer_path);
    std::vector<data::OrderedJson> rows;
    std::size_t tokens = 0;
    for (const auto& doc : stripped) {
      const auto chunked = data::chunk_sentences(doc, tokenizer, static_cast<std::size_t>(max_tokens));
      for (std::size_t i = 0; i < chunked.chunks.size(); ++i) {
        data::OrderedJson row;
        row["doc_id"] = doc.doc_id;
        row["chunk"] = i;
        row["text"] = chunked.chunks[i].text;
        row["tokens"] = chunked.chunks[i].tokens;
        rows.push_back(std::move(row));
      }
      tokens += chunked.total_tokens;
    }
    data::write_jsonl(join(out_dir, "chunks.jsonl"), rows);
    manifest.totals["chunks"] = rows.size();
    manifest.totals["tokens"] = tokens;
  }
  manifest.totals["documents"] = stripped.size();
  manifest.write(join(out_dir, "stats.json"));
  write_lines(join(out_dir, "drops.log"), log);
  return manifest;
}

namespace {

data::StatsManifest finish_qa_build(data::BuildResult built, std::uint64_t seed, const std::string& out_dir,
                                    const std::string& name, bool molecules) {
  auto records = data::split_dataset(std::move(built.records), {8.0, 1.0, 1.0}, seed);
  data::StatsManifest manifest;
  manifest.stages.push_back(built.stats);
  data::StageStats split;
  split.stage = "split_dataset";
  split.in = records.size();
  split.out = records.size();
  for (auto s : data::kSplitNames) split.extra[std::string(s)] = 0;
  for (const auto& r : records) ++split.extra[r.split];
  manifest.stages.push_back(split);
  manifest.totals["records"] = records.size();
  ensure_dir(out_dir);
  if (molecules) {
    data::save_pubchemqa(join(out_dir, name + ".jsonl"), records);
  } else {
    data::save_uniprotqa(join(out_dir, name + ".jsonl"), records);
  }
  manifest.write(join(out_dir, "stats.json"));
  write_lines(join(out_dir, "drops.log"), built.log);
  return manifest;
}

}  // namespace

data::StatsManifest build_pubchemqa_files(const std::string& raw_path, std::uint64_t seed, const std::string& out_dir) {
  return finish_qa_build(data::build_pubchemqa(data::load_raw_molecules(raw_path)), seed, out_dir, "pubchemqa", true);
}

data::StatsManifest build_uniprotqa_files(const std::string& raw_path, std::uint64_t seed, const std::string& out_dir) {
  return finish_qa_build(data::build_uniprotqa(data::load_raw_proteins(raw_path)), seed, out_dir, "uniprotqa", false);
}

text::Tokenizer train_tokenizer_files(const std::vector<std::string>& inputs, int vocab_size,
                                      const std::string& out_path) {
  std::vector<std::string> corpus;
  for (const auto* t : {&fusion::PromptTemplate::molecule(), &fusion::PromptTemplate::protein(),
                        &fusion::PromptTemplate::text()}) {
    corpus.push_back(t->render("", ""));
  }
  for (const auto& path : inputs) {
    data::read_jsonl(path, [&](const nlohmann::json& row, std::size_t) { collect_strings(row, corpus); });
  }
  auto tokenizer = text::Tokenizer::train(corpus, vocab_size);
  const auto parent = fs::path(out_path).parent_path();
  if (!parent.empty()) ensure_dir(parent.string());
  write_text(out_path, tokenizer.to_json().dump() + "\n");
  return tokenizer;
}

text::Tokenizer load_tokenizer(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open tokenizer " + path);
  try {
    return text::Tokenizer::from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("tokenizer " + path + ": " + e.what());
  }
}

}  // namespace biofusion::harness
