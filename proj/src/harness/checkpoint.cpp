// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#include "biofusion/harness/checkpoint.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>

#include "biofusion/core/errors.hpp"
#include "biofusion/core/rng.hpp"

namespace biofusion::harness {
namespace {

std::uint32_t crc(const std::uint8_t* data, std::size_t n) {
  return static_cast<std::uint32_t>(crc32(0L, data, static_cast<uInt>(n)));
}

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  std::size_t size() const { return out_.size(); }
  const std::uint8_t* data() const { return out_.data(); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  Reader(const std::vector<std::uint8_t>& bytes, std::size_t end) : bytes_(bytes), end_(end) {}
  void need(std::size_t n) const {
    if (n > end_ - pos_) throw CorruptCheckpointError("checkpoint truncated");
  }
  const std::uint8_t* take(std::size_t n) {
    need(n);
    const auto* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }
  std::uint8_t u8() { return *take(1); }
  std::uint32_t u32() {
    const auto* p = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    const auto* p = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return end_ - pos_; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

nlohmann::ordered_json manifest_for(const CheckpointBundle& b) {
  nlohmann::ordered_json m;
  m["format_version"] = kCheckpointVersion;
  m["stage"] = b.stage;
  m["step"] = b.step;
  auto history = nlohmann::ordered_json::array();
  for (const auto& h : b.history) history.push_back({{"stage", h.stage}, {"steps", h.steps}});
  m["history"] = history;
  m["config_hash"] = config_hash(b.config);
  m["config"] = run_config_to_json(b.config);
  const ParamStore& store = b.model.params();
  auto components = nlohmann::ordered_json::object();
  for (const auto& g : store.groups()) components[g] = store.element_count(g);
  m["components"] = components;
  m["frozen"] = std::vector<std::string>(store.frozen_groups().begin(), store.frozen_groups().end());
  m["tokenizer"] = nlohmann::ordered_json::parse(b.model.tokenizer().to_json().dump());
  return m;
}

// Manifest and header only; tensors are read by the caller.
nlohmann::json read_header(Reader& r) {
  const auto* magic = r.take(sizeof(kCheckpointMagic));
  if (std::memcmp(magic, kCheckpointMagic, sizeof(kCheckpointMagic)) != 0) {
    throw CorruptCheckpointError("bad magic bytes");
  }
  const auto version = r.u32();
  if (version != kCheckpointVersion) {
    throw CorruptCheckpointError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto length = r.u64();
  if (length > r.remaining()) throw CorruptCheckpointError("manifest length exceeds file");
  const auto* text = r.take(static_cast<std::size_t>(length));
  try {
    return nlohmann::json::parse(text, text + length);
  } catch (const nlohmann::json::exception& e) {
    throw CorruptCheckpointError(std::string("manifest is not valid JSON: ") + e.what());
  }
}

void verify_file_crc(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < sizeof(kCheckpointMagic) + 4 + 8 + 8 + 4) throw CorruptCheckpointError("checkpoint truncated");
  const std::size_t body = bytes.size() - 4;
  std::uint32_t stored = 0;
  for (int i = 0; i < 4; ++i) stored |= static_cast<std::uint32_t>(bytes[body + i]) << (8 * i);
  if (crc(bytes.data(), body) != stored) throw CorruptCheckpointError("file checksum mismatch");
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path);
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const CheckpointBundle& bundle) {
  Writer w;
  w.bytes(kCheckpointMagic, sizeof(kCheckpointMagic));
  w.u32(kCheckpointVersion);
  const std::string manifest = manifest_for(bundle).dump();
  w.u64(manifest.size());
  w.bytes(manifest.data(), manifest.size());
  const auto& params = bundle.model.params().all();
  w.u64(params.size());
  for (const auto& p : params) {
    const std::size_t start = w.size();
    w.u32(static_cast<std::uint32_t>(p.name.size()));
    w.bytes(p.name.data(), p.name.size());
    w.u8(kDtypeFloat64);
    w.u8(static_cast<std::uint8_t>(p.rank));
    if (p.rank == 2) w.u64(static_cast<std::uint64_t>(p.value.rows()));
    if (p.rank >= 1) w.u64(static_cast<std::uint64_t>(p.value.cols()));
    for (Eigen::Index i = 0; i < p.value.size(); ++i) w.f64(p.value.data()[i]);
    w.u32(crc(w.data() + start, w.size() - start));
  }
  w.u32(crc(w.data(), w.size()));
  return w.take();
}

CheckpointBundle deserialize_checkpoint(const std::vector<std::uint8_t>& bytes) {
  verify_file_crc(bytes);
  Reader r(bytes, bytes.size() - 4);
  const nlohmann::json manifest = read_header(r);

  RunConfig config;
  text::Tokenizer tokenizer;
  std::string stage;
  std::size_t step = 0;
  std::vector<StageRecord> history;
  std::set<std::string> components;
  std::vector<std::string> frozen;
  try {
    config = run_config_from_json(manifest.at("config"));
    validate(config);
    if (manifest.at("config_hash").get<std::string>() != config_hash(config)) {
      throw CorruptCheckpointError("config hash does not match the stored config");
    }
    tokenizer = text::Tokenizer::from_json(manifest.at("tokenizer"));
    stage = manifest.at("stage").get<std::string>();
    step = manifest.at("step").get<std::size_t>();
    for (const auto& h : manifest.at("history")) {
      history.push_back({h.at("stage").get<std::string>(), h.at("steps").get<std::size_t>()});
    }
    for (auto it = manifest.at("components").begin(); it != manifest.at("components").end(); ++it) {
      components.insert(it.key());
    }
    frozen = manifest.at("frozen").get<std::vector<std::string>>();
  } catch (const CorruptCheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CorruptCheckpointError(std::string("invalid manifest: ") + e.what());
  }

  fusion::FusionModel model(config.model, tokenizer);
  Rng rng(0);
  if (components.count(std::string(fusion::kLmGroup))) model.init_language_model(rng);
  bool any_modality = false;
  for (auto g : fusion::kModalityGroups) any_modality = any_modality || components.count(std::string(g));
  if (any_modality) model.init_modalities(rng);
  ParamStore& store = model.params();

  const auto count = r.u64();
  if (count != store.size()) {
    throw CorruptCheckpointError("checkpoint holds " + std::to_string(count) + " tensors, model expects " +
                                 std::to_string(store.size()));
  }
  std::set<std::string> seen;
  for (std::uint64_t t = 0; t < count; ++t) {
    const std::size_t start = r.pos();
    const auto name_len = r.u32();
    const auto* name_bytes = r.take(name_len);
    std::string name(reinterpret_cast<const char*>(name_bytes), name_len);
    const auto dtype = r.u8();
    const auto rank = r.u8();
    if (dtype != kDtypeFloat64) throw CorruptCheckpointError("tensor " + name + ": unknown dtype");
    if (rank > 2) throw CorruptCheckpointError("tensor " + name + ": bad rank");
    const std::uint64_t rows = rank == 2 ? r.u64() : 1;
    const std::uint64_t cols = rank >= 1 ? r.u64() : 1;
    if (!store.contains(name) || !seen.insert(name).second) {
      throw CorruptCheckpointError("unexpected or duplicate tensor " + name);
    }
    Parameter& p = store.get(name);
    if (p.rank != rank || static_cast<std::uint64_t>(p.value.rows()) != rows ||
        static_cast<std::uint64_t>(p.value.cols()) != cols) {
      throw CorruptCheckpointError("tensor " + name + ": shape mismatch");
    }
    r.need(static_cast<std::size_t>(rows * cols) * 8);
    for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = r.f64();
    const std::uint32_t expected = crc(bytes.data() + start, r.pos() - start);
    if (r.u32() != expected) throw CorruptCheckpointError("tensor " + name + ": checksum mismatch");
  }
  if (r.remaining() != 0) throw CorruptCheckpointError("trailing bytes after tensors");
  for (const auto& g : frozen) {
    if (!store.has_group(g)) throw CorruptCheckpointError("frozen group " + g + " has no tensors");
    store.set_frozen(g, true);
  }
  return CheckpointBundle{std::move(config), std::move(stage), step, std::move(history), std::move(model)};
}

void save_checkpoint(const CheckpointBundle& bundle, const std::string& path) {
  const auto bytes = serialize_checkpoint(bundle);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into place at " + path + ": " + ec.message());
}

CheckpointBundle load_checkpoint(const std::string& path) { return deserialize_checkpoint(read_file(path)); }

nlohmann::json read_checkpoint_manifest(const std::string& path) {
  const auto bytes = read_file(path);
  verify_file_crc(bytes);
  Reader r(bytes, bytes.size() - 4);
  return read_header(r);
}

}  // namespace biofusion::harness
