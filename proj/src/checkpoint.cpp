#include "trend/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <filesystem>

#include "json.hpp"
#include "trend/common.hpp"

namespace trend::checkpoint {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'T', 'R', 'N', 'D', 'P', 'A', 'R', 'M'};
constexpr uint32_t kParamsVersion = 1;
constexpr int kManifestVersion = 1;

void append_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void append_f64(std::string& out, double v) {
  uint64_t bits = std::bit_cast<uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

// Bounds-checked little-endian reader over the serialized bytes.
struct Reader {
  const std::string& bytes;
  size_t pos = 0;

  void need(size_t n) const {
    if (pos + n > bytes.size()) throw CheckpointError("parameter file is truncated");
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<uint32_t>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
    pos += 4;
    return v;
  }
  double f64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<uint64_t>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
    pos += 8;
    return std::bit_cast<double>(v);
  }
  std::string str(size_t n) {
    need(n);
    std::string s = bytes.substr(pos, n);
    pos += n;
    return s;
  }
};

std::string path_join(const std::string& dir, const char* file) {
  return (std::filesystem::path(dir) / file).string();
}

std::string read_part(const std::string& dir, const char* file) {
  try {
    return read_file(path_join(dir, file));
  } catch (const InputError& e) {
    throw CheckpointError(std::string("checkpoint ") + dir + ": " + e.what());
  }
}

json encoder_json(const model::EncoderConfig& e) {
  return json{{"preset", e.preset}, {"layers", e.layers},   {"heads", e.heads},
              {"dim", e.dim},       {"ffn_dim", e.ffn_dim}, {"max_len", e.max_len},
              {"vocab_size", e.vocab_size}};
}

model::EncoderConfig encoder_from_json(const json& j) {
  model::EncoderConfig e;
  e.preset = j.at("preset").get<std::string>();
  e.layers = j.at("layers").get<int>();
  e.heads = j.at("heads").get<int>();
  e.dim = j.at("dim").get<int>();
  e.ffn_dim = j.at("ffn_dim").get<int>();
  e.max_len = j.at("max_len").get<int>();
  e.vocab_size = j.at("vocab_size").get<int>();
  return e;
}

std::string manifest_json(const Manifest& m) {
  json j;
  j["format_version"] = m.format_version;
  j["backbone"] = m.backbone;
  j["encoder"] = encoder_json(m.config.encoder);
  j["relations"] = m.config.relations;
  j["span_window"] = m.config.span_window;
  j["seed"] = m.seed;
  j["vocab_fingerprint"] = m.vocab_fingerprint;
  j["ontology_fingerprint"] = m.ontology_fingerprint;
  j["params_fingerprint"] = m.params_fingerprint;
  if (m.source_fingerprint.empty())
    j["source_fingerprint"] = nullptr;
  else
    j["source_fingerprint"] = m.source_fingerprint;
  j["config_snapshot"] = m.config_snapshot;
  return j.dump(2) + "\n";
}

Manifest manifest_from_json(const std::string& text, const std::string& dir) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw CheckpointError("checkpoint " + dir + ": malformed manifest.json");
  try {
    Manifest m;
    m.format_version = j.at("format_version").get<int>();
    if (m.format_version != kManifestVersion)
      throw CheckpointError("checkpoint " + dir + ": unsupported manifest version " +
                            std::to_string(m.format_version));
    m.backbone = j.at("backbone").get<std::string>();
    m.config.encoder = encoder_from_json(j.at("encoder"));
    m.config.relations = j.at("relations").get<int>();
    m.config.span_window = j.at("span_window").get<int>();
    m.seed = j.at("seed").get<uint64_t>();
    m.vocab_fingerprint = j.at("vocab_fingerprint").get<std::string>();
    m.ontology_fingerprint = j.at("ontology_fingerprint").get<std::string>();
    m.params_fingerprint = j.at("params_fingerprint").get<std::string>();
    if (j.contains("source_fingerprint") && !j.at("source_fingerprint").is_null())
      m.source_fingerprint = j.at("source_fingerprint").get<std::string>();
    if (j.contains("config_snapshot"))
      m.config_snapshot = j.at("config_snapshot").get<std::map<std::string, std::string>>();
    return m;
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError("checkpoint " + dir + ": manifest.json: " + e.what());
  }
}

}  // namespace

std::string serialize_params(const nn::ParamStore& params) {
  std::string out(kMagic, sizeof(kMagic));
  append_u32(out, kParamsVersion);
  std::vector<const nn::Param*> all = params.all();
  append_u32(out, static_cast<uint32_t>(all.size()));
  for (const nn::Param* p : all) {
    append_u32(out, static_cast<uint32_t>(p->name.size()));
    out += p->name;
    append_u32(out, static_cast<uint32_t>(p->value.rows));
    append_u32(out, static_cast<uint32_t>(p->value.cols));
    for (double v : p->value.a) append_f64(out, v);
  }
  return out;
}

std::unique_ptr<nn::ParamStore> deserialize_params(const std::string& bytes) {
  Reader r{bytes};
  if (r.str(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic)))
    throw CheckpointError("parameter file has the wrong magic");
  if (r.u32() != kParamsVersion)
    throw CheckpointError("parameter file has an unsupported version");
  uint32_t count = r.u32();
  auto store = std::make_unique<nn::ParamStore>();
  std::string prev;
  for (uint32_t i = 0; i < count; ++i) {
    uint32_t name_len = r.u32();
    std::string name = r.str(name_len);
    if (name.empty() || (i > 0 && !(prev < name)))
      throw CheckpointError("parameter file names are not strictly sorted");
    prev = name;
    uint32_t rows = r.u32();
    uint32_t cols = r.u32();
    if (rows == 0 || cols == 0 || rows > (1u << 24) || cols > (1u << 24))
      throw CheckpointError("parameter " + name + " has an implausible shape");
    nn::Param& p = store->create(name, static_cast<int>(rows), static_cast<int>(cols));
    for (double& v : p.value.a) v = r.f64();
  }
  if (r.pos != bytes.size()) throw CheckpointError("parameter file has trailing bytes");
  return store;
}

Saved save(const std::string& dir, const model::TrendModel& model,
           const tokenizer::Vocab& vocab, const evaluation::RelationOntology& ontology,
           uint64_t seed, const std::map<std::string, std::string>& config_snapshot,
           const std::string& source_fingerprint) {
  if (ontology.size() != model.config().relations)
    throw InternalError("ontology size does not match the relation head");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InputError("cannot create checkpoint directory " + dir + ": " + ec.message());

  std::string params_bin = serialize_params(model.params());
  std::string vocab_txt = vocab.serialize();
  std::string ontology_json = ontology.to_json();

  Manifest m;
  m.format_version = kManifestVersion;
  m.backbone = model.config().encoder.preset;
  m.config = model.config();
  m.seed = seed;
  m.vocab_fingerprint = hex64(vocab.fingerprint());
  m.ontology_fingerprint = hex64(ontology.fingerprint());
  m.params_fingerprint = hex64(fnv1a64(params_bin.data(), params_bin.size()));
  m.source_fingerprint = source_fingerprint;
  m.config_snapshot = config_snapshot;

  write_file(path_join(dir, "params.bin"), params_bin);
  write_file(path_join(dir, "vocab.txt"), vocab_txt);
  write_file(path_join(dir, "ontology.json"), ontology_json);
  write_file(path_join(dir, "manifest.json"), manifest_json(m));
  return Saved{dir, std::move(m)};
}

Loaded load(const std::string& dir) {
  Loaded out;
  out.manifest = manifest_from_json(read_part(dir, "manifest.json"), dir);

  std::string params_bin = read_part(dir, "params.bin");
  std::string got_fp = hex64(fnv1a64(params_bin.data(), params_bin.size()));
  if (got_fp != out.manifest.params_fingerprint)
    throw CheckpointError("checkpoint " + dir + ": params.bin does not match its fingerprint");
  out.params = deserialize_params(params_bin);

  try {
    out.vocab = tokenizer::Vocab::deserialize(read_part(dir, "vocab.txt"));
    out.ontology = evaluation::RelationOntology::load_json(read_part(dir, "ontology.json"));
  } catch (const InputError& e) {
    throw CheckpointError("checkpoint " + dir + ": " + e.what());
  }
  if (hex64(out.vocab.fingerprint()) != out.manifest.vocab_fingerprint)
    throw CheckpointError("checkpoint " + dir + ": vocab.txt does not match its fingerprint");
  if (hex64(out.ontology.fingerprint()) != out.manifest.ontology_fingerprint)
    throw CheckpointError("checkpoint " + dir + ": ontology.json does not match its fingerprint");

  if (out.ontology.size() != out.manifest.config.relations)
    throw CheckpointError("checkpoint " + dir + ": ontology size " +
                          std::to_string(out.ontology.size()) +
                          " does not match the relation head width " +
                          std::to_string(out.manifest.config.relations));
  if (out.vocab.size() != out.manifest.config.encoder.vocab_size)
    throw CheckpointError("checkpoint " + dir + ": vocabulary size does not match the embedding");
  const nn::Param* head = out.params->find("heads.relation.weight");
  if (!head || head->value.cols != out.manifest.config.relations)
    throw CheckpointError("checkpoint " + dir + ": relation head tensor disagrees with manifest");
  return out;
}

model::TrendModel Loaded::make_model() {
  if (!params) throw InternalError("checkpoint parameters already consumed");
  return model::TrendModel(manifest.config, std::move(params), manifest.seed);
}

}  // namespace trend::checkpoint
