#pragma once

#include <map>
#include <memory>
#include <string>

#include "trend/model.hpp"
#include "trend/nn.hpp"
#include "trend/ontology.hpp"
#include "trend/tokenizer.hpp"

namespace trend::checkpoint {

// Checkpoint directory layout:
//   manifest.json   format version, backbone, shapes, seed, fingerprints,
//                   provenance, config snapshot
//   params.bin      every parameter tensor, name-sorted, 64-bit floats
//   vocab.txt       the tokenizer vocabulary
//   ontology.json   the relation ontology the head was trained against
// Saving is deterministic: the same model state produces the same bytes, and
// save -> load -> save is byte-identical.

struct Manifest {
  int format_version = 1;
  std::string backbone;
  model::ModelConfig config;
  uint64_t seed = 0;
  std::string vocab_fingerprint;
  std::string ontology_fingerprint;
  std::string params_fingerprint;
  std::string source_fingerprint;  // empty = trained from scratch
  std::map<std::string, std::string> config_snapshot;
};

struct Saved {
  std::string dir;
  Manifest manifest;
};

Saved save(const std::string& dir, const model::TrendModel& model,
           const tokenizer::Vocab& vocab, const evaluation::RelationOntology& ontology,
           uint64_t seed, const std::map<std::string, std::string>& config_snapshot,
           const std::string& source_fingerprint = "");

struct Loaded {
  Manifest manifest;
  std::unique_ptr<nn::ParamStore> params;
  tokenizer::Vocab vocab;
  evaluation::RelationOntology ontology;

  // Model over the loaded parameters; call at most once.
  model::TrendModel make_model();
};

// Throws CheckpointError on missing files, corruption, or any fingerprint or
// shape mismatch.
Loaded load(const std::string& dir);

// Parameter-tensor serialization used inside checkpoints, exposed for tests.
std::string serialize_params(const nn::ParamStore& params);
std::unique_ptr<nn::ParamStore> deserialize_params(const std::string& bytes);

}  // namespace trend::checkpoint
