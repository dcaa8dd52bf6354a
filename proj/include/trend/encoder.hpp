#pragma once

#include <string>

#include "trend/corpus.hpp"
#include "trend/nn.hpp"

namespace trend::model {

// Transformer sizes. Presets swap in bigger backbones without touching the
// rest of the model; everything downstream sees only `dim` and the Encoded
// contract below.
struct EncoderConfig {
  std::string preset = "tiny";
  int layers = 2;
  int heads = 2;
  int dim = 16;
  int ffn_dim = 64;
  int max_len = 128;
  int vocab_size = 0;  // set from the vocabulary before constructing

  static EncoderConfig tiny();
  static EncoderConfig base();
  static EncoderConfig large();
  static EncoderConfig named(const std::string& preset);  // throws on unknown
};

// Per-instance encoder output, live on the caller's tape. hidden is n x dim;
// cls1 is the context vector, cls2 feeds the trigger gate.
struct Encoded {
  nn::Var hidden;
  nn::Var cls1;
  nn::Var cls2;
};

// Token+position+segment embeddings with LayerNorm, then post-LN blocks of
// multi-head attention and a GELU feed-forward. Instances are encoded one at
// a time at their true length, so outputs never depend on batch padding.
class Encoder {
 public:
  // Creates missing parameters in `params` (seeded init), reuses existing
  // ones as loaded from a checkpoint.
  Encoder(const EncoderConfig& cfg, nn::ParamStore& params, Rng& init_rng);

  const EncoderConfig& config() const { return cfg_; }

  Encoded encode(nn::Tape& tape, const corpus::TokenizedInstance& inst) const;

 private:
  EncoderConfig cfg_;
  nn::ParamStore* params_;
};

}  // namespace trend::model
