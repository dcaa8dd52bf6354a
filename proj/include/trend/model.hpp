#pragma once

#include <memory>
#include <vector>

#include "trend/corpus.hpp"
#include "trend/encoder.hpp"
#include "trend/heads.hpp"
#include "trend/nn.hpp"

namespace trend::model {

struct ModelConfig {
  EncoderConfig encoder;
  int relations = 0;
  int span_window = 10;
};

// Encoder plus task heads over one parameter store.
class TrendModel {
 public:
  // Fresh seeded parameters.
  TrendModel(const ModelConfig& cfg, uint64_t seed);
  // Parameters loaded from a checkpoint; anything missing is created from
  // the seed (this is how a replaced relation head gets its fresh init).
  TrendModel(const ModelConfig& cfg, std::unique_ptr<nn::ParamStore> params, uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  nn::ParamStore& params() { return *params_; }
  const nn::ParamStore& params() const { return *params_; }
  const Encoder& encoder() const { return *encoder_; }
  const Heads& heads() const { return *heads_; }

  // Everything up to the relation head: encoder states, gate logit, span
  // scores. The relation logits depend on which span gets fused, so they
  // are produced separately per chosen span.
  struct Base {
    Encoded enc;
    nn::Var gate_logit;
    Heads::SpanScores span;
  };
  Base forward_base(nn::Tape& tape, const corpus::TokenizedInstance& inst) const;

  nn::Var relation_logits(nn::Tape& tape, const Base& base,
                          const corpus::TriggerSpan& span) const;

  struct Prediction {
    bool gate = false;
    corpus::TriggerSpan trigger;
    int relation = 0;
    double gate_logit = 0.0;
    std::vector<double> relation_scores;
  };
  Prediction predict(const corpus::TokenizedInstance& inst, bool force_gate_on = false) const;

  // The gate decision and decoded span exactly as predict would make them,
  // reading scores off an existing forward pass.
  corpus::TriggerSpan decode_own_span(const Base& base, bool force_gate_on = false) const;

 private:
  ModelConfig cfg_;
  std::unique_ptr<nn::ParamStore> params_;
  std::unique_ptr<Encoder> encoder_;
  std::unique_ptr<Heads> heads_;
};

}  // namespace trend::model
