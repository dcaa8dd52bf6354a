#pragma once

#include <vector>

#include "trend/corpus.hpp"
#include "trend/nn.hpp"

namespace trend::model {

struct HeadsConfig {
  int dim = 0;
  int relations = 0;
};

// The three task heads on top of the encoder: a binary explicit-trigger gate
// on the second [CLS], start/end pointers over dialogue tokens, and a
// relation classifier over the context vector fused with the trigger span.
class Heads {
 public:
  Heads(const HeadsConfig& cfg, nn::ParamStore& params, Rng& init_rng);

  const HeadsConfig& config() const { return cfg_; }

  // 1x1 logit; >= 0 reads as "an explicit trigger is present".
  nn::Var gate_logit(nn::Tape& tape, nn::Var cls2) const;

  // Log-probabilities over positions, -inf outside the dialogue region.
  struct SpanScores {
    nn::Var start;  // n x 1
    nn::Var end;    // n x 1
  };
  SpanScores span_scores(nn::Tape& tape, nn::Var hidden,
                         const std::vector<uint8_t>& dialogue_mask) const;

  // Attention-weighted sum of the span's hidden states, queried by the
  // context vector. An absent span yields the learned no-trigger embedding.
  nn::Var fuse(nn::Tape& tape, nn::Var cls1, nn::Var hidden,
               const corpus::TriggerSpan& span) const;

  // 1 x relations logits over concat(context, fused trigger).
  nn::Var relation_logits(nn::Tape& tape, nn::Var cls1, nn::Var fused) const;

 private:
  HeadsConfig cfg_;
  nn::ParamStore* params_;
};

// Gate decision rule: a zero logit predicts "explicit".
inline bool decide_gate(double logit) { return logit >= 0.0; }

// Greedy span decoding: best start first (ties to the smallest index), then
// the best end within [start, start+window]. Masked positions carry -inf.
corpus::TriggerSpan decode_span(const std::vector<double>& start_scores,
                                const std::vector<double>& end_scores, int window);

// Argmax with ties broken toward the smallest index.
int argmax_index(const std::vector<double>& scores);

}  // namespace trend::model
