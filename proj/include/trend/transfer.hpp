#pragma once

#include <cstdint>
#include <vector>

#include "trend/corpus.hpp"
#include "trend/model.hpp"
#include "trend/nn.hpp"
#include "trend/training.hpp"

namespace trend::transfer {

// Drops the relation head and creates a fresh one sized for the target
// ontology. Every other tensor is left byte-identical.
void reinit_relation_head(nn::ParamStore& params, int dim, int target_relations, uint64_t seed);

struct FineTuneConfig {
  double lr = 3e-5;
  int epochs = 30;
  int batch_size = 8;
  uint64_t seed = 42;
  double clip_norm = 0.0;
  double relation_weight = 1.0;
  bool freeze_gate_span = true;   // keep gate and span pointer tensors fixed
  bool force_gate_on = false;     // fuse the decoded span even when the gate says no
};

// Relation-only fine-tuning on a trigger-free target corpus. The trigger and
// gate loss terms are omitted entirely, so no gradient reaches the gate or
// span tensors regardless of the freeze flag. Spans are the model's own
// hard-decoded predictions.
training::FitResult fine_tune(model::TrendModel& m,
                              const std::vector<corpus::TokenizedInstance>& train,
                              const std::vector<corpus::TokenizedInstance>& dev,
                              const FineTuneConfig& cfg);

}  // namespace trend::transfer
