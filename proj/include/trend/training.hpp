#pragma once

#include <vector>

#include "trend/corpus.hpp"
#include "trend/model.hpp"
#include "trend/nn.hpp"

namespace trend::training {

struct LossWeights {
  double trigger = 0.3;
  double relation = 1.0;
  double binary = 1.0;
};

// Teacher-forcing rates: probability of feeding gold instead of the model's
// own decision during training.
struct ScheduleConfig {
  double tf_gate = 0.7;
  double tf_trigger = 0.7;
};

struct TrainConfig {
  double lr = 3e-5;
  int epochs = 30;
  int batch_size = 8;
  uint64_t seed = 42;
  double clip_norm = 0.0;
  LossWeights weights;
  ScheduleConfig schedule;
};

// Weighted sum, evaluated left to right so equal inputs give bit-equal
// totals everywhere this composition appears.
double combine_losses(const LossWeights& w, double trigger, double relation, double binary);

// How many times each scheduled decision fell to gold versus the model.
struct SamplingCounters {
  long gate_gold = 0;
  long gate_model = 0;
  long trigger_gold = 0;
  long trigger_model = 0;
};

struct SelectedSpan {
  bool gate_on = false;       // the gate decision that governs the fusion path
  bool used_gold_gate = false;
  bool used_gold_trigger = false;  // meaningful only when gate_on
  corpus::TriggerSpan span;        // absent when the chosen gate is off
};

// One scheduled-sampling decision. Always consumes exactly two draws from
// the stream (gate, then trigger) so instance order alone determines the
// randomness. When gold is chosen but the instance has no gold span, the
// model's own decoded span is used instead.
SelectedSpan scheduled_select(Rng& rng, const ScheduleConfig& schedule,
                              const corpus::TokenizedInstance& inst,
                              const model::TrendModel& m, const model::TrendModel::Base& base,
                              SamplingCounters* counters = nullptr);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double train_trigger = 0.0;
  double train_relation = 0.0;
  double train_binary = 0.0;
  double dev_relation_accuracy = 0.0;
  double dev_gate_accuracy = 0.0;
  double dev_trigger_exact_match = 0.0;
  SamplingCounters sampling;
};

struct FitResult {
  std::vector<EpochRecord> log;
};

// Joint supervised training: per-epoch shuffle, scheduled sampling, batched
// Adam steps, dev metrics after every epoch. Runs exactly cfg.epochs epochs.
FitResult fit(model::TrendModel& m, const std::vector<corpus::TokenizedInstance>& train,
              const std::vector<corpus::TokenizedInstance>& dev, const TrainConfig& cfg);

// Dev-style metrics of a model over a set of instances.
struct EvalSnapshot {
  double relation_accuracy = 0.0;
  double gate_accuracy = 0.0;
  double trigger_exact_match = 0.0;
  int trigger_instances = 0;
};
EvalSnapshot evaluate_snapshot(const model::TrendModel& m,
                               const std::vector<corpus::TokenizedInstance>& instances,
                               bool force_gate_on = false);

}  // namespace trend::training
