#include "trend/training.hpp"

#include <numeric>

#include "trend/common.hpp"
#include "trend/evaluation.hpp"
#include "trend/heads.hpp"

namespace trend::training {

using corpus::TokenizedInstance;
using corpus::TriggerSpan;
using model::TrendModel;
using nn::Var;

double combine_losses(const LossWeights& w, double trigger, double relation, double binary) {
  return w.trigger * trigger + w.relation * relation + w.binary * binary;
}

SelectedSpan scheduled_select(Rng& rng, const ScheduleConfig& schedule,
                              const TokenizedInstance& inst, const TrendModel& m,
                              const TrendModel::Base& base, SamplingCounters* counters) {
  // Both draws happen unconditionally so the stream position depends only on
  // how many instances came before, never on model decisions.
  bool gold_gate = rng.bernoulli(schedule.tf_gate);
  bool gold_trigger = rng.bernoulli(schedule.tf_trigger);

  SelectedSpan out;
  out.used_gold_gate = gold_gate;
  out.gate_on =
      gold_gate ? inst.gate_label == 1 : model::decide_gate(base.gate_logit.val()(0, 0));
  if (counters) ++(gold_gate ? counters->gate_gold : counters->gate_model);
  if (!out.gate_on) return out;

  out.used_gold_trigger = gold_trigger && inst.gold_trigger.exists;
  if (counters) ++(gold_trigger ? counters->trigger_gold : counters->trigger_model);
  if (out.used_gold_trigger) {
    out.span = inst.gold_trigger;
  } else {
    out.span = model::decode_span(base.span.start.val().a, base.span.end.val().a,
                                  m.config().span_window);
  }
  return out;
}

namespace {

void check_labels(const TrendModel& m, const std::vector<TokenizedInstance>& instances,
                  const char* which) {
  for (const auto& inst : instances) {
    if (inst.relation_label >= m.config().relations)
      throw InputError(std::string(which) + " instance " + inst.example_id +
                       " carries relation id " + std::to_string(inst.relation_label) +
                       " but the relation head has " + std::to_string(m.config().relations) +
                       " classes");
    if (inst.gate_label == 1 && !inst.gold_trigger.exists)
      throw InputError(std::string(which) + " instance " + inst.example_id +
                       " is gate-positive but has no gold trigger span");
  }
}

Var trigger_ce(const TrendModel::Base& base, const TokenizedInstance& inst) {
  Var parts = nn::add(nn::pick(base.span.start, inst.gold_trigger.start, 0),
                      nn::pick(base.span.end, inst.gold_trigger.end, 0));
  return nn::scale(parts, -0.5);
}

Var relation_ce(nn::Tape& tape, const TrendModel& m, const TrendModel::Base& base,
                const TriggerSpan& span, const TokenizedInstance& inst) {
  Var logits = m.relation_logits(tape, base, span);
  Var logp = nn::log_softmax_row(logits);
  return nn::scale(nn::pick(logp, 0, inst.relation_label), -1.0);
}

}  // namespace

FitResult fit(TrendModel& m, const std::vector<TokenizedInstance>& train,
              const std::vector<TokenizedInstance>& dev, const TrainConfig& cfg) {
  if (train.empty()) throw InputError("training set is empty");
  if (cfg.epochs <= 0) throw InputError("epochs must be positive");
  if (cfg.batch_size <= 0) throw InputError("batch size must be positive");
  if (cfg.lr <= 0.0) throw InputError("learning rate must be positive");
  if (cfg.weights.trigger < 0.0 || cfg.weights.relation < 0.0 || cfg.weights.binary < 0.0)
    throw InputError("loss weights must be non-negative");
  for (double tf : {cfg.schedule.tf_gate, cfg.schedule.tf_trigger})
    if (tf < 0.0 || tf > 1.0) throw InputError("teacher-forcing rates must lie in [0, 1]");
  check_labels(m, train, "train");
  check_labels(m, dev, "dev");

  Rng rng(cfg.seed);
  nn::Adam opt({cfg.lr, 0.9, 0.999, 1e-8, cfg.clip_norm});
  std::vector<size_t> order(train.size());
  std::iota(order.begin(), order.end(), size_t{0});

  FitResult res;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(order);
    EpochRecord rec;
    rec.epoch = epoch;
    double sum_loss = 0, sum_t = 0, sum_r = 0, sum_b = 0;
    int batches = 0;
    for (size_t begin = 0; begin < order.size(); begin += static_cast<size_t>(cfg.batch_size)) {
      size_t end = std::min(order.size(), begin + static_cast<size_t>(cfg.batch_size));
      nn::Tape tape;
      std::vector<Var> trigger_parts, relation_parts, binary_parts;
      for (size_t i = begin; i < end; ++i) {
        const TokenizedInstance& inst = train[order[i]];
        TrendModel::Base base = m.forward_base(tape, inst);
        binary_parts.push_back(
            nn::bce_with_logits(base.gate_logit, inst.gate_label == 1 ? 1.0 : 0.0));
        if (inst.gate_label == 1) trigger_parts.push_back(trigger_ce(base, inst));
        SelectedSpan sel = scheduled_select(rng, cfg.schedule, inst, m, base, &rec.sampling);
        relation_parts.push_back(relation_ce(tape, m, base, sel.span, inst));
      }
      Var lt = trigger_parts.empty() ? tape.constant(nn::Mat(1, 1))
                                     : nn::mean_scalars(trigger_parts);
      Var lr = nn::mean_scalars(relation_parts);
      Var lb = nn::mean_scalars(binary_parts);
      Var total = nn::add(nn::add(nn::scale(lt, cfg.weights.trigger),
                                  nn::scale(lr, cfg.weights.relation)),
                          nn::scale(lb, cfg.weights.binary));
      tape.backward(total);
      opt.step(m.params());
      m.params().zero_grad();
      sum_loss += total.scalar();
      sum_t += lt.scalar();
      sum_r += lr.scalar();
      sum_b += lb.scalar();
      ++batches;
    }
    rec.train_loss = sum_loss / batches;
    rec.train_trigger = sum_t / batches;
    rec.train_relation = sum_r / batches;
    rec.train_binary = sum_b / batches;
    EvalSnapshot snap = evaluate_snapshot(m, dev);
    rec.dev_relation_accuracy = snap.relation_accuracy;
    rec.dev_gate_accuracy = snap.gate_accuracy;
    rec.dev_trigger_exact_match = snap.trigger_exact_match;
    res.log.push_back(rec);
  }
  return res;
}

EvalSnapshot evaluate_snapshot(const TrendModel& m,
                               const std::vector<TokenizedInstance>& instances,
                               bool force_gate_on) {
  EvalSnapshot out;
  if (instances.empty()) return out;
  size_t rel_ok = 0, gate_ok = 0;
  std::vector<TriggerSpan> trig_preds;
  std::vector<std::vector<TriggerSpan>> trig_alts;
  for (const auto& inst : instances) {
    TrendModel::Prediction pred = m.predict(inst, force_gate_on);
    rel_ok += pred.relation == inst.relation_label ? 1 : 0;
    gate_ok += pred.gate == (inst.gate_label == 1) ? 1 : 0;
    if (inst.gate_label == 1) {
      trig_preds.push_back(pred.trigger);
      trig_alts.push_back(inst.alt_triggers);
    }
  }
  out.relation_accuracy = static_cast<double>(rel_ok) / static_cast<double>(instances.size());
  out.gate_accuracy = static_cast<double>(gate_ok) / static_cast<double>(instances.size());
  out.trigger_instances = static_cast<int>(trig_preds.size());
  out.trigger_exact_match =
      trig_preds.empty() ? 0.0 : evaluation::trigger_exact_match(trig_preds, trig_alts);
  return out;
}

}  // namespace trend::training
