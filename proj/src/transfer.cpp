#include "trend/transfer.hpp"

#include <numeric>

#include "trend/common.hpp"
#include "trend/heads.hpp"

namespace trend::transfer {

using corpus::TokenizedInstance;
using corpus::TriggerSpan;
using model::TrendModel;
using nn::Var;

void reinit_relation_head(nn::ParamStore& params, int dim, int target_relations, uint64_t seed) {
  if (dim <= 0) throw InputError("relation head needs a positive encoder dim");
  if (target_relations <= 0) throw InputError("target ontology has no relations");
  params.erase("heads.relation.weight");
  params.erase("heads.relation.bias");
  Rng rng(seed);
  nn::Param& w = params.create("heads.relation.weight", 2 * dim, target_relations);
  nn::fill_normal(w.value, rng, 0.02);
  params.create("heads.relation.bias", 1, target_relations);
}

namespace {

void check_trigger_free(const std::vector<TokenizedInstance>& instances, const char* which) {
  for (const auto& inst : instances) {
    if (inst.gate_label != 0 || inst.gold_trigger.exists || !inst.alt_triggers.empty())
      throw InputError(std::string(which) + " instance " + inst.example_id +
                       ": target corpus carries trigger annotations");
  }
}

void check_labels(const TrendModel& m, const std::vector<TokenizedInstance>& instances,
                  const char* which) {
  for (const auto& inst : instances) {
    if (inst.relation_label >= m.config().relations)
      throw InputError(std::string(which) + " instance " + inst.example_id +
                       " carries relation id " + std::to_string(inst.relation_label) +
                       " but the relation head has " + std::to_string(m.config().relations) +
                       " classes");
  }
}

}  // namespace

training::FitResult fine_tune(TrendModel& m, const std::vector<TokenizedInstance>& train,
                              const std::vector<TokenizedInstance>& dev,
                              const FineTuneConfig& cfg) {
  if (train.empty()) throw InputError("fine-tune set is empty");
  if (cfg.epochs <= 0) throw InputError("epochs must be positive");
  if (cfg.batch_size <= 0) throw InputError("batch size must be positive");
  if (cfg.lr <= 0.0) throw InputError("learning rate must be positive");
  if (cfg.relation_weight < 0.0) throw InputError("relation weight must be non-negative");
  check_trigger_free(train, "train");
  check_trigger_free(dev, "dev");
  check_labels(m, train, "train");
  check_labels(m, dev, "dev");

  struct FreezeGuard {
    std::vector<std::pair<nn::Param*, bool>> saved;
    ~FreezeGuard() {
      for (auto& [p, was] : saved) p->trainable = was;
    }
  } guard;
  if (cfg.freeze_gate_span) {
    for (const char* name :
         {"heads.gate.weight", "heads.gate.bias", "heads.span.start", "heads.span.end"}) {
      nn::Param& p = m.params().at(name);
      guard.saved.emplace_back(&p, p.trainable);
      p.trainable = false;
    }
  }

  Rng rng(cfg.seed);
  nn::Adam opt({cfg.lr, 0.9, 0.999, 1e-8, cfg.clip_norm});
  std::vector<size_t> order(train.size());
  std::iota(order.begin(), order.end(), size_t{0});

  training::FitResult res;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(order);
    training::EpochRecord rec;
    rec.epoch = epoch;
    double sum_loss = 0;
    int batches = 0;
    for (size_t begin = 0; begin < order.size(); begin += static_cast<size_t>(cfg.batch_size)) {
      size_t end = std::min(order.size(), begin + static_cast<size_t>(cfg.batch_size));
      nn::Tape tape;
      std::vector<Var> relation_parts;
      for (size_t i = begin; i < end; ++i) {
        const TokenizedInstance& inst = train[order[i]];
        TrendModel::Base base = m.forward_base(tape, inst);
        TriggerSpan span = m.decode_own_span(base, cfg.force_gate_on);
        Var logits = m.relation_logits(tape, base, span);
        Var logp = nn::log_softmax_row(logits);
        relation_parts.push_back(nn::scale(nn::pick(logp, 0, inst.relation_label), -1.0));
      }
      Var lr = nn::mean_scalars(relation_parts);
      Var total = nn::scale(lr, cfg.relation_weight);
      tape.backward(total);
      opt.step(m.params());
      m.params().zero_grad();
      sum_loss += total.scalar();
      rec.train_relation += lr.scalar();
      ++batches;
    }
    rec.train_loss = sum_loss / batches;
    rec.train_relation /= batches;
    training::EvalSnapshot snap = training::evaluate_snapshot(m, dev, cfg.force_gate_on);
    rec.dev_relation_accuracy = snap.relation_accuracy;
    rec.dev_gate_accuracy = snap.gate_accuracy;
    rec.dev_trigger_exact_match = snap.trigger_exact_match;
    res.log.push_back(rec);
  }
  return res;
}

}  // namespace trend::transfer
