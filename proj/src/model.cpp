#include "trend/model.hpp"

#include "trend/common.hpp"

namespace trend::model {

using nn::Var;

TrendModel::TrendModel(const ModelConfig& cfg, uint64_t seed)
    : TrendModel(cfg, std::make_unique<nn::ParamStore>(), seed) {}

TrendModel::TrendModel(const ModelConfig& cfg, std::unique_ptr<nn::ParamStore> params,
                       uint64_t seed)
    : cfg_(cfg), params_(std::move(params)) {
  if (cfg_.relations <= 0) throw InternalError("model config needs a relation count");
  Rng init_rng(seed);
  encoder_ = std::make_unique<Encoder>(cfg_.encoder, *params_, init_rng);
  HeadsConfig hc{cfg_.encoder.dim, cfg_.relations};
  heads_ = std::make_unique<Heads>(hc, *params_, init_rng);
}

TrendModel::Base TrendModel::forward_base(nn::Tape& tape,
                                          const corpus::TokenizedInstance& inst) const {
  Base base;
  base.enc = encoder_->encode(tape, inst);
  base.gate_logit = heads_->gate_logit(tape, base.enc.cls2);
  base.span = heads_->span_scores(tape, base.enc.hidden, inst.dialogue_mask);
  return base;
}

Var TrendModel::relation_logits(nn::Tape& tape, const Base& base,
                                const corpus::TriggerSpan& span) const {
  Var fused = heads_->fuse(tape, base.enc.cls1, base.enc.hidden, span);
  return heads_->relation_logits(tape, base.enc.cls1, fused);
}

corpus::TriggerSpan TrendModel::decode_own_span(const Base& base, bool force_gate_on) const {
  bool gate = force_gate_on || decide_gate(base.gate_logit.val()(0, 0));
  if (!gate) return corpus::TriggerSpan::none();
  return decode_span(base.span.start.val().a, base.span.end.val().a, cfg_.span_window);
}

TrendModel::Prediction TrendModel::predict(const corpus::TokenizedInstance& inst,
                                           bool force_gate_on) const {
  nn::Tape tape;
  Base base = forward_base(tape, inst);
  Prediction out;
  out.gate_logit = base.gate_logit.val()(0, 0);
  out.gate = force_gate_on || decide_gate(out.gate_logit);
  out.trigger = decode_own_span(base, force_gate_on);
  Var logits = relation_logits(tape, base, out.trigger);
  out.relation_scores = logits.val().a;
  out.relation = argmax_index(out.relation_scores);
  return out;
}

}  // namespace trend::model
