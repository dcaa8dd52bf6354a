#include "trend/heads.hpp"

#include <algorithm>

#include "trend/common.hpp"

namespace trend::model {

using nn::Var;

namespace {
constexpr double kInitStd = 0.02;
}

Heads::Heads(const HeadsConfig& cfg, nn::ParamStore& params, Rng& init_rng)
    : cfg_(cfg), params_(&params) {
  if (cfg_.dim <= 0 || cfg_.relations <= 0)
    throw InternalError("heads config needs a positive dim and relation count");
  auto weight = [&](const std::string& name, int r, int c, bool normal) {
    if (nn::Param* p = params_->find(name)) {
      if (p->value.rows != r || p->value.cols != c)
        throw CheckpointError("parameter " + name + " has the wrong shape");
      return;
    }
    nn::Param& p = params_->create(name, r, c);
    if (normal) fill_normal(p.value, init_rng, kInitStd);
  };
  weight("heads.gate.weight", cfg_.dim, 1, true);
  weight("heads.gate.bias", 1, 1, false);
  weight("heads.span.start", cfg_.dim, 1, true);
  weight("heads.span.end", cfg_.dim, 1, true);
  weight("heads.fuse.null", 1, cfg_.dim, true);
  weight("heads.relation.weight", 2 * cfg_.dim, cfg_.relations, true);
  weight("heads.relation.bias", 1, cfg_.relations, false);
}

Var Heads::gate_logit(nn::Tape& tape, Var cls2) const {
  Var logit = nn::matmul(cls2, tape.leaf(params_->at("heads.gate.weight")));
  return nn::add(logit, tape.leaf(params_->at("heads.gate.bias")));
}

Heads::SpanScores Heads::span_scores(nn::Tape& tape, Var hidden,
                                     const std::vector<uint8_t>& dialogue_mask) const {
  if (hidden.rows() != static_cast<int>(dialogue_mask.size()))
    throw InternalError("dialogue mask length disagrees with the hidden states");
  bool any = false;
  for (uint8_t m : dialogue_mask) any = any || m != 0;
  if (!any) throw InputError("no dialogue tokens");
  SpanScores out;
  Var start_logits = nn::matmul(hidden, tape.leaf(params_->at("heads.span.start")));
  Var end_logits = nn::matmul(hidden, tape.leaf(params_->at("heads.span.end")));
  out.start = nn::masked_log_softmax_vec(start_logits, dialogue_mask);
  out.end = nn::masked_log_softmax_vec(end_logits, dialogue_mask);
  return out;
}

Var Heads::fuse(nn::Tape& tape, Var cls1, Var hidden, const corpus::TriggerSpan& span) const {
  if (!span.exists) return tape.leaf(params_->at("heads.fuse.null"));
  if (span.start < 0 || span.end < span.start || span.end >= hidden.rows())
    throw InternalError("fuse span outside the hidden states");
  Var x = nn::slice_rows(hidden, span.start, span.end - span.start + 1);
  Var weights = nn::softmax_rows(nn::matmul_nt(cls1, x));
  return nn::matmul(weights, x);
}

Var Heads::relation_logits(nn::Tape& tape, Var cls1, Var fused) const {
  Var z = nn::concat_cols(cls1, fused);
  Var logits = nn::matmul(z, tape.leaf(params_->at("heads.relation.weight")));
  return nn::add(logits, tape.leaf(params_->at("heads.relation.bias")));
}

corpus::TriggerSpan decode_span(const std::vector<double>& start_scores,
                                const std::vector<double>& end_scores, int window) {
  if (start_scores.empty() || start_scores.size() != end_scores.size())
    throw InternalError("span decoder needs matching non-empty score vectors");
  if (window < 0) throw InternalError("span decoder window must be non-negative");
  int n = static_cast<int>(start_scores.size());
  int start = argmax_index(start_scores);
  int end = start;
  double best = end_scores[static_cast<size_t>(start)];
  for (int j = start + 1; j <= start + window && j < n; ++j) {
    if (end_scores[static_cast<size_t>(j)] > best) {
      best = end_scores[static_cast<size_t>(j)];
      end = j;
    }
  }
  return corpus::TriggerSpan::of(start, end);
}

int argmax_index(const std::vector<double>& scores) {
  if (scores.empty()) throw InternalError("argmax over an empty score vector");
  int best = 0;
  for (int i = 1; i < static_cast<int>(scores.size()); ++i)
    if (scores[static_cast<size_t>(i)] > scores[static_cast<size_t>(best)]) best = i;
  return best;
}

}  // namespace trend::model
