#include <vector>

#include "doctest.h"
#include "trend/common.hpp"
#include "trend/corpus.hpp"
#include "trend/model.hpp"
#include "trend/training.hpp"

using namespace trend;
using corpus::TokenizedInstance;
using corpus::TriggerSpan;
using model::TrendModel;
using training::ScheduleConfig;
using training::TrainConfig;

namespace {

model::ModelConfig unit_model_config(int relations, int vocab = 16) {
  model::ModelConfig cfg;
  cfg.encoder.preset = "unit";
  cfg.encoder.layers = 1;
  cfg.encoder.heads = 2;
  cfg.encoder.dim = 8;
  cfg.encoder.ffn_dim = 16;
  cfg.encoder.max_len = 16;
  cfg.encoder.vocab_size = vocab;
  cfg.relations = relations;
  cfg.span_window = 4;
  return cfg;
}

// Layout: [CLS] t u [SEP] s [CLS] o  with the dialogue at positions 1..2.
TokenizedInstance make_inst(int topic_token, int relation, bool with_trigger,
                            const std::string& id) {
  TokenizedInstance inst;
  inst.example_id = id;
  inst.token_ids = {2, topic_token, 4, 3, 5, 2, 6};
  inst.sep_pos = 3;
  inst.cls2_pos = 5;
  inst.dialogue_mask = {0, 1, 1, 0, 0, 0, 0};
  inst.relation_label = relation;
  if (with_trigger) {
    inst.gate_label = 1;
    inst.gold_trigger = TriggerSpan::of(1, 1);
    inst.alt_triggers = {TriggerSpan::of(1, 1)};
  }
  return inst;
}

std::vector<TokenizedInstance> overfit_corpus(int relations) {
  std::vector<TokenizedInstance> out;
  for (int k = 0; k < relations; ++k)
    out.push_back(make_inst(7 + k, k, k % 2 == 0, "ex" + std::to_string(k)));
  return out;
}

}  // namespace

TEST_CASE("loss composition reproduces the published weighting exactly") {
  training::LossWeights w;
  CHECK(w.trigger == 0.3);
  CHECK(w.relation == 1.0);
  CHECK(w.binary == 1.0);
  CHECK(training::combine_losses(w, 2.0, 1.0, 0.5) == 2.1);
  CHECK(training::combine_losses(w, 1.0, 0.0, 0.0) == 0.3);
  CHECK(training::combine_losses(w, 0.0, 1.0, 0.0) == 1.0);
  CHECK(training::combine_losses(w, 0.0, 0.0, 1.0) == 1.0);
  CHECK(training::combine_losses(w, 0.0, 0.0, 0.0) == 0.0);
}

TEST_CASE("loss composition is the left-to-right weighted sum, bit for bit") {
  training::LossWeights w{0.3, 1.0, 1.0};
  Rng rng(13);
  for (int i = 0; i < 200; ++i) {
    double t = rng.uniform() * 10.0;
    double r = rng.uniform() * 10.0;
    double b = rng.uniform() * 10.0;
    CHECK(training::combine_losses(w, t, r, b) == w.trigger * t + w.relation * r + w.binary * b);
  }
}

TEST_CASE("loss composition is linear in each weight at machine precision") {
  Rng rng(29);
  for (int i = 0; i < 200; ++i) {
    training::LossWeights w{rng.uniform(), rng.uniform(), rng.uniform()};
    double t = rng.uniform() * 4.0;
    double r = rng.uniform() * 4.0;
    double b = rng.uniform() * 4.0;
    training::LossWeights doubled{2.0 * w.trigger, 2.0 * w.relation, 2.0 * w.binary};
    CHECK(training::combine_losses(doubled, t, r, b) ==
          2.0 * training::combine_losses(w, t, r, b));
    training::LossWeights halved{0.5 * w.trigger, 0.5 * w.relation, 0.5 * w.binary};
    CHECK(training::combine_losses(halved, t, r, b) ==
          0.5 * training::combine_losses(w, t, r, b));
  }
}

TEST_CASE("a zeroed weight removes that term from the composition") {
  Rng rng(31);
  for (int i = 0; i < 200; ++i) {
    double t = rng.uniform() * 4.0;
    double r = rng.uniform() * 4.0;
    double b = rng.uniform() * 4.0;
    training::LossWeights no_trigger{0.0, 1.0, 1.0};
    training::LossWeights all{0.3, 1.0, 1.0};
    CHECK(training::combine_losses(no_trigger, t, r, b) ==
          training::combine_losses(all, 0.0, r, b));
  }
}

TEST_CASE("scheduled selection consumes exactly two draws per instance") {
  TrendModel m(unit_model_config(3), 11);
  auto gate_on = make_inst(7, 0, true, "on");
  auto gate_off = make_inst(8, 1, false, "off");
  ScheduleConfig sched;

  for (const auto& inst : {gate_on, gate_off}) {
    nn::Tape tape;
    auto base = m.forward_base(tape, inst);
    Rng used(9), reference(9);
    training::scheduled_select(used, sched, inst, m, base);
    reference.bernoulli(0.5);
    reference.bernoulli(0.5);
    CHECK(used.uniform() == reference.uniform());
  }
}

TEST_CASE("full teacher forcing always picks gold") {
  TrendModel m(unit_model_config(3), 11);
  ScheduleConfig sched{1.0, 1.0};
  Rng rng(5);

  auto on = make_inst(7, 0, true, "on");
  nn::Tape tape1;
  auto base1 = m.forward_base(tape1, on);
  auto sel = training::scheduled_select(rng, sched, on, m, base1);
  CHECK(sel.gate_on);
  CHECK(sel.used_gold_gate);
  CHECK(sel.used_gold_trigger);
  CHECK(sel.span == on.gold_trigger);

  auto off = make_inst(8, 1, false, "off");
  nn::Tape tape2;
  auto base2 = m.forward_base(tape2, off);
  auto sel_off = training::scheduled_select(rng, sched, off, m, base2);
  CHECK_FALSE(sel_off.gate_on);
  CHECK_FALSE(sel_off.span.exists);
}

TEST_CASE("zero teacher forcing follows the model") {
  TrendModel m(unit_model_config(3), 11);
  ScheduleConfig sched{0.0, 0.0};
  Rng rng(5);

  auto inst = make_inst(7, 0, true, "on");
  nn::Tape tape;
  auto base = m.forward_base(tape, inst);
  auto sel = training::scheduled_select(rng, sched, inst, m, base);
  CHECK_FALSE(sel.used_gold_gate);
  CHECK_FALSE(sel.used_gold_trigger);
  bool own_gate = model::decide_gate(base.gate_logit.val()(0, 0));
  CHECK(sel.gate_on == own_gate);
  if (own_gate) {
    TriggerSpan own = model::decode_span(base.span.start.val().a, base.span.end.val().a,
                                         m.config().span_window);
    CHECK(sel.span == own);
  }
}

TEST_CASE("gold choice without a gold span falls back to the model span") {
  TrendModel m(unit_model_config(3), 11);
  ScheduleConfig sched{1.0, 1.0};
  Rng rng(5);

  auto inst = make_inst(7, 0, false, "odd");
  inst.gate_label = 1;
  nn::Tape tape;
  auto base = m.forward_base(tape, inst);
  auto sel = training::scheduled_select(rng, sched, inst, m, base);
  CHECK(sel.gate_on);
  CHECK_FALSE(sel.used_gold_trigger);
  TriggerSpan own = model::decode_span(base.span.start.val().a, base.span.end.val().a,
                                       m.config().span_window);
  CHECK(sel.span == own);
}

TEST_CASE("teacher forcing rate is honored over many draws") {
  TrendModel m(unit_model_config(3), 11);
  auto inst = make_inst(7, 0, true, "on");
  nn::Tape tape;
  auto base = m.forward_base(tape, inst);

  training::SamplingCounters gate_counts;
  Rng rng_a(42);
  ScheduleConfig gate_rate{0.7, 0.7};
  for (int i = 0; i < 10000; ++i)
    training::scheduled_select(rng_a, gate_rate, inst, m, base, &gate_counts);
  CHECK(gate_counts.gate_gold + gate_counts.gate_model == 10000);
  CHECK(gate_counts.gate_gold >= 6850);
  CHECK(gate_counts.gate_gold <= 7150);

  training::SamplingCounters trig_counts;
  Rng rng_b(43);
  ScheduleConfig trig_rate{1.0, 0.7};
  for (int i = 0; i < 10000; ++i)
    training::scheduled_select(rng_b, trig_rate, inst, m, base, &trig_counts);
  CHECK(trig_counts.trigger_gold + trig_counts.trigger_model == 10000);
  CHECK(trig_counts.trigger_gold >= 6850);
  CHECK(trig_counts.trigger_gold <= 7150);
}

TEST_CASE("fit rejects malformed requests") {
  TrendModel m(unit_model_config(3), 11);
  auto train = overfit_corpus(3);
  TrainConfig cfg;

  CHECK_THROWS_AS(training::fit(m, {}, train, cfg), InputError);

  TrainConfig zero_epochs = cfg;
  zero_epochs.epochs = 0;
  CHECK_THROWS_AS(training::fit(m, train, train, zero_epochs), InputError);

  TrainConfig zero_batch = cfg;
  zero_batch.batch_size = 0;
  CHECK_THROWS_AS(training::fit(m, train, train, zero_batch), InputError);

  auto bad_label = train;
  bad_label[0].relation_label = 3;
  CHECK_THROWS_AS(training::fit(m, bad_label, train, cfg), InputError);
  CHECK_THROWS_AS(training::fit(m, train, bad_label, cfg), InputError);

  auto bad_gate = train;
  bad_gate[0].gate_label = 1;
  bad_gate[0].gold_trigger = TriggerSpan::none();
  CHECK_THROWS_AS(training::fit(m, bad_gate, train, cfg), InputError);

  TrainConfig bad_lr = cfg;
  bad_lr.lr = 0.0;
  CHECK_THROWS_AS(training::fit(m, train, train, bad_lr), InputError);

  TrainConfig bad_weight = cfg;
  bad_weight.weights.trigger = -0.1;
  CHECK_THROWS_AS(training::fit(m, train, train, bad_weight), InputError);

  TrainConfig bad_tf = cfg;
  bad_tf.schedule.tf_trigger = 1.5;
  CHECK_THROWS_AS(training::fit(m, train, train, bad_tf), InputError);
  bad_tf.schedule.tf_trigger = -0.5;
  CHECK_THROWS_AS(training::fit(m, train, train, bad_tf), InputError);
}

TEST_CASE("full teacher forcing never routes a model decision into the loss") {
  TrendModel m(unit_model_config(4), 17);
  auto data = overfit_corpus(4);
  TrainConfig cfg;
  cfg.epochs = 4;
  cfg.schedule = ScheduleConfig{1.0, 1.0};

  auto result = training::fit(m, data, data, cfg);
  for (const auto& rec : result.log) {
    CHECK(rec.sampling.gate_model == 0);
    CHECK(rec.sampling.trigger_model == 0);
    CHECK(rec.sampling.gate_gold == static_cast<long>(data.size()));
  }
}

TEST_CASE("joint training overfits a small corpus") {
  TrendModel m(unit_model_config(6), 11);
  auto data = overfit_corpus(6);
  TrainConfig cfg;
  cfg.lr = 0.02;
  cfg.epochs = 80;
  cfg.batch_size = 8;

  auto result = training::fit(m, data, data, cfg);
  REQUIRE(result.log.size() == 80);
  const auto& last = result.log.back();
  CHECK(last.dev_relation_accuracy == 1.0);
  CHECK(last.dev_gate_accuracy == 1.0);
  CHECK(last.dev_trigger_exact_match == 1.0);
  CHECK(last.train_loss < result.log.front().train_loss);
}

TEST_CASE("per-epoch loss parts recompose into the recorded total") {
  TrendModel m(unit_model_config(4), 19);
  auto data = overfit_corpus(4);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 8;  // one batch per epoch, so means match the batch values

  auto result = training::fit(m, data, data, cfg);
  for (const auto& rec : result.log) {
    CHECK(rec.train_loss == training::combine_losses(cfg.weights, rec.train_trigger,
                                                     rec.train_relation, rec.train_binary));
    CHECK(rec.sampling.gate_gold + rec.sampling.gate_model ==
          static_cast<long>(data.size()));
  }
}

TEST_CASE("training is deterministic in the seed") {
  auto run = [](uint64_t model_seed) {
    TrendModel m(unit_model_config(4), model_seed);
    auto data = overfit_corpus(4);
    TrainConfig cfg;
    cfg.epochs = 5;
    return training::fit(m, data, data, cfg);
  };
  auto a = run(11);
  auto b = run(11);
  REQUIRE(a.log.size() == b.log.size());
  for (size_t i = 0; i < a.log.size(); ++i) {
    CHECK(a.log[i].train_loss == b.log[i].train_loss);
    CHECK(a.log[i].train_trigger == b.log[i].train_trigger);
    CHECK(a.log[i].train_relation == b.log[i].train_relation);
    CHECK(a.log[i].train_binary == b.log[i].train_binary);
    CHECK(a.log[i].dev_relation_accuracy == b.log[i].dev_relation_accuracy);
    CHECK(a.log[i].dev_gate_accuracy == b.log[i].dev_gate_accuracy);
    CHECK(a.log[i].dev_trigger_exact_match == b.log[i].dev_trigger_exact_match);
    CHECK(a.log[i].sampling.gate_gold == b.log[i].sampling.gate_gold);
    CHECK(a.log[i].sampling.trigger_gold == b.log[i].sampling.trigger_gold);
  }
}

TEST_CASE("evaluation snapshots cover gate, relation, and trigger metrics") {
  TrendModel m(unit_model_config(3), 11);
  auto data = overfit_corpus(3);

  auto empty = training::evaluate_snapshot(m, {});
  CHECK(empty.relation_accuracy == 0.0);
  CHECK(empty.gate_accuracy == 0.0);
  CHECK(empty.trigger_exact_match == 0.0);
  CHECK(empty.trigger_instances == 0);

  auto snap = training::evaluate_snapshot(m, data);
  CHECK(snap.trigger_instances == 2);
  CHECK(snap.relation_accuracy >= 0.0);
  CHECK(snap.relation_accuracy <= 1.0);

  auto forced = training::evaluate_snapshot(m, data, true);
  double on_fraction = 2.0 / 3.0;
  CHECK(forced.gate_accuracy == doctest::Approx(on_fraction).epsilon(1e-12));
}
