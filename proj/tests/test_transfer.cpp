#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "trend/common.hpp"
#include "trend/corpus.hpp"
#include "trend/model.hpp"
#include "trend/training.hpp"
#include "trend/transfer.hpp"

using namespace trend;
using corpus::TokenizedInstance;
using corpus::TriggerSpan;
using model::TrendModel;
using transfer::FineTuneConfig;

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

TokenizedInstance target_inst(int topic_token, int relation, const std::string& id) {
  TokenizedInstance inst;
  inst.example_id = id;
  inst.token_ids = {2, topic_token, 4, 3, 5, 2, 6};
  inst.sep_pos = 3;
  inst.cls2_pos = 5;
  inst.dialogue_mask = {0, 1, 1, 0, 0, 0, 0};
  inst.relation_label = relation;
  return inst;
}

std::vector<TokenizedInstance> target_corpus(int relations) {
  std::vector<TokenizedInstance> out;
  for (int k = 0; k < relations; ++k)
    out.push_back(target_inst(7 + k, k, "tgt" + std::to_string(k)));
  return out;
}

std::map<std::string, uint64_t> checksums(const nn::ParamStore& store) {
  std::map<std::string, uint64_t> out;
  for (const nn::Param* p : store.all()) out[p->name] = store.checksum(p->name);
  return out;
}

bool is_relation_head(const std::string& name) {
  return name.rfind("heads.relation.", 0) == 0;
}

}  // namespace

TEST_CASE("relation head replacement keeps every other tensor byte-identical") {
  TrendModel m(unit_model_config(5), 11);
  auto before = checksums(m.params());

  transfer::reinit_relation_head(m.params(), 8, 13, 21);
  auto after = checksums(m.params());

  REQUIRE(before.size() == after.size());
  for (const auto& [name, sum] : before) {
    if (is_relation_head(name)) continue;
    INFO(name);
    CHECK(after.at(name) == sum);
  }
  CHECK(m.params().at("heads.relation.weight").value.rows == 16);
  CHECK(m.params().at("heads.relation.weight").value.cols == 13);
  CHECK(m.params().at("heads.relation.bias").value.rows == 1);
  CHECK(m.params().at("heads.relation.bias").value.cols == 13);
  CHECK(after.at("heads.relation.weight") != before.at("heads.relation.weight"));
}

TEST_CASE("relation head replacement is deterministic in its seed") {
  TrendModel a(unit_model_config(5), 11);
  TrendModel b(unit_model_config(5), 11);
  transfer::reinit_relation_head(a.params(), 8, 13, 21);
  transfer::reinit_relation_head(b.params(), 8, 13, 21);
  CHECK(a.params().checksum("heads.relation.weight") ==
        b.params().checksum("heads.relation.weight"));

  TrendModel c(unit_model_config(5), 11);
  transfer::reinit_relation_head(c.params(), 8, 13, 22);
  CHECK(a.params().checksum("heads.relation.weight") !=
        c.params().checksum("heads.relation.weight"));
}

TEST_CASE("relation head replacement validates its arguments") {
  TrendModel m(unit_model_config(5), 11);
  CHECK_THROWS_AS(transfer::reinit_relation_head(m.params(), 8, 0, 1), InputError);
  CHECK_THROWS_AS(transfer::reinit_relation_head(m.params(), 0, 13, 1), InputError);
}

TEST_CASE("a replaced head loads into a target-sized model") {
  TrendModel source(unit_model_config(5), 11);
  transfer::reinit_relation_head(source.params(), 8, 13, 21);

  TrendModel target(unit_model_config(13), source.params().clone(), 99);
  auto pred = target.predict(target_inst(7, 0, "t"));
  CHECK(pred.relation_scores.size() == 13);
  CHECK(target.params().checksum("encoder.embed.token") ==
        source.params().checksum("encoder.embed.token"));
}

TEST_CASE("fine-tuning rejects trigger-annotated targets") {
  TrendModel m(unit_model_config(4), 11);
  FineTuneConfig cfg;
  cfg.epochs = 1;

  auto gate_on = target_corpus(4);
  gate_on[0].gate_label = 1;
  gate_on[0].gold_trigger = TriggerSpan::of(1, 1);
  gate_on[0].alt_triggers = {TriggerSpan::of(1, 1)};
  CHECK_THROWS_WITH_AS(transfer::fine_tune(m, gate_on, {}, cfg),
                       "train instance tgt0: target corpus carries trigger annotations",
                       InputError);

  auto stray_span = target_corpus(4);
  stray_span[1].gold_trigger = TriggerSpan::of(1, 1);
  CHECK_THROWS_AS(transfer::fine_tune(m, stray_span, {}, cfg), InputError);

  auto stray_alts = target_corpus(4);
  stray_alts[2].alt_triggers = {TriggerSpan::of(2, 2)};
  CHECK_THROWS_AS(transfer::fine_tune(m, target_corpus(4), stray_alts, cfg), InputError);
}

TEST_CASE("fine-tuning validates sizes and labels") {
  TrendModel m(unit_model_config(4), 11);
  FineTuneConfig cfg;
  CHECK_THROWS_AS(transfer::fine_tune(m, {}, {}, cfg), InputError);

  FineTuneConfig zero = cfg;
  zero.epochs = 0;
  CHECK_THROWS_AS(transfer::fine_tune(m, target_corpus(4), {}, zero), InputError);

  auto bad = target_corpus(4);
  bad[0].relation_label = 4;
  CHECK_THROWS_AS(transfer::fine_tune(m, bad, {}, cfg), InputError);
}

TEST_CASE("fine-tuning leaves gate and span tensors untouched") {
  const char* fixed[] = {"heads.gate.weight", "heads.gate.bias", "heads.span.start",
                         "heads.span.end"};
  for (bool freeze : {true, false}) {
    TrendModel m(unit_model_config(4), 11);
    auto data = target_corpus(4);
    auto before = checksums(m.params());

    FineTuneConfig cfg;
    cfg.lr = 0.01;
    cfg.epochs = 3;
    cfg.freeze_gate_span = freeze;
    transfer::fine_tune(m, data, data, cfg);

    for (const char* name : fixed) {
      INFO(name, " freeze=", freeze);
      CHECK(m.params().checksum(name) == before.at(name));
    }
    CHECK(m.params().checksum("heads.relation.weight") !=
          before.at("heads.relation.weight"));
    CHECK(m.params().at("heads.gate.weight").trainable);
  }
}

TEST_CASE("fine-tuning optimizes the relation loss only and overfits the target") {
  TrendModel source(unit_model_config(6), 11);
  transfer::reinit_relation_head(source.params(), 8, 4, 33);
  TrendModel m(unit_model_config(4), source.params().clone(), 11);

  auto data = target_corpus(4);
  auto before = checksums(m.params());

  FineTuneConfig cfg;
  cfg.lr = 0.02;
  cfg.epochs = 60;
  auto result = transfer::fine_tune(m, data, data, cfg);

  REQUIRE(result.log.size() == 60);
  CHECK(result.log.back().dev_relation_accuracy == 1.0);
  CHECK(result.log.back().train_loss < result.log.front().train_loss);
  for (const auto& rec : result.log) {
    CHECK(rec.train_trigger == 0.0);
    CHECK(rec.train_binary == 0.0);
  }
  CHECK(m.params().checksum("heads.gate.weight") == before.at("heads.gate.weight"));
  CHECK(m.params().checksum("heads.gate.bias") == before.at("heads.gate.bias"));
  CHECK(m.params().checksum("heads.span.start") == before.at("heads.span.start"));
  CHECK(m.params().checksum("heads.span.end") == before.at("heads.span.end"));
}

TEST_CASE("fine-tuning is deterministic in the seed") {
  auto run = [] {
    TrendModel m(unit_model_config(4), 11);
    auto data = target_corpus(4);
    FineTuneConfig cfg;
    cfg.epochs = 4;
    return transfer::fine_tune(m, data, data, cfg);
  };
  auto a = run();
  auto b = run();
  REQUIRE(a.log.size() == b.log.size());
  for (size_t i = 0; i < a.log.size(); ++i) {
    CHECK(a.log[i].train_loss == b.log[i].train_loss);
    CHECK(a.log[i].dev_relation_accuracy == b.log[i].dev_relation_accuracy);
  }
}
