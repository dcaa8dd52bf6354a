#include <map>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "trend/common.hpp"
#include "trend/corpus.hpp"
#include "trend/evaluation.hpp"
#include "trend/ontology.hpp"

using namespace trend;
using corpus::TriggerSpan;
using evaluation::RelationOntology;
using evaluation::RelationPair;

namespace {

const char* kPartitionedOntology = R"({
  "labels": ["alpha", "beta", "gamma", "delta"],
  "coarse": {"2": {"alpha": "left", "beta": "left", "gamma": "right", "delta": "right"}},
  "cross_map": {"alpha": "x:alpha", "beta": "x:beta", "gamma": null, "delta": null}
})";

}  // namespace

TEST_CASE("micro f1 counts pair hits") {
  std::vector<RelationPair> preds = {{"a", 1}, {"a", 2}, {"b", 3}};
  std::vector<RelationPair> golds = {{"a", 1}, {"b", 3}, {"b", 4}, {"c", 1}};
  CHECK(evaluation::micro_f1(preds, golds) == doctest::Approx(4.0 / 7.0).epsilon(1e-12));
}

TEST_CASE("micro f1 edge cases") {
  CHECK(evaluation::micro_f1({}, {}) == 0.0);
  CHECK(evaluation::micro_f1({}, {{"a", 1}}) == 0.0);
  CHECK(evaluation::micro_f1({{"a", 1}}, {}) == 0.0);
  CHECK(evaluation::micro_f1({{"a", 1}}, {{"b", 2}}) == 0.0);
  CHECK(evaluation::micro_f1({{"a", 1}}, {{"a", 1}}) == 1.0);
}

TEST_CASE("micro f1 rejects duplicate predictions and dedupes golds") {
  std::vector<RelationPair> dup = {{"a", 1}, {"a", 1}};
  CHECK_THROWS_AS(evaluation::micro_f1(dup, {{"a", 1}}), InputError);
  CHECK(evaluation::micro_f1({{"a", 1}}, dup) == 1.0);
}

TEST_CASE("accuracy and macro f over fine labels") {
  RelationOntology ont = RelationOntology::from_labels({"r0", "r1", "r2", "r3"});
  std::vector<int> preds = {0, 1, 1, 3};
  std::vector<int> golds = {0, 1, 2, 3};
  auto out = evaluation::accuracy_and_macro_f(preds, golds, ont, 4);
  CHECK(out.accuracy == 0.75);
  CHECK(out.macro_f == doctest::Approx((1.0 + 2.0 / 3.0 + 0.0 + 1.0) / 4.0).epsilon(1e-12));
}

TEST_CASE("macro f averages only classes present in the gold labels") {
  RelationOntology ont = RelationOntology::from_labels({"r0", "r1", "r2"});
  std::vector<int> preds = {2, 2};
  std::vector<int> golds = {0, 0};
  auto out = evaluation::accuracy_and_macro_f(preds, golds, ont, 3);
  CHECK(out.accuracy == 0.0);
  CHECK(out.macro_f == 0.0);

  preds = {0, 2};
  auto half = evaluation::accuracy_and_macro_f(preds, golds, ont, 3);
  CHECK(half.accuracy == 0.5);
  CHECK(half.macro_f == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("coarse grouping scores the mapped classes") {
  RelationOntology ont = RelationOntology::load_json(kPartitionedOntology);
  std::vector<int> preds = {0, 2, 3};
  std::vector<int> golds = {1, 3, 2};
  auto fine = evaluation::accuracy_and_macro_f(preds, golds, ont, 4);
  auto coarse = evaluation::accuracy_and_macro_f(preds, golds, ont, 2);
  CHECK(fine.accuracy == 0.0);
  CHECK(coarse.accuracy == 1.0);
  CHECK(coarse.macro_f == 1.0);
}

TEST_CASE("coarsening never lowers accuracy") {
  RelationOntology ont = RelationOntology::load_json(kPartitionedOntology);
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    int n = 1 + static_cast<int>(rng.integer(20));
    std::vector<int> preds(static_cast<size_t>(n)), golds(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      preds[static_cast<size_t>(i)] = static_cast<int>(rng.integer(4));
      golds[static_cast<size_t>(i)] = static_cast<int>(rng.integer(4));
    }
    auto fine = evaluation::accuracy_and_macro_f(preds, golds, ont, 4);
    auto coarse = evaluation::accuracy_and_macro_f(preds, golds, ont, 2);
    CHECK(coarse.accuracy >= fine.accuracy);
  }
}

TEST_CASE("accuracy and macro f agree with a hand-rolled oracle") {
  RelationOntology ont = RelationOntology::from_labels({"r0", "r1", "r2", "r3", "r4"});
  Rng rng(78);
  for (int trial = 0; trial < 100; ++trial) {
    int n = 1 + static_cast<int>(rng.integer(20));
    std::vector<int> preds(static_cast<size_t>(n)), golds(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      preds[static_cast<size_t>(i)] = static_cast<int>(rng.integer(5));
      golds[static_cast<size_t>(i)] = static_cast<int>(rng.integer(5));
    }

    int correct = 0;
    std::map<int, int> tp, fp, fn;
    std::set<int> gold_classes;
    for (int i = 0; i < n; ++i) {
      int p = preds[static_cast<size_t>(i)], g = golds[static_cast<size_t>(i)];
      gold_classes.insert(g);
      if (p == g) {
        ++correct;
        ++tp[g];
      } else {
        ++fp[p];
        ++fn[g];
      }
    }
    double f_sum = 0.0;
    for (int c : gold_classes) {
      double denom = 2.0 * tp[c] + fp[c] + fn[c];
      f_sum += denom > 0 ? 2.0 * tp[c] / denom : 0.0;
    }

    auto out = evaluation::accuracy_and_macro_f(preds, golds, ont, 5);
    CHECK(out.accuracy == doctest::Approx(static_cast<double>(correct) / n).epsilon(1e-12));
    CHECK(out.macro_f ==
          doctest::Approx(f_sum / static_cast<double>(gold_classes.size())).epsilon(1e-12));
  }
}

TEST_CASE("metric calls reject malformed requests") {
  RelationOntology ont = RelationOntology::from_labels({"r0", "r1"});
  CHECK_THROWS_AS(evaluation::accuracy_and_macro_f({0}, {0, 1}, ont, 2), InternalError);
  CHECK_THROWS_AS(evaluation::accuracy_and_macro_f({0}, {1}, ont, 7), InputError);
  auto empty = evaluation::accuracy_and_macro_f({}, {}, ont, 2);
  CHECK(empty.accuracy == 0.0);
  CHECK(empty.macro_f == 0.0);
}

TEST_CASE("seen and unseen slices score separately") {
  RelationOntology ont = RelationOntology::load_json(kPartitionedOntology);
  std::vector<RelationPair> golds = {{"a", 0}, {"c", 1}, {"b", 2}};
  std::vector<RelationPair> preds = {{"a", 0}, {"b", 2}, {"c", 3}};
  auto out = evaluation::seen_unseen_f1(preds, golds, ont);
  CHECK_FALSE(out.seen_empty);
  CHECK_FALSE(out.unseen_empty);
  CHECK(out.seen == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(out.unseen == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("an empty gold slice is flagged instead of scored") {
  RelationOntology ont = RelationOntology::load_json(kPartitionedOntology);
  std::vector<RelationPair> golds = {{"a", 0}};
  std::vector<RelationPair> preds = {{"a", 2}};
  auto out = evaluation::seen_unseen_f1(preds, golds, ont);
  CHECK_FALSE(out.seen_empty);
  CHECK(out.unseen_empty);
  CHECK(out.seen == 0.0);
  CHECK(out.unseen == 0.0);
}

TEST_CASE("seen-unseen scoring needs a partition") {
  RelationOntology ont = RelationOntology::from_labels({"r0", "r1"});
  CHECK_THROWS_AS(evaluation::seen_unseen_f1({{"a", 0}}, {{"a", 0}}, ont), InputError);
}

TEST_CASE("trigger exact match accepts any annotated alternative") {
  std::vector<TriggerSpan> preds = {TriggerSpan::of(3, 4), TriggerSpan::of(3, 5),
                                    TriggerSpan::none(), TriggerSpan::of(0, 0)};
  std::vector<std::vector<TriggerSpan>> alts = {{TriggerSpan::of(3, 5)},
                                                {TriggerSpan::of(3, 5)},
                                                {TriggerSpan::of(1, 1)},
                                                {TriggerSpan::of(2, 2), TriggerSpan::of(0, 0)}};
  CHECK(evaluation::trigger_exact_match(preds, alts) == 0.5);
  CHECK(evaluation::trigger_exact_match({}, {}) == 0.0);
}

TEST_CASE("trigger exact match validates its inputs") {
  std::vector<TriggerSpan> preds = {TriggerSpan::of(1, 1)};
  CHECK_THROWS_AS(evaluation::trigger_exact_match(preds, {}), InternalError);
  CHECK_THROWS_AS(evaluation::trigger_exact_match(preds, {{}}), InternalError);
}
