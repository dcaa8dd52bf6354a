#include "trend/evaluation.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <set>

#include "trend/common.hpp"

namespace trend::evaluation {

double micro_f1(const std::vector<RelationPair>& preds, const std::vector<RelationPair>& golds) {
  std::set<RelationPair> pred_set;
  for (const auto& p : preds) {
    if (!pred_set.insert(p).second)
      throw InputError("duplicate prediction for instance " + p.first + " relation " +
                       std::to_string(p.second));
  }
  std::set<RelationPair> gold_set(golds.begin(), golds.end());
  if (pred_set.empty() && gold_set.empty()) return 0.0;
  size_t hits = 0;
  for (const auto& p : pred_set) hits += gold_set.count(p);
  if (pred_set.empty() || gold_set.empty()) return 0.0;
  double precision = static_cast<double>(hits) / static_cast<double>(pred_set.size());
  double recall = static_cast<double>(hits) / static_cast<double>(gold_set.size());
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

AccuracyMacro accuracy_and_macro_f(const std::vector<int>& preds, const std::vector<int>& golds,
                                   const RelationOntology& ontology, int granularity) {
  if (preds.size() != golds.size())
    throw InternalError("prediction and gold label lists differ in length");
  if (!ontology.has_coarse(granularity))
    throw InputError("ontology has no " + std::to_string(granularity) + "-class grouping");
  AccuracyMacro out;
  if (preds.empty()) return out;

  size_t correct = 0;
  std::map<std::string, std::array<size_t, 3>> stats;  // class -> tp, fp, fn
  std::set<std::string> gold_classes;
  for (size_t i = 0; i < preds.size(); ++i) {
    const std::string& p = ontology.coarse_of(granularity, preds[i]);
    const std::string& g = ontology.coarse_of(granularity, golds[i]);
    gold_classes.insert(g);
    if (p == g) {
      ++correct;
      ++stats[g][0];
    } else {
      ++stats[p][1];
      ++stats[g][2];
    }
  }
  out.accuracy = static_cast<double>(correct) / static_cast<double>(preds.size());
  double sum = 0.0;
  for (const std::string& c : gold_classes) {
    const auto& s = stats[c];
    double tp = static_cast<double>(s[0]);
    double precision = tp + s[1] > 0 ? tp / (tp + s[1]) : 0.0;
    double recall = tp + s[2] > 0 ? tp / (tp + s[2]) : 0.0;
    sum += precision + recall > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
  }
  out.macro_f = sum / static_cast<double>(gold_classes.size());
  return out;
}

SeenUnseenF1 seen_unseen_f1(const std::vector<RelationPair>& preds,
                            const std::vector<RelationPair>& golds,
                            const RelationOntology& ontology) {
  if (!ontology.has_partition())
    throw InputError("ontology has no cross-dataset map to induce a seen/unseen partition");
  auto filter = [&](const std::vector<RelationPair>& pairs, bool want_seen) {
    std::vector<RelationPair> out;
    for (const auto& p : pairs)
      if (ontology.is_seen(p.second) == want_seen) out.push_back(p);
    return out;
  };
  SeenUnseenF1 out;
  auto seen_golds = filter(golds, true);
  auto unseen_golds = filter(golds, false);
  out.seen_empty = seen_golds.empty();
  out.unseen_empty = unseen_golds.empty();
  out.seen = out.seen_empty ? 0.0 : micro_f1(filter(preds, true), seen_golds);
  out.unseen = out.unseen_empty ? 0.0 : micro_f1(filter(preds, false), unseen_golds);
  return out;
}

double trigger_exact_match(const std::vector<corpus::TriggerSpan>& preds,
                           const std::vector<std::vector<corpus::TriggerSpan>>& alternatives) {
  if (preds.size() != alternatives.size())
    throw InternalError("prediction and alternative lists differ in length");
  if (preds.empty()) return 0.0;
  size_t hits = 0;
  for (size_t i = 0; i < preds.size(); ++i) {
    if (alternatives[i].empty())
      throw InternalError("instance " + std::to_string(i) + " has no gold alternatives");
    if (!preds[i].exists) continue;
    for (const auto& alt : alternatives[i]) {
      if (preds[i] == alt) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

}  // namespace trend::evaluation
