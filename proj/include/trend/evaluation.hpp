#pragma once

#include <string>
#include <utility>
#include <vector>

#include "trend/corpus.hpp"
#include "trend/ontology.hpp"

namespace trend::evaluation {

// A scored (instance id, relation id) pair. Golds may repeat an id with
// different relations (multi-label examples); predictions must not repeat
// the same pair.
using RelationPair = std::pair<std::string, int>;

// Set-overlap micro F1 over (id, relation) pairs. Both empty scores 0.
// Throws on a duplicated prediction pair.
double micro_f1(const std::vector<RelationPair>& preds, const std::vector<RelationPair>& golds);

struct AccuracyMacro {
  double accuracy = 0.0;
  double macro_f = 0.0;
};

// Accuracy and macro F1 after coarsening both sides to `granularity`
// classes. Macro averages only over classes present in the golds.
AccuracyMacro accuracy_and_macro_f(const std::vector<int>& preds, const std::vector<int>& golds,
                                   const RelationOntology& ontology, int granularity);

struct SeenUnseenF1 {
  double seen = 0.0;
  double unseen = 0.0;
  bool seen_empty = false;
  bool unseen_empty = false;
};

// Micro F1 restricted to the seen and unseen label partitions induced by the
// ontology's cross-dataset map. An empty partition scores 0 and is flagged.
SeenUnseenF1 seen_unseen_f1(const std::vector<RelationPair>& preds,
                            const std::vector<RelationPair>& golds,
                            const RelationOntology& ontology);

// Fraction of instances whose predicted span exactly equals one of the gold
// alternatives. Callers pass only trigger-carrying instances; every
// alternative set must be non-empty. An absent prediction never matches.
double trigger_exact_match(const std::vector<corpus::TriggerSpan>& preds,
                           const std::vector<std::vector<corpus::TriggerSpan>>& alternatives);

}  // namespace trend::evaluation
