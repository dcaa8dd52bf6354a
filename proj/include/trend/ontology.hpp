#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace trend::evaluation {

// Relation label set plus the scoring side-tables: coarse regroupings,
// seen/unseen partition, and the cross-dataset label mapping that defines
// that partition.
class RelationOntology {
 public:
  static RelationOntology from_labels(std::vector<std::string> labels);
  static RelationOntology load_json(const std::string& json_text);
  static RelationOntology load_file(const std::string& path);

  int size() const { return static_cast<int>(labels_.size()); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(int id) const { return labels_[static_cast<size_t>(id)]; }
  int id_of(const std::string& label) const;  // -1 when absent

  bool has_coarse(int granularity) const;
  // Coarse class name of a label id at granularity 4 or 6; granularity 13
  // (or any granularity equal to the label count) is the identity.
  const std::string& coarse_of(int granularity, int label_id) const;
  // Non-identity coarse granularities, ascending.
  std::vector<int> coarse_granularities() const;

  bool has_partition() const { return !cross_.empty(); }
  bool is_seen(int label_id) const;
  const std::vector<std::string>& cross_sources(int label_id) const;

  uint64_t fingerprint() const;
  std::string to_json() const;

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, int> index_;
  // granularity -> per-label coarse class name, same order as labels_
  std::map<int, std::vector<std::string>> coarse_;
  std::vector<std::vector<std::string>> cross_;  // per label; empty list = unmapped

  void validate() const;
};

}  // namespace trend::evaluation
