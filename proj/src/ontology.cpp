#include "trend/ontology.hpp"

#include <json.hpp>

#include "trend/common.hpp"

namespace trend::evaluation {

using nlohmann::json;

int RelationOntology::id_of(const std::string& label) const {
  auto it = index_.find(label);
  return it == index_.end() ? -1 : it->second;
}

bool RelationOntology::has_coarse(int granularity) const {
  return granularity == size() || coarse_.count(granularity) > 0;
}

std::vector<int> RelationOntology::coarse_granularities() const {
  std::vector<int> out;
  for (const auto& [g, unused] : coarse_) out.push_back(g);
  return out;
}

const std::string& RelationOntology::coarse_of(int granularity, int label_id) const {
  if (label_id < 0 || label_id >= size()) throw InternalError("coarse_of: bad label id");
  if (granularity == size()) return labels_[static_cast<size_t>(label_id)];
  auto it = coarse_.find(granularity);
  if (it == coarse_.end())
    throw InputError("ontology has no " + std::to_string(granularity) + "-class grouping");
  return it->second[static_cast<size_t>(label_id)];
}

bool RelationOntology::is_seen(int label_id) const {
  return !cross_sources(label_id).empty();
}

const std::vector<std::string>& RelationOntology::cross_sources(int label_id) const {
  if (label_id < 0 || label_id >= size()) throw InternalError("cross_sources: bad label id");
  static const std::vector<std::string> empty;
  if (cross_.empty()) return empty;
  return cross_[static_cast<size_t>(label_id)];
}

RelationOntology RelationOntology::from_labels(std::vector<std::string> labels) {
  RelationOntology o;
  o.labels_ = std::move(labels);
  for (int i = 0; i < o.size(); ++i) {
    if (!o.index_.emplace(o.labels_[static_cast<size_t>(i)], i).second)
      throw InputError("duplicate relation label: " + o.labels_[static_cast<size_t>(i)]);
  }
  o.validate();
  return o;
}

void RelationOntology::validate() const {
  if (labels_.empty()) throw InputError("ontology has no labels");
  for (const auto& [granularity, names] : coarse_) {
    if (names.size() != labels_.size())
      throw InputError("coarse map size mismatch at granularity " + std::to_string(granularity));
    std::unordered_map<std::string, int> distinct;
    for (const std::string& n : names) distinct.emplace(n, 0);
    if (static_cast<int>(distinct.size()) != granularity)
      throw InputError("coarse map at granularity " + std::to_string(granularity) + " has " +
                       std::to_string(distinct.size()) + " classes");
  }
  // groupings must nest: labels sharing a finer class share every coarser one
  std::vector<int> grans;
  for (const auto& [g, _] : coarse_) grans.push_back(g);
  for (size_t a = 0; a < grans.size(); ++a) {
    for (size_t b = a + 1; b < grans.size(); ++b) {
      int fine = std::max(grans[a], grans[b]);
      int coarse = std::min(grans[a], grans[b]);
      const auto& fn = coarse_.at(fine);
      const auto& cn = coarse_.at(coarse);
      std::unordered_map<std::string, std::string> seen_map;
      for (size_t i = 0; i < labels_.size(); ++i) {
        auto [it, inserted] = seen_map.emplace(fn[i], cn[i]);
        if (!inserted && it->second != cn[i])
          throw InputError("coarse groupings do not nest: class " + fn[i]);
      }
    }
  }
  if (!cross_.empty() && cross_.size() != labels_.size())
    throw InternalError("cross map size mismatch");
}

RelationOntology RelationOntology::load_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw InputError(std::string("ontology JSON parse error: ") + e.what());
  }
  if (!j.is_object() || !j.contains("labels") || !j["labels"].is_array())
    throw InputError("ontology JSON needs a top-level \"labels\" array");

  RelationOntology o;
  for (const auto& l : j["labels"]) {
    if (!l.is_string()) throw InputError("ontology labels must be strings");
    o.labels_.push_back(l.get<std::string>());
  }
  for (int i = 0; i < o.size(); ++i) {
    if (!o.index_.emplace(o.labels_[static_cast<size_t>(i)], i).second)
      throw InputError("duplicate relation label: " + o.labels_[static_cast<size_t>(i)]);
  }

  if (j.contains("coarse")) {
    for (const auto& [key, table] : j["coarse"].items()) {
      int granularity = 0;
      try {
        granularity = std::stoi(key);
      } catch (...) {
        throw InputError("coarse granularity keys must be integers, got: " + key);
      }
      std::vector<std::string> names(o.labels_.size());
      for (size_t i = 0; i < o.labels_.size(); ++i) {
        const std::string& label = o.labels_[i];
        if (!table.contains(label))
          throw InputError("label has no coarse mapping at granularity " + key + ": " + label);
        names[i] = table[label].get<std::string>();
      }
      o.coarse_[granularity] = std::move(names);
    }
  }

  if (j.contains("cross_map")) {
    o.cross_.assign(o.labels_.size(), {});
    for (const auto& [label, value] : j["cross_map"].items()) {
      int id = o.id_of(label);
      if (id < 0) throw InputError("cross_map names an unknown label: " + label);
      auto& dst = o.cross_[static_cast<size_t>(id)];
      if (value.is_null()) continue;
      if (value.is_string()) {
        dst.push_back(value.get<std::string>());
      } else if (value.is_array()) {
        for (const auto& v : value) dst.push_back(v.get<std::string>());
      } else {
        throw InputError("cross_map values must be null, string, or array: " + label);
      }
    }
  }

  o.validate();
  return o;
}

RelationOntology RelationOntology::load_file(const std::string& path) {
  return load_json(read_file(path));
}

std::string RelationOntology::to_json() const {
  json j;
  j["labels"] = labels_;
  if (!coarse_.empty()) {
    json c = json::object();
    for (const auto& [granularity, names] : coarse_) {
      json table = json::object();
      for (size_t i = 0; i < labels_.size(); ++i) table[labels_[i]] = names[i];
      c[std::to_string(granularity)] = std::move(table);
    }
    j["coarse"] = std::move(c);
  }
  if (!cross_.empty()) {
    json m = json::object();
    for (size_t i = 0; i < labels_.size(); ++i) {
      if (cross_[i].empty())
        m[labels_[i]] = nullptr;
      else
        m[labels_[i]] = cross_[i];
    }
    j["cross_map"] = std::move(m);
  }
  return j.dump(2) + "\n";
}

uint64_t RelationOntology::fingerprint() const {
  std::string canon = to_json();
  return fnv1a64(canon.data(), canon.size());
}

}  // namespace trend::evaluation
