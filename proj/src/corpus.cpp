#include "trend/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <climits>
#include <set>

#include "json.hpp"
#include "trend/common.hpp"
#include "trend/text.hpp"

namespace trend::corpus {

using nlohmann::json;

namespace {

// Result of in-place substring replacements, with per-source-byte ranges so
// char spans survive the edit. Same map contract as text::Normalized.
struct Edited {
  std::string text;
  std::vector<int> map_begin;
  std::vector<int> map_end;

  std::pair<int, int> span(int begin, int end) const {
    int n = static_cast<int>(map_begin.size());
    begin = std::max(0, std::min(begin, n));
    end = std::max(begin, std::min(end, n));
    int lo = INT_MAX, hi = INT_MIN;
    for (int i = begin; i < end; ++i) {
      if (map_begin[i] < map_end[i]) {
        lo = std::min(lo, map_begin[i]);
        hi = std::max(hi, map_end[i]);
      }
    }
    if (lo > hi) return {-1, -1};
    return {lo, hi};
  }
};

// Replaces every occurrence of each needle, longest needle winning at a given
// position. Replaced bytes all map to the whole replacement range.
Edited replace_all(const std::string& src,
                   const std::vector<std::pair<std::string, std::string>>& rules) {
  Edited out;
  out.map_begin.assign(src.size(), 0);
  out.map_end.assign(src.size(), 0);
  size_t i = 0;
  while (i < src.size()) {
    const std::pair<std::string, std::string>* hit = nullptr;
    for (const auto& rule : rules) {
      if (rule.first.empty()) continue;
      if (src.compare(i, rule.first.size(), rule.first) == 0) {
        if (!hit || rule.first.size() > hit->first.size()) hit = &rule;
      }
    }
    if (hit) {
      int b = static_cast<int>(out.text.size());
      out.text += hit->second;
      int e = static_cast<int>(out.text.size());
      for (size_t k = 0; k < hit->first.size(); ++k) {
        out.map_begin[i + k] = b;
        out.map_end[i + k] = e;
      }
      i += hit->first.size();
    } else {
      out.map_begin[i] = static_cast<int>(out.text.size());
      out.text += src[i];
      out.map_end[i] = static_cast<int>(out.text.size());
      ++i;
    }
  }
  return out;
}

std::pair<int, int> remap_span(const text::Normalized& norm, int begin, int end) {
  return norm.map_span(begin, end);
}

}  // namespace

DialogueExample normalize_example(const DialogueExample& ex) {
  DialogueExample out = ex;
  std::vector<text::Normalized> norms;
  norms.reserve(ex.turns.size());
  for (size_t t = 0; t < ex.turns.size(); ++t) {
    norms.push_back(text::normalize_mapped(ex.turns[t].second));
    out.turns[t].first = text::normalize_text(ex.turns[t].first);
    out.turns[t].second = norms.back().text;
    if (out.turns[t].first.empty() || out.turns[t].second.empty())
      throw InputError("turn " + std::to_string(t) + " of example " + ex.id +
                       " is empty after normalization");
  }
  out.subject = text::normalize_text(ex.subject);
  out.object = text::normalize_text(ex.object);

  out.trigger_char_spans.clear();
  for (const auto& span : ex.trigger_char_spans) {
    if (span.turn < 0 || span.turn >= static_cast<int>(ex.turns.size())) continue;
    auto [b, e] = remap_span(norms[span.turn], span.begin, span.end);
    if (b < 0 || b >= e) continue;
    TriggerCharSpan mapped = span;
    mapped.begin = b;
    mapped.end = e;
    mapped.text = out.turns[span.turn].second.substr(b, e - b);
    out.trigger_char_spans.push_back(mapped);
  }
  return out;
}

std::map<std::string, int> speaker_indices(const DialogueExample& ex) {
  std::vector<std::string> order;
  std::map<std::string, int> out;
  for (const auto& turn : ex.turns) {
    if (!out.count(turn.first)) {
      out[turn.first] = 0;
      order.push_back(turn.first);
    }
  }
  auto parse = [](const std::string& id) -> int {
    std::string t = trim(id);
    if (t.empty()) return 0;
    size_t i = t.size();
    while (i > 0 && std::isdigit(static_cast<unsigned char>(t[i - 1]))) --i;
    if (i < t.size() && t.size() - i <= 3) {
      int v = std::stoi(t.substr(i));
      return v > 0 ? v : 0;
    }
    if (t.size() == 1 && std::isalpha(static_cast<unsigned char>(t[0])))
      return std::tolower(static_cast<unsigned char>(t[0])) - 'a' + 1;
    return 0;
  };
  std::set<int> used;
  for (const auto& id : order) {
    int v = parse(id);
    if (v > 0 && !used.count(v)) {
      out[id] = v;
      used.insert(v);
    }
  }
  int next = 1;
  for (const auto& id : order) {
    if (out[id] != 0) continue;
    while (used.count(next)) ++next;
    out[id] = next;
    used.insert(next);
  }
  return out;
}

DialogueExample substitute_speaker_tokens(const DialogueExample& ex, int speaker_cap) {
  auto indices = speaker_indices(ex);
  std::vector<std::pair<std::string, std::string>> rules;
  auto add_rule = [&](const std::string& entity) {
    auto it = indices.find(entity);
    if (it == indices.end()) return;
    if (it->second < 1 || it->second > speaker_cap) return;
    for (const auto& r : rules)
      if (r.first == entity) return;
    rules.emplace_back(entity, tokenizer::speaker_token(it->second));
  };
  add_rule(ex.subject);
  add_rule(ex.object);
  if (rules.empty()) return ex;

  DialogueExample out = ex;
  for (size_t t = 0; t < ex.turns.size(); ++t) {
    out.turns[t].first = replace_all(ex.turns[t].first, rules).text;
    Edited ed = replace_all(ex.turns[t].second, rules);
    out.turns[t].second = ed.text;
    for (auto& span : out.trigger_char_spans) {
      if (span.turn != static_cast<int>(t)) continue;
      auto [b, e] = ed.span(span.begin, span.end);
      span.begin = b;
      span.end = e;
      if (b >= 0 && b < e) span.text = ed.text.substr(b, e - b);
    }
  }
  auto dead = [](const TriggerCharSpan& s) { return s.begin < 0 || s.begin >= s.end; };
  out.trigger_char_spans.erase(
      std::remove_if(out.trigger_char_spans.begin(), out.trigger_char_spans.end(), dead),
      out.trigger_char_spans.end());
  out.subject = replace_all(ex.subject, rules).text;
  out.object = replace_all(ex.object, rules).text;
  return out;
}

std::vector<DialogueExample> duplicate_multilabel(const std::vector<DialogueExample>& examples) {
  std::vector<DialogueExample> out;
  for (const auto& ex : examples) {
    if (ex.relations.empty())
      throw InternalError("example " + ex.id + " has no relations");
    for (int r : ex.relations) {
      out.push_back(ex);
      out.back().relations = {r};
    }
  }
  return out;
}

std::string rendered_turn(const DialogueExample& ex, int turn) {
  if (turn < 0 || turn >= static_cast<int>(ex.turns.size()))
    throw InternalError("turn index out of range");
  return ex.turns[turn].first + ": " + ex.turns[turn].second;
}

TokenizedInstance build_instance(const DialogueExample& ex, const tokenizer::Vocab& vocab,
                                 int max_len) {
  if (ex.relations.size() != 1)
    throw InternalError("build_instance expects a single-relation example, got " +
                        std::to_string(ex.relations.size()));
  auto s_pieces = tokenizer::tokenize(vocab, ex.subject);
  auto o_pieces = tokenizer::tokenize(vocab, ex.object);
  if (s_pieces.empty())
    throw InputError("subject of example " + ex.id + " tokenizes to zero tokens");
  if (o_pieces.empty())
    throw InputError("object of example " + ex.id + " tokenizes to zero tokens");

  int turns = static_cast<int>(ex.turns.size());
  if (turns == 0) throw InputError("example " + ex.id + " has no turns");
  std::vector<std::vector<tokenizer::TokenPiece>> per_turn(turns);
  int total = 0;
  for (int t = 0; t < turns; ++t) {
    per_turn[t] = tokenizer::tokenize(vocab, rendered_turn(ex, t));
    total += static_cast<int>(per_turn[t].size());
  }

  int budget = max_len - 3 - static_cast<int>(s_pieces.size()) -
               static_cast<int>(o_pieces.size());
  if (budget < 1)
    throw InputError("query of example " + ex.id + " leaves no room for dialogue tokens");

  int first_turn = 0;
  while (first_turn + 1 < turns && total > budget) {
    total -= static_cast<int>(per_turn[first_turn].size());
    ++first_turn;
  }
  int drop_lead = 0;
  if (total > budget) {
    drop_lead = total - budget;
    total = budget;
  }

  TokenizedInstance inst;
  inst.example_id = ex.id;
  inst.relation_label = ex.relations[0];
  auto push = [&](const std::string& tok, int id, TokenOffset off) {
    inst.tokens.push_back(tok);
    inst.token_ids.push_back(id);
    inst.offset_map.push_back(off);
  };
  push("[CLS]", tokenizer::Vocab::kCls, {});
  // (turn, piece index) -> instance position, for trigger alignment
  std::map<std::pair<int, int>, int> placed;
  for (int t = first_turn; t < turns; ++t) {
    int start = (t == first_turn) ? drop_lead : 0;
    for (int p = start; p < static_cast<int>(per_turn[t].size()); ++p) {
      const auto& piece = per_turn[t][p];
      placed[{t, p}] = static_cast<int>(inst.tokens.size());
      push(piece.text, piece.id, {t, piece.begin, piece.end});
    }
  }
  inst.sep_pos = static_cast<int>(inst.tokens.size());
  push("[SEP]", tokenizer::Vocab::kSep, {});
  for (const auto& piece : s_pieces) push(piece.text, piece.id, {});
  inst.cls2_pos = static_cast<int>(inst.tokens.size());
  push("[CLS]", tokenizer::Vocab::kCls, {});
  for (const auto& piece : o_pieces) push(piece.text, piece.id, {});
  inst.dialogue_mask.assign(inst.tokens.size(), 0);
  for (int i = 1; i < inst.sep_pos; ++i) inst.dialogue_mask[i] = 1;

  // Align each gold char span to retained tokens. A span survives only when
  // every token it touches lies fully inside it and none fell to truncation.
  std::vector<TriggerSpan> aligned;
  for (const auto& span : ex.trigger_char_spans) {
    if (span.turn < 0 || span.turn >= turns) continue;
    std::string rt = rendered_turn(ex, span.turn);
    int shift = static_cast<int>(ex.turns[span.turn].first.size()) + 2;
    int b = span.begin + shift;
    int e = span.end + shift;
    if (b < 0 || e > static_cast<int>(rt.size()) || b >= e) continue;
    while (b < e && rt[b] == ' ') ++b;
    while (e > b && rt[e - 1] == ' ') --e;
    if (b >= e) continue;

    bool ok = true;
    int first_pos = -1, last_pos = -1;
    const auto& pieces = per_turn[span.turn];
    for (int p = 0; p < static_cast<int>(pieces.size()); ++p) {
      const auto& piece = pieces[p];
      if (piece.end <= b || piece.begin >= e) continue;
      if (piece.begin < b || piece.end > e) {
        ok = false;
        break;
      }
      auto it = placed.find({span.turn, p});
      if (it == placed.end()) {
        ok = false;
        break;
      }
      if (first_pos < 0) first_pos = it->second;
      last_pos = it->second;
    }
    if (!ok || first_pos < 0) continue;
    TriggerSpan ts = TriggerSpan::of(first_pos, last_pos);
    if (std::find(aligned.begin(), aligned.end(), ts) == aligned.end())
      aligned.push_back(ts);
  }
  std::sort(aligned.begin(), aligned.end(), [](const TriggerSpan& a, const TriggerSpan& b) {
    return a.start != b.start ? a.start < b.start : a.end < b.end;
  });
  if (!aligned.empty()) {
    inst.gate_label = 1;
    inst.gold_trigger = aligned.front();
    inst.alt_triggers = aligned;
  }

  validate_instance(inst, max_len);
  return inst;
}

void validate_instance(const TokenizedInstance& inst, int max_len) {
  auto fail = [&](const std::string& what) {
    throw InternalError("instance " + inst.example_id + ": " + what);
  };
  size_t n = inst.token_ids.size();
  if (n == 0 || static_cast<int>(n) > max_len) fail("length out of range");
  if (inst.tokens.size() != n || inst.offset_map.size() != n ||
      inst.dialogue_mask.size() != n)
    fail("parallel arrays disagree");
  if (inst.cls1_pos != 0) fail("first marker not at position 0");
  if (!(inst.cls1_pos < inst.sep_pos && inst.sep_pos < inst.cls2_pos &&
        inst.cls2_pos < static_cast<int>(n)))
    fail("marker positions out of order");
  if (inst.token_ids[inst.cls1_pos] != tokenizer::Vocab::kCls ||
      inst.token_ids[inst.sep_pos] != tokenizer::Vocab::kSep ||
      inst.token_ids[inst.cls2_pos] != tokenizer::Vocab::kCls)
    fail("marker ids wrong");
  for (size_t i = 0; i < n; ++i) {
    bool want = static_cast<int>(i) > inst.cls1_pos && static_cast<int>(i) < inst.sep_pos;
    if ((inst.dialogue_mask[i] != 0) != want) fail("dialogue mask wrong");
  }
  if (inst.gate_label != 0 && inst.gate_label != 1) fail("gate label out of range");
  if ((inst.gate_label == 1) != inst.gold_trigger.exists)
    fail("gate label disagrees with gold trigger");
  auto check_span = [&](const TriggerSpan& s) {
    if (!s.exists) fail("alternative span marked absent");
    if (!(s.start > inst.cls1_pos && s.start <= s.end && s.end < inst.sep_pos))
      fail("trigger endpoints outside dialogue region");
  };
  if (inst.gold_trigger.exists) {
    check_span(inst.gold_trigger);
    if (inst.alt_triggers.empty()) fail("gold trigger missing from alternatives");
    bool found = false;
    for (const auto& s : inst.alt_triggers) {
      check_span(s);
      if (s == inst.gold_trigger) found = true;
    }
    if (!found) fail("gold trigger missing from alternatives");
  } else {
    if (!inst.alt_triggers.empty()) fail("alternatives without gold trigger");
    if (inst.gold_trigger.start != -1 || inst.gold_trigger.end != -1)
      fail("absent trigger carries endpoints");
  }
  if (inst.relation_label < 0) fail("negative relation label");
}

std::vector<TokenizedInstance> make_instances(const std::vector<DialogueExample>& raw,
                                              const tokenizer::Vocab& vocab, int max_len,
                                              int speaker_cap) {
  std::vector<DialogueExample> prepped;
  prepped.reserve(raw.size());
  for (const auto& ex : raw)
    prepped.push_back(substitute_speaker_tokens(normalize_example(ex), speaker_cap));
  std::vector<TokenizedInstance> out;
  for (const auto& ex : duplicate_multilabel(prepped))
    out.push_back(build_instance(ex, vocab, max_len));
  return out;
}

std::vector<std::string> vocab_texts(const std::vector<DialogueExample>& raw,
                                     int speaker_cap) {
  std::vector<std::string> out;
  for (const auto& ex : raw) {
    DialogueExample prepped = substitute_speaker_tokens(normalize_example(ex), speaker_cap);
    for (size_t t = 0; t < prepped.turns.size(); ++t)
      out.push_back(rendered_turn(prepped, static_cast<int>(t)));
    out.push_back(prepped.subject);
    out.push_back(prepped.object);
  }
  return out;
}

namespace {

std::pair<std::string, std::string> split_turn(const std::string& line, const std::string& where) {
  size_t pos = line.find(':');
  if (pos == std::string::npos)
    throw InputError("turn without speaker prefix in " + where);
  std::string speaker = trim(line.substr(0, pos));
  std::string utter = trim(line.substr(pos + 1));
  if (speaker.empty()) throw InputError("empty speaker id in " + where);
  if (utter.empty()) throw InputError("empty utterance in " + where);
  return {speaker, utter};
}

json parse_json(const std::string& text, const std::string& what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw InputError("malformed JSON in " + what);
  return j;
}

}  // namespace

std::vector<DialogueExample> load_trigger_annotated(const std::string& json_text,
                                                    const evaluation::RelationOntology& ontology) {
  json j = parse_json(json_text, "trigger-annotated corpus");
  if (!j.is_array()) throw InputError("trigger-annotated corpus must be a JSON array");
  std::vector<DialogueExample> out;
  for (size_t rec_idx = 0; rec_idx < j.size(); ++rec_idx) {
    const json& rec = j[rec_idx];
    std::string where = "record " + std::to_string(rec_idx);
    if (!rec.is_array() || rec.size() < 2 || !rec[0].is_array() || !rec[1].is_array())
      throw InputError(where + " is not a [turns, entries] pair");
    std::vector<std::pair<std::string, std::string>> turns;
    for (const json& line : rec[0]) {
      if (!line.is_string()) throw InputError("non-string turn in " + where);
      turns.push_back(split_turn(line.get<std::string>(), where));
    }
    if (turns.empty()) throw InputError(where + " has no turns");
    for (size_t ent_idx = 0; ent_idx < rec[1].size(); ++ent_idx) {
      const json& ent = rec[1][ent_idx];
      std::string ewhere = where + " entry " + std::to_string(ent_idx);
      if (!ent.is_object()) throw InputError(ewhere + " is not an object");
      DialogueExample ex;
      ex.id = std::to_string(rec_idx) + "." + std::to_string(ent_idx);
      ex.turns = turns;
      ex.dataset_tag = DatasetTag::trigger_annotated;
      if (!ent.contains("x") || !ent.contains("y") || !ent.contains("r"))
        throw InputError(ewhere + " lacks x/y/r fields");
      ex.subject = ent.at("x").get<std::string>();
      ex.object = ent.at("y").get<std::string>();
      if (!ent.at("r").is_array() || ent.at("r").empty())
        throw InputError(ewhere + " has no relations");
      for (const json& rname : ent.at("r")) {
        int id = ontology.id_of(rname.get<std::string>());
        if (id < 0)
          throw InputError(ewhere + " names unknown relation " + rname.get<std::string>());
        ex.relations.push_back(id);
      }
      if (ent.contains("t")) {
        if (!ent.at("t").is_array()) throw InputError(ewhere + " trigger field is not a list");
        for (const json& tj : ent.at("t")) {
          std::string trig = tj.get<std::string>();
          if (trig.empty()) continue;
          for (size_t turn = 0; turn < turns.size(); ++turn) {
            size_t pos = turns[turn].second.find(trig);
            if (pos == std::string::npos) continue;
            TriggerCharSpan span;
            span.turn = static_cast<int>(turn);
            span.begin = static_cast<int>(pos);
            span.end = static_cast<int>(pos + trig.size());
            span.text = trig;
            bool dup = false;
            for (const auto& have : ex.trigger_char_spans)
              dup = dup || (have.turn == span.turn && have.begin == span.begin &&
                            have.end == span.end);
            if (!dup) ex.trigger_char_spans.push_back(span);
            break;
          }
        }
      }
      out.push_back(std::move(ex));
    }
  }
  return out;
}

std::vector<DialogueExample> load_trigger_annotated_file(
    const std::string& path, const evaluation::RelationOntology& ontology) {
  return load_trigger_annotated(read_file(path), ontology);
}

std::vector<DialogueExample> load_trigger_free(const std::string& jsonl_text,
                                               const evaluation::RelationOntology& ontology,
                                               const TriggerFreeFields& fields) {
  std::vector<DialogueExample> out;
  size_t line_no = 0;
  for (const std::string& line : split_lines(jsonl_text)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::string where = "line " + std::to_string(line_no);
    json j = parse_json(line, "trigger-free corpus " + where);
    if (!j.is_object()) throw InputError(where + " is not a JSON object");
    if (j.contains(fields.triggers) && !j.at(fields.triggers).is_null() &&
        !(j.at(fields.triggers).is_array() && j.at(fields.triggers).empty()))
      throw InputError("trigger-free corpus carries trigger annotations at " + where);
    DialogueExample ex;
    ex.dataset_tag = DatasetTag::trigger_free;
    if (j.contains(fields.id)) {
      const json& idj = j.at(fields.id);
      ex.id = idj.is_string() ? idj.get<std::string>() : idj.dump();
    } else {
      ex.id = std::to_string(line_no - 1);
    }
    if (!j.contains(fields.turns) || !j.at(fields.turns).is_array())
      throw InputError(where + " lacks a turn list");
    for (const json& turn : j.at(fields.turns))
      ex.turns.push_back(split_turn(turn.get<std::string>(), where));
    if (ex.turns.empty()) throw InputError(where + " has no turns");
    if (!j.contains(fields.subject) || !j.contains(fields.object))
      throw InputError(where + " lacks subject/object");
    ex.subject = j.at(fields.subject).get<std::string>();
    ex.object = j.at(fields.object).get<std::string>();
    if (!j.contains(fields.relations))
      throw InputError(where + " lacks relations");
    const json& rels = j.at(fields.relations);
    auto add_rel = [&](const json& r) {
      if (r.is_number_integer()) {
        int id = r.get<int>();
        if (id < 0 || id >= ontology.size())
          throw InputError(where + " relation id out of range");
        ex.relations.push_back(id);
      } else {
        int id = ontology.id_of(r.get<std::string>());
        if (id < 0)
          throw InputError(where + " names unknown relation " + r.get<std::string>());
        ex.relations.push_back(id);
      }
    };
    if (rels.is_array()) {
      for (const json& r : rels) add_rel(r);
    } else {
      add_rel(rels);
    }
    if (ex.relations.empty()) throw InputError(where + " has no relations");
    if (j.contains(fields.level)) {
      std::string level = j.at(fields.level).get<std::string>();
      if (level == "session")
        ex.context_level = ContextLevel::session;
      else if (level == "pair")
        ex.context_level = ContextLevel::pair;
      else
        throw InputError(where + " has unknown context level " + level);
    }
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<DialogueExample> load_trigger_free_file(
    const std::string& path, const evaluation::RelationOntology& ontology,
    const TriggerFreeFields& fields) {
  return load_trigger_free(read_file(path), ontology, fields);
}

std::vector<DialogueExample> load_query_pairs(const std::string& json_text) {
  json j = parse_json(json_text, "query file");
  if (!j.is_array()) throw InputError("query file must be a JSON array");
  std::vector<DialogueExample> out;
  for (size_t rec_idx = 0; rec_idx < j.size(); ++rec_idx) {
    const json& rec = j[rec_idx];
    std::string where = "record " + std::to_string(rec_idx);
    if (!rec.is_array() || rec.size() < 2 || !rec[0].is_array() || !rec[1].is_array())
      throw InputError(where + " is not a [turns, entries] pair");
    std::vector<std::pair<std::string, std::string>> turns;
    for (const json& line : rec[0]) {
      if (!line.is_string()) throw InputError("non-string turn in " + where);
      turns.push_back(split_turn(line.get<std::string>(), where));
    }
    for (size_t ent_idx = 0; ent_idx < rec[1].size(); ++ent_idx) {
      const json& ent = rec[1][ent_idx];
      std::string ewhere = where + " entry " + std::to_string(ent_idx);
      if (!ent.is_object() || !ent.contains("x") || !ent.contains("y"))
        throw InputError(ewhere + " lacks x/y fields");
      if (turns.empty()) throw InputError(where + " has no turns");
      DialogueExample ex;
      ex.id = std::to_string(rec_idx) + "." + std::to_string(ent_idx);
      ex.turns = turns;
      ex.subject = ent.at("x").get<std::string>();
      ex.object = ent.at("y").get<std::string>();
      ex.relations = {0};
      ex.dataset_tag = DatasetTag::trigger_free;
      out.push_back(std::move(ex));
    }
  }
  return out;
}

std::vector<DialogueExample> load_query_pairs_file(const std::string& path) {
  return load_query_pairs(read_file(path));
}

std::string span_text(const TokenizedInstance& inst, const TriggerSpan& span) {
  if (!span.exists) return "";
  if (span.start < 0 || span.end >= static_cast<int>(inst.tokens.size()) ||
      span.start > span.end)
    throw InternalError("span out of token range");
  std::string out;
  for (int i = span.start; i <= span.end; ++i) {
    const std::string& tok = inst.tokens[static_cast<size_t>(i)];
    if (starts_with(tok, "##")) {
      out += tok.substr(2);
    } else {
      if (!out.empty()) out += " ";
      out += tok;
    }
  }
  return out;
}

namespace {

json span_to_json(const TriggerSpan& s) {
  if (!s.exists) return nullptr;
  return json::array({s.start, s.end});
}

TriggerSpan span_from_json(const json& j) {
  if (j.is_null()) return TriggerSpan::none();
  return TriggerSpan::of(j.at(0).get<int>(), j.at(1).get<int>());
}

}  // namespace

std::string serialize_instances(const std::vector<TokenizedInstance>& instances,
                                uint64_t vocab_fingerprint) {
  json header{{"format", 1}, {"vocab", hex64(vocab_fingerprint)}};
  std::string out = header.dump() + "\n";
  for (const auto& inst : instances) {
    json offs = json::array();
    for (const auto& o : inst.offset_map) offs.push_back(json::array({o.turn, o.begin, o.end}));
    json alts = json::array();
    for (const auto& s : inst.alt_triggers) alts.push_back(span_to_json(s));
    json j{{"id", inst.example_id},
           {"ids", inst.token_ids},
           {"tokens", inst.tokens},
           {"offsets", offs},
           {"sep", inst.sep_pos},
           {"cls2", inst.cls2_pos},
           {"gate", inst.gate_label},
           {"relation", inst.relation_label},
           {"trigger", span_to_json(inst.gold_trigger)},
           {"alts", alts}};
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<TokenizedInstance> deserialize_instances(const std::string& text,
                                                     uint64_t expected_vocab_fingerprint) {
  auto lines = split_lines(text);
  if (lines.empty()) throw InputError("instance cache is empty");
  json header = parse_json(lines[0], "instance cache header");
  if (!header.is_object() || header.value("format", 0) != 1)
    throw InputError("instance cache has unsupported format");
  if (header.value("vocab", "") != hex64(expected_vocab_fingerprint))
    throw InputError("instance cache was built with a different vocabulary");
  std::vector<TokenizedInstance> out;
  for (size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    json j = parse_json(lines[i], "instance cache line " + std::to_string(i + 1));
    TokenizedInstance inst;
    inst.example_id = j.at("id").get<std::string>();
    inst.token_ids = j.at("ids").get<std::vector<int>>();
    inst.tokens = j.at("tokens").get<std::vector<std::string>>();
    for (const json& o : j.at("offsets"))
      inst.offset_map.push_back({o.at(0).get<int>(), o.at(1).get<int>(), o.at(2).get<int>()});
    inst.sep_pos = j.at("sep").get<int>();
    inst.cls2_pos = j.at("cls2").get<int>();
    inst.gate_label = j.at("gate").get<int>();
    inst.relation_label = j.at("relation").get<int>();
    inst.gold_trigger = span_from_json(j.at("trigger"));
    for (const json& a : j.at("alts")) inst.alt_triggers.push_back(span_from_json(a));
    inst.dialogue_mask.assign(inst.token_ids.size(), 0);
    for (int p = 1; p < inst.sep_pos; ++p) inst.dialogue_mask[p] = 1;
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace trend::corpus
