#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "trend/ontology.hpp"
#include "trend/tokenizer.hpp"

namespace trend::corpus {

enum class DatasetTag { trigger_annotated, trigger_free };
enum class ContextLevel { session, pair };

// Gold trigger evidence as a character range inside one turn's utterance.
struct TriggerCharSpan {
  int turn = 0;
  int begin = 0;
  int end = 0;  // half-open
  std::string text;
};

struct DialogueExample {
  std::string id;  // stable per source example; duplicated copies share it
  std::vector<std::pair<std::string, std::string>> turns;  // (speaker-id, utterance)
  std::string subject;
  std::string object;
  std::vector<int> relations;  // label ids in the active ontology
  std::vector<TriggerCharSpan> trigger_char_spans;
  DatasetTag dataset_tag = DatasetTag::trigger_annotated;
  ContextLevel context_level = ContextLevel::session;
};

// Token-index trigger span, inclusive endpoints.
struct TriggerSpan {
  bool exists = false;
  int start = -1;
  int end = -1;

  static TriggerSpan none() { return {}; }
  static TriggerSpan of(int s, int e) { return {true, s, e}; }
  bool operator==(const TriggerSpan& o) const {
    return exists == o.exists && start == o.start && end == o.end;
  }
};

// Where a token came from: turn index plus a half-open char range in that
// turn's rendered text. turn = -1 marks structural and query tokens.
struct TokenOffset {
  int turn = -1;
  int begin = -1;
  int end = -1;
};

struct TokenizedInstance {
  std::string example_id;
  std::vector<int> token_ids;
  std::vector<std::string> tokens;
  std::vector<TokenOffset> offset_map;
  int cls1_pos = 0;
  int sep_pos = 0;
  int cls2_pos = 0;
  std::vector<uint8_t> dialogue_mask;
  TriggerSpan gold_trigger;
  std::vector<TriggerSpan> alt_triggers;  // every aligned gold span, for exact match
  int gate_label = 0;
  int relation_label = 0;
};

// --- preprocessing steps ----------------------------------------------------

// Lemmatize/expand/collapse every utterance and both query fields, carrying
// trigger char spans across the edits.
DialogueExample normalize_example(const DialogueExample& ex);

// Index for each distinct speaker id: digits in the id win, then single
// letters (A=1), then first-appearance order over the leftovers.
std::map<std::string, int> speaker_indices(const DialogueExample& ex);

// Replaces subject/object surface forms that name a speaker with that
// speaker's reserved token, everywhere they occur. Indices beyond the cap
// leave the entity verbatim.
DialogueExample substitute_speaker_tokens(const DialogueExample& ex, int speaker_cap = 9);

std::vector<DialogueExample> duplicate_multilabel(const std::vector<DialogueExample>& examples);

// Turn text as the encoder sees it: "<speaker>: <utterance>".
std::string rendered_turn(const DialogueExample& ex, int turn);

// Assembles [CLS] D [SEP] s [CLS] o with truncation that drops earliest
// dialogue turns (then leading tokens) and never the query suffix.
TokenizedInstance build_instance(const DialogueExample& ex, const tokenizer::Vocab& vocab,
                                 int max_len);

// Throws InternalError when a TYPE invariant is broken.
void validate_instance(const TokenizedInstance& inst, int max_len);

// normalize -> substitute -> duplicate -> build, in order.
std::vector<TokenizedInstance> make_instances(const std::vector<DialogueExample>& raw,
                                              const tokenizer::Vocab& vocab, int max_len,
                                              int speaker_cap = 9);

// Rendered text of every normalized+substituted example, for vocab building.
std::vector<std::string> vocab_texts(const std::vector<DialogueExample>& raw,
                                     int speaker_cap = 9);

// --- corpus adapters ----------------------------------------------------------

// JSON array of [turn-strings, entry-list] records; "Speaker 1: text" turns;
// entries carry subject/object/relation names and trigger strings that are
// located by first occurrence in the dialogue.
std::vector<DialogueExample> load_trigger_annotated(const std::string& json_text,
                                                    const evaluation::RelationOntology& ontology);
std::vector<DialogueExample> load_trigger_annotated_file(
    const std::string& path, const evaluation::RelationOntology& ontology);

// Field names of the JSON-lines adapter for trigger-free corpora.
struct TriggerFreeFields {
  std::string id = "id";
  std::string turns = "context";
  std::string subject = "subject";
  std::string object = "object";
  std::string relations = "relations";
  std::string level = "level";
  std::string triggers = "triggers";  // presence is an error in a trigger-free corpus
};

std::vector<DialogueExample> load_trigger_free(const std::string& jsonl_text,
                                               const evaluation::RelationOntology& ontology,
                                               const TriggerFreeFields& fields = {});
std::vector<DialogueExample> load_trigger_free_file(
    const std::string& path, const evaluation::RelationOntology& ontology,
    const TriggerFreeFields& fields = {});

// Label-free query pairs for prediction: same record shape as the
// trigger-annotated corpus, but entries only need x/y and any relation or
// trigger fields are ignored. Every example gets placeholder relation 0.
std::vector<DialogueExample> load_query_pairs(const std::string& json_text);
std::vector<DialogueExample> load_query_pairs_file(const std::string& path);

// Surface text of a token span, merging "##" continuation pieces. An absent
// span yields an empty string.
std::string span_text(const TokenizedInstance& inst, const TriggerSpan& span);

// --- instance cache -----------------------------------------------------------

std::string serialize_instances(const std::vector<TokenizedInstance>& instances,
                                uint64_t vocab_fingerprint);
std::vector<TokenizedInstance> deserialize_instances(const std::string& text,
                                                     uint64_t expected_vocab_fingerprint);

}  // namespace trend::corpus
