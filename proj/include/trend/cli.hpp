#pragma once

#include <string>

#include "trend/config.hpp"

namespace trend::cli {

// Output locations produced by a command. Unused fields stay empty.
struct CommandPaths {
  std::string out_dir;
  std::string checkpoint_dir;
  std::string metrics;
  std::string summary;
  std::string timing;
  std::string report_json;
  std::string report_text;
  std::string predictions;
  std::string triggers;
};

// Joint training from a config file. Writes a checkpoint directory plus
// metrics.jsonl, summary.txt, and timing.jsonl under [output] dir.
CommandPaths cmd_train(const config::Config& cfg);

// Relation-head transfer: loads [transfer] source, replaces the relation
// head for the target ontology, fine-tunes on the target corpus, and saves a
// checkpoint whose manifest records the source fingerprint.
CommandPaths cmd_transfer(const config::Config& cfg);

struct EvaluateOptions {
  std::string checkpoint;
  std::string input;
  std::string format = "annotated";  // "annotated" | "free"
  std::string out_dir = "trend_eval";
  bool predictions_only = false;
  bool force_gate_on = false;
};

// Scores a corpus with a checkpoint. Writes predictions.jsonl, then
// triggers.txt and report.json/report.txt unless predictions_only.
CommandPaths cmd_evaluate(const EvaluateOptions& opts, const config::Config& cfg = {});

struct PredictOptions {
  std::string checkpoint;
  std::string input;
  std::string output;  // empty = stdout
  bool force_gate_on = false;
};

// Predicts relations for label-free query pairs, one JSON line per pair.
CommandPaths cmd_predict(const PredictOptions& opts, const config::Config& cfg = {});

// Full command-line surface; returns the process exit code
// (0 ok, 2 input error, 3 checkpoint error, 1 internal error).
int run(int argc, const char* const* argv);

}  // namespace trend::cli
