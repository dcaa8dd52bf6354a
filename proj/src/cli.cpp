#include "trend/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "trend/checkpoint.hpp"
#include "trend/common.hpp"
#include "trend/corpus.hpp"
#include "trend/evaluation.hpp"
#include "trend/model.hpp"
#include "trend/training.hpp"
#include "trend/transfer.hpp"

namespace trend::cli {

using nlohmann::json;

namespace {

std::string path_join(const std::string& dir, const char* file) {
  return (std::filesystem::path(dir) / file).string();
}

void make_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory " + dir + ": " + ec.message());
}

void check_device(const config::Config& cfg) {
  std::string device = cfg.get("cli.device", "cpu");
  if (device != "cpu")
    throw InputError("unsupported device \"" + device + "\": only cpu is available");
}

corpus::TriggerFreeFields fields_from(const config::Config& cfg) {
  corpus::TriggerFreeFields f;
  f.id = cfg.get("corpus.id_field", f.id);
  f.turns = cfg.get("corpus.turns_field", f.turns);
  f.subject = cfg.get("corpus.subject_field", f.subject);
  f.object = cfg.get("corpus.object_field", f.object);
  f.relations = cfg.get("corpus.relations_field", f.relations);
  f.level = cfg.get("corpus.level_field", f.level);
  f.triggers = cfg.get("corpus.triggers_field", f.triggers);
  return f;
}

std::vector<corpus::DialogueExample> load_corpus(const config::Config& cfg,
                                                 const std::string& path,
                                                 const std::string& format,
                                                 const evaluation::RelationOntology& ontology) {
  if (format == "annotated") return corpus::load_trigger_annotated_file(path, ontology);
  if (format == "free") return corpus::load_trigger_free_file(path, ontology, fields_from(cfg));
  throw InputError("unknown corpus format \"" + format + "\" (expected annotated or free)");
}

training::TrainConfig train_config_from(const config::Config& cfg, const std::string& backbone) {
  training::TrainConfig tc;
  tc.lr = cfg.get_double("training.lr", tc.lr);
  tc.epochs = cfg.get_int("training.epochs", tc.epochs);
  tc.batch_size = cfg.get_int("training.batch_size", tc.batch_size);
  tc.seed = cfg.get_uint64("training.seed", tc.seed);
  tc.clip_norm = cfg.get_double("training.clip_norm", tc.clip_norm);
  tc.weights.trigger = cfg.get_double("training.w_trigger", tc.weights.trigger);
  tc.weights.relation = cfg.get_double("training.w_relation", tc.weights.relation);
  tc.weights.binary = cfg.get_double("training.w_binary", tc.weights.binary);
  tc.schedule.tf_gate = cfg.get_double("training.tf_gate", tc.schedule.tf_gate);
  // The large backbone pairs with a lower trigger forcing rate by default;
  // an explicit key always wins.
  double tf_trigger = backbone == "large" ? 0.5 : tc.schedule.tf_trigger;
  tc.schedule.tf_trigger = cfg.get_double("training.tf_trigger", tf_trigger);
  return tc;
}

std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string table(const std::vector<std::pair<std::string, std::string>>& rows) {
  size_t width = 0;
  for (const auto& [key, unused] : rows) width = std::max(width, key.size());
  std::string out;
  for (const auto& [key, value] : rows) {
    out += key;
    out.append(width - key.size() + 2, ' ');
    out += value;
    out += "\n";
  }
  return out;
}

std::string metrics_jsonl(const training::FitResult& fit) {
  std::string out;
  for (const auto& rec : fit.log) {
    json j;
    j["epoch"] = rec.epoch;
    j["train_loss"] = rec.train_loss;
    j["train_trigger"] = rec.train_trigger;
    j["train_relation"] = rec.train_relation;
    j["train_binary"] = rec.train_binary;
    j["dev_relation_accuracy"] = rec.dev_relation_accuracy;
    j["dev_gate_accuracy"] = rec.dev_gate_accuracy;
    j["dev_trigger_exact_match"] = rec.dev_trigger_exact_match;
    j["sampling"] = json{{"gate_gold", rec.sampling.gate_gold},
                         {"gate_model", rec.sampling.gate_model},
                         {"trigger_gold", rec.sampling.trigger_gold},
                         {"trigger_model", rec.sampling.trigger_model}};
    out += j.dump() + "\n";
  }
  return out;
}

// Checkpoint plus the three log files every fitting command emits.
// Wall-clock time goes to its own file so metrics.jsonl stays byte-stable
// across reruns.
CommandPaths write_artifacts(const std::string& out_dir, const char* command,
                             const model::TrendModel& m, const tokenizer::Vocab& vocab,
                             const evaluation::RelationOntology& ontology, uint64_t seed,
                             const std::map<std::string, std::string>& snapshot,
                             const std::string& source_fp, const training::FitResult& fit,
                             size_t n_train, size_t n_dev, double wall_seconds) {
  CommandPaths paths;
  paths.out_dir = out_dir;
  make_dir(out_dir);
  paths.checkpoint_dir = path_join(out_dir, "checkpoint");
  checkpoint::save(paths.checkpoint_dir, m, vocab, ontology, seed, snapshot, source_fp);

  paths.metrics = path_join(out_dir, "metrics.jsonl");
  write_file(paths.metrics, metrics_jsonl(fit));

  std::vector<std::pair<std::string, std::string>> rows;
  rows.emplace_back("command", command);
  rows.emplace_back("checkpoint", paths.checkpoint_dir);
  rows.emplace_back("train_instances", std::to_string(n_train));
  rows.emplace_back("dev_instances", std::to_string(n_dev));
  rows.emplace_back("epochs", std::to_string(fit.log.size()));
  if (!fit.log.empty()) {
    const auto& last = fit.log.back();
    rows.emplace_back("final_train_loss", fmt4(last.train_loss));
    rows.emplace_back("final_dev_relation_accuracy", fmt4(last.dev_relation_accuracy));
    rows.emplace_back("final_dev_gate_accuracy", fmt4(last.dev_gate_accuracy));
    rows.emplace_back("final_dev_trigger_em", fmt4(last.dev_trigger_exact_match));
  }
  paths.summary = path_join(out_dir, "summary.txt");
  write_file(paths.summary, table(rows));

  paths.timing = path_join(out_dir, "timing.jsonl");
  json t{{"command", command}, {"wall_seconds", wall_seconds}};
  write_file(paths.timing, t.dump() + "\n");
  return paths;
}

int snapshot_int(const std::map<std::string, std::string>& snapshot, const std::string& key,
                 int fallback) {
  auto it = snapshot.find(key);
  if (it == snapshot.end()) return fallback;
  try {
    return std::stoi(it->second);
  } catch (const std::exception&) {
    return fallback;
  }
}

struct Groups {
  // One entry per distinct (dialogue, pair) id, in first appearance order.
  std::vector<std::string> ids;
  std::vector<size_t> first;                // index of the first instance
  std::vector<std::vector<size_t>> members;  // all duplicated instances
};

Groups group_instances(const std::vector<corpus::TokenizedInstance>& insts) {
  Groups g;
  std::map<std::string, size_t> where;
  for (size_t i = 0; i < insts.size(); ++i) {
    auto it = where.find(insts[i].example_id);
    if (it == where.end()) {
      where[insts[i].example_id] = g.ids.size();
      g.ids.push_back(insts[i].example_id);
      g.first.push_back(i);
      g.members.push_back({i});
    } else {
      g.members[it->second].push_back(i);
    }
  }
  return g;
}

double wall_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

CommandPaths cmd_train(const config::Config& cfg) {
  check_device(cfg);
  auto t0 = std::chrono::steady_clock::now();

  std::string backbone = cfg.get("encoder.backbone", "tiny");
  model::EncoderConfig enc = model::EncoderConfig::named(backbone);
  evaluation::RelationOntology ontology =
      evaluation::RelationOntology::load_file(cfg.get("ontology.path"));

  std::string format = cfg.get("corpus.format", "annotated");
  auto raw_train = load_corpus(cfg, cfg.get("corpus.train"), format, ontology);
  auto raw_dev = cfg.has("corpus.dev")
                     ? load_corpus(cfg, cfg.get("corpus.dev"), format, ontology)
                     : raw_train;

  int cap = cfg.get_int("corpus.speaker_cap", 9);
  int max_vocab = cfg.get_int("encoder.max_vocab", 30000);
  tokenizer::Vocab vocab =
      tokenizer::Vocab::build(corpus::vocab_texts(raw_train, cap), cap, max_vocab);
  enc.vocab_size = vocab.size();

  model::ModelConfig mc;
  mc.encoder = enc;
  mc.relations = ontology.size();
  mc.span_window = cfg.get_int("training.span_window", mc.span_window);

  training::TrainConfig tc = train_config_from(cfg, backbone);

  auto train = corpus::make_instances(raw_train, vocab, enc.max_len, cap);
  auto dev = corpus::make_instances(raw_dev, vocab, enc.max_len, cap);

  model::TrendModel m(mc, tc.seed);
  training::FitResult fit = training::fit(m, train, dev, tc);

  std::string out_dir = cfg.get("output.dir", "trend_out");
  return write_artifacts(out_dir, "train", m, vocab, ontology, tc.seed, cfg.snapshot(), "",
                         fit, train.size(), dev.size(), wall_since(t0));
}

CommandPaths cmd_transfer(const config::Config& cfg) {
  check_device(cfg);
  auto t0 = std::chrono::steady_clock::now();

  checkpoint::Loaded source = checkpoint::load(cfg.get("transfer.source"));
  evaluation::RelationOntology ontology =
      evaluation::RelationOntology::load_file(cfg.get("ontology.path"));

  std::string format = cfg.get("corpus.format", "free");
  auto raw_train = load_corpus(cfg, cfg.get("corpus.train"), format, ontology);
  auto raw_dev = cfg.has("corpus.dev")
                     ? load_corpus(cfg, cfg.get("corpus.dev"), format, ontology)
                     : raw_train;

  int cap = snapshot_int(source.manifest.config_snapshot, "corpus.speaker_cap", 9);
  cap = cfg.get_int("corpus.speaker_cap", cap);
  const model::EncoderConfig& enc = source.manifest.config.encoder;

  transfer::FineTuneConfig ft;
  ft.lr = cfg.get_double("transfer.lr", ft.lr);
  ft.epochs = cfg.get_int("transfer.epochs", ft.epochs);
  ft.batch_size = cfg.get_int("transfer.batch_size", ft.batch_size);
  ft.seed = cfg.get_uint64("transfer.seed", ft.seed);
  ft.clip_norm = cfg.get_double("transfer.clip_norm", ft.clip_norm);
  ft.relation_weight = cfg.get_double("transfer.w_relation", ft.relation_weight);
  ft.freeze_gate_span = cfg.get_bool("transfer.freeze_gate_span", ft.freeze_gate_span);
  ft.force_gate_on = cfg.get_bool("transfer.force_gate_on", ft.force_gate_on);

  transfer::reinit_relation_head(*source.params, enc.dim, ontology.size(), ft.seed);

  model::ModelConfig mc = source.manifest.config;
  mc.relations = ontology.size();
  model::TrendModel m(mc, std::move(source.params), ft.seed);

  auto train = corpus::make_instances(raw_train, source.vocab, enc.max_len, cap);
  auto dev = corpus::make_instances(raw_dev, source.vocab, enc.max_len, cap);

  training::FitResult fit = transfer::fine_tune(m, train, dev, ft);

  std::string out_dir = cfg.get("output.dir", "trend_out");
  return write_artifacts(out_dir, "transfer", m, source.vocab, ontology, ft.seed,
                         cfg.snapshot(), source.manifest.params_fingerprint, fit,
                         train.size(), dev.size(), wall_since(t0));
}

CommandPaths cmd_evaluate(const EvaluateOptions& opts, const config::Config& cfg) {
  check_device(cfg);
  checkpoint::Loaded ckpt = checkpoint::load(opts.checkpoint);
  model::TrendModel m = ckpt.make_model();

  auto raw = load_corpus(cfg, opts.input, opts.format, ckpt.ontology);
  int cap = snapshot_int(ckpt.manifest.config_snapshot, "corpus.speaker_cap", 9);
  cap = cfg.get_int("corpus.speaker_cap", cap);
  auto insts =
      corpus::make_instances(raw, ckpt.vocab, ckpt.manifest.config.encoder.max_len, cap);

  Groups groups = group_instances(insts);
  std::vector<model::TrendModel::Prediction> preds(groups.ids.size());
  for (size_t g = 0; g < groups.ids.size(); ++g)
    preds[g] = m.predict(insts[groups.first[g]], opts.force_gate_on);

  CommandPaths paths;
  paths.out_dir = opts.out_dir;
  make_dir(opts.out_dir);

  std::string pred_lines;
  std::string trigger_lines;
  size_t gates_on = 0;
  for (size_t g = 0; g < groups.ids.size(); ++g) {
    const auto& p = preds[g];
    const auto& inst = insts[groups.first[g]];
    std::string text = corpus::span_text(inst, p.trigger);
    json j;
    j["id"] = groups.ids[g];
    j["relation"] = p.relation;
    j["relation_name"] = ckpt.ontology.label(p.relation);
    j["gate"] = p.gate;
    j["trigger"] = p.trigger.exists ? json::array({p.trigger.start, p.trigger.end})
                                    : json(nullptr);
    j["trigger_text"] = p.gate ? json(text) : json(nullptr);
    pred_lines += j.dump() + "\n";
    trigger_lines += groups.ids[g];
    trigger_lines += "\t";
    trigger_lines += p.gate ? ("explicit\t" + text) : "implicit\t";
    trigger_lines += "\n";
    if (p.gate) ++gates_on;
  }
  paths.predictions = path_join(opts.out_dir, "predictions.jsonl");
  write_file(paths.predictions, pred_lines);
  if (opts.predictions_only) return paths;

  paths.triggers = path_join(opts.out_dir, "triggers.txt");
  write_file(paths.triggers, trigger_lines);

  std::vector<evaluation::RelationPair> pred_pairs;
  std::vector<evaluation::RelationPair> gold_pairs;
  for (size_t g = 0; g < groups.ids.size(); ++g) {
    pred_pairs.emplace_back(groups.ids[g], preds[g].relation);
    for (size_t i : groups.members[g])
      gold_pairs.emplace_back(groups.ids[g], insts[i].relation_label);
  }
  double micro = evaluation::micro_f1(pred_pairs, gold_pairs);
  double gate_rate =
      groups.ids.empty() ? 0.0 : static_cast<double>(gates_on) / groups.ids.size();

  json report;
  report["corpus"] = opts.input;
  report["format"] = opts.format;
  report["pairs"] = groups.ids.size();
  report["instances"] = insts.size();
  report["micro_f1"] = micro;
  report["gate_on_rate"] = gate_rate;

  std::vector<std::pair<std::string, std::string>> rows;
  rows.emplace_back("corpus", opts.input);
  rows.emplace_back("format", opts.format);
  rows.emplace_back("pairs", std::to_string(groups.ids.size()));
  rows.emplace_back("instances", std::to_string(insts.size()));
  rows.emplace_back("micro_f1", fmt4(micro));
  rows.emplace_back("gate_on_rate", fmt4(gate_rate));

  if (opts.format == "annotated") {
    training::EvalSnapshot snap = training::evaluate_snapshot(m, insts, opts.force_gate_on);
    report["relation_accuracy"] = snap.relation_accuracy;
    report["gate_accuracy"] = snap.gate_accuracy;
    report["trigger_em"] = snap.trigger_exact_match;
    report["trigger_instances"] = snap.trigger_instances;
    rows.emplace_back("relation_accuracy", fmt4(snap.relation_accuracy));
    rows.emplace_back("gate_accuracy", fmt4(snap.gate_accuracy));
    rows.emplace_back("trigger_em", fmt4(snap.trigger_exact_match));
    rows.emplace_back("trigger_instances", std::to_string(snap.trigger_instances));
  } else {
    std::vector<int> flat_preds;
    std::vector<int> flat_golds;
    for (size_t g = 0; g < groups.ids.size(); ++g) {
      for (size_t i : groups.members[g]) {
        flat_preds.push_back(preds[g].relation);
        flat_golds.push_back(insts[i].relation_label);
      }
    }
    std::vector<int> grans = ckpt.ontology.coarse_granularities();
    grans.push_back(ckpt.ontology.size());
    json blocks;
    for (int g : grans) {
      evaluation::AccuracyMacro am =
          evaluation::accuracy_and_macro_f(flat_preds, flat_golds, ckpt.ontology, g);
      blocks[std::to_string(g)] = json{{"accuracy", am.accuracy}, {"macro_f", am.macro_f}};
      rows.emplace_back("accuracy@" + std::to_string(g), fmt4(am.accuracy));
      rows.emplace_back("macro_f@" + std::to_string(g), fmt4(am.macro_f));
    }
    report["granularities"] = blocks;
    if (ckpt.ontology.has_partition()) {
      evaluation::SeenUnseenF1 su =
          evaluation::seen_unseen_f1(pred_pairs, gold_pairs, ckpt.ontology);
      report["seen_f1"] = su.seen;
      report["unseen_f1"] = su.unseen;
      rows.emplace_back("seen_f1", su.seen_empty ? "n/a" : fmt4(su.seen));
      rows.emplace_back("unseen_f1", su.unseen_empty ? "n/a" : fmt4(su.unseen));
    }
  }

  paths.report_json = path_join(opts.out_dir, "report.json");
  write_file(paths.report_json, report.dump(2) + "\n");
  paths.report_text = path_join(opts.out_dir, "report.txt");
  write_file(paths.report_text, table(rows));
  return paths;
}

CommandPaths cmd_predict(const PredictOptions& opts, const config::Config& cfg) {
  check_device(cfg);
  checkpoint::Loaded ckpt = checkpoint::load(opts.checkpoint);
  model::TrendModel m = ckpt.make_model();

  auto raw = corpus::load_query_pairs_file(opts.input);
  int cap = snapshot_int(ckpt.manifest.config_snapshot, "corpus.speaker_cap", 9);
  cap = cfg.get_int("corpus.speaker_cap", cap);
  auto insts =
      corpus::make_instances(raw, ckpt.vocab, ckpt.manifest.config.encoder.max_len, cap);

  std::string lines;
  for (const auto& inst : insts) {
    model::TrendModel::Prediction p = m.predict(inst, opts.force_gate_on);
    json j;
    j["id"] = inst.example_id;
    j["relation"] = ckpt.ontology.label(p.relation);
    j["relation_id"] = p.relation;
    j["gate"] = p.gate;
    j["trigger"] = p.gate ? corpus::span_text(inst, p.trigger) : std::string("implicit");
    lines += j.dump() + "\n";
  }

  CommandPaths paths;
  if (opts.output.empty()) {
    std::cout << lines;
    paths.predictions = "-";
  } else {
    write_file(opts.output, lines);
    paths.predictions = opts.output;
  }
  return paths;
}

namespace {

void print_file(const std::string& path) {
  if (!path.empty()) std::cout << read_file(path);
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"trigger-enhanced dialogue relation extraction"};
  app.require_subcommand(1);

  std::string config_path;
  std::string device = "cpu";
  std::string backbone;
  std::string output;
  std::string source;
  uint64_t seed = 0;
  bool force_gate_on = false;
  bool predictions_only = false;
  EvaluateOptions eval_opts;
  PredictOptions pred_opts;

  CLI::App* train = app.add_subcommand("train", "joint training from a config file");
  train->add_option("--config", config_path, "config file")->required();
  train->add_option("--seed", seed, "training seed override");
  train->add_option("--backbone", backbone, "encoder preset override")
      ->check(CLI::IsMember({"tiny", "base", "large"}));
  train->add_option("--device", device, "compute device (cpu only)");
  train->add_option("--output", output, "output directory override");

  CLI::App* transfer = app.add_subcommand("transfer", "relation-head transfer fine-tuning");
  transfer->add_option("--config", config_path, "target config file")->required();
  transfer->add_option("--source", source, "source checkpoint directory");
  transfer->add_option("--seed", seed, "fine-tune seed override");
  transfer->add_option("--device", device, "compute device (cpu only)");
  transfer->add_option("--output", output, "output directory override");
  transfer->add_flag("--force-gate-on", force_gate_on, "bypass the binary gate");

  CLI::App* evaluate = app.add_subcommand("evaluate", "score a corpus with a checkpoint");
  evaluate->add_option("--checkpoint", eval_opts.checkpoint, "checkpoint directory")
      ->required();
  evaluate->add_option("--input", eval_opts.input, "corpus file")->required();
  evaluate->add_option("--format", eval_opts.format, "corpus format")
      ->check(CLI::IsMember({"annotated", "free"}));
  evaluate->add_option("--output", eval_opts.out_dir, "report directory");
  evaluate->add_option("--config", config_path, "optional config for corpus field names");
  evaluate->add_option("--device", device, "compute device (cpu only)");
  evaluate->add_flag("--predictions-only", predictions_only,
                     "write the interchange predictions and skip metrics");
  evaluate->add_flag("--force-gate-on", force_gate_on, "bypass the binary gate");

  CLI::App* predict = app.add_subcommand("predict", "predict relations for query pairs");
  predict->add_option("--checkpoint", pred_opts.checkpoint, "checkpoint directory")
      ->required();
  predict->add_option("--input", pred_opts.input, "query pair file")->required();
  predict->add_option("--output", pred_opts.output, "predictions file (default stdout)");
  predict->add_option("--config", config_path, "optional config for preprocessing keys");
  predict->add_option("--device", device, "compute device (cpu only)");
  predict->add_flag("--force-gate-on", force_gate_on, "bypass the binary gate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (train->parsed()) {
      config::Config cfg = config::Config::load_file(config_path);
      cfg.set("cli.device", device);
      if (train->count("--seed")) cfg.set("training.seed", std::to_string(seed));
      if (train->count("--backbone")) cfg.set("encoder.backbone", backbone);
      if (train->count("--output")) cfg.set("output.dir", output);
      CommandPaths paths = cmd_train(cfg);
      std::cout << "checkpoint " << paths.checkpoint_dir << "\n";
      print_file(paths.summary);
    } else if (transfer->parsed()) {
      config::Config cfg = config::Config::load_file(config_path);
      cfg.set("cli.device", device);
      if (transfer->count("--seed")) cfg.set("transfer.seed", std::to_string(seed));
      if (transfer->count("--source")) cfg.set("transfer.source", source);
      if (transfer->count("--output")) cfg.set("output.dir", output);
      if (force_gate_on) cfg.set("transfer.force_gate_on", "true");
      CommandPaths paths = cmd_transfer(cfg);
      std::cout << "checkpoint " << paths.checkpoint_dir << "\n";
      print_file(paths.summary);
    } else if (evaluate->parsed()) {
      config::Config cfg;
      if (evaluate->count("--config")) cfg = config::Config::load_file(config_path);
      cfg.set("cli.device", device);
      eval_opts.predictions_only = predictions_only;
      eval_opts.force_gate_on = force_gate_on;
      CommandPaths paths = cmd_evaluate(eval_opts, cfg);
      std::cout << "predictions " << paths.predictions << "\n";
      print_file(paths.report_text);
    } else if (predict->parsed()) {
      config::Config cfg;
      if (predict->count("--config")) cfg = config::Config::load_file(config_path);
      cfg.set("cli.device", device);
      pred_opts.force_gate_on = force_gate_on;
      cmd_predict(pred_opts, cfg);
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace trend::cli
