// Command-line front end: generate synthetic corpora, annotate real logs,
// train translation models, and evaluate them. Every run prints its fully
// resolved configuration so results can be reproduced from the log alone.
//
// Exit codes: 0 success, 1 I/O failure, 2 invalid arguments, 3 training
// divergence (non-finite loss).

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "logxlate/logxlate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace logxlate;

namespace {

// ---- --config support -------------------------------------------------
//
// A JSON file may hold any long option name (without the leading dashes);
// explicit command-line flags win. CLI11 applies defaults only after parse,
// so "not given on the command line" is option->count() == 0.
json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw std::invalid_argument("config file " + path + ": " + e.what());
  }
}

void merge_config(CLI::App* cmd, const json& cfg) {
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    CLI::Option* opt = cmd->get_option_no_throw("--" + it.key());
    if (opt == nullptr) {
      throw std::invalid_argument("config file option '" + it.key() +
                                  "' does not match any flag of subcommand '" +
                                  cmd->get_name() + "'");
    }
    if (opt->count() > 0) continue;  // explicit flag wins
    const json& v = it.value();
    if (v.is_array()) {
      for (const json& item : v) {
        opt->add_result(item.is_string() ? item.get<std::string>()
                                         : item.dump());
      }
    } else {
      opt->add_result(v.is_string() ? v.get<std::string>() : v.dump());
    }
    opt->run_callback();
  }
}

void apply_config_flag(CLI::App* cmd, const std::string& config_path) {
  if (config_path.empty()) return;
  merge_config(cmd, load_config_file(config_path));
}

std::string json_escape(const std::string& s) { return json(s).dump(); }

// ---- generate ----------------------------------------------------------

struct GenerateArgs {
  std::string profile = "TT";
  std::string mix;  // custom profile: "elf=0.4,clf=0.24,random=0.36"
  std::size_t count = 2000;
  std::uint64_t seed = 1;
  std::string out;
  int min_fields = 2;
  int max_fields = 15;
  std::string config;
};

DatasetProfile resolve_profile(const GenerateArgs& a) {
  if (a.profile != "custom") {
    if (!a.mix.empty()) {
      throw std::invalid_argument("--mix requires --profile custom");
    }
    return profile_by_name(a.profile, a.count, a.seed);
  }
  if (a.mix.empty()) {
    throw std::invalid_argument("--profile custom requires --mix");
  }
  DatasetProfile p{"custom", {}, a.count, a.seed};
  std::stringstream ss(a.mix);
  std::string part;
  while (std::getline(ss, part, ',')) {
    auto eq = part.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("--mix entry '" + part +
                                  "' is not source=proportion");
    }
    std::string name = part.substr(0, eq);
    double prop = std::stod(part.substr(eq + 1));
    MixEntry entry;
    entry.proportion = prop;
    entry.min_fields = a.min_fields;
    entry.max_fields = a.max_fields;
    if (name == "elf") {
      entry.source = FormatSourceKind::Elf;
    } else if (name == "clf") {
      entry.source = FormatSourceKind::Clf;
    } else if (name == "quoted-elf") {
      entry.source = FormatSourceKind::QuotedElf;
    } else if (name == "random") {
      entry.source = FormatSourceKind::Random;
    } else {
      throw std::invalid_argument("--mix source '" + name +
                                  "' is not elf|clf|quoted-elf|random");
    }
    p.mix.push_back(entry);
  }
  return p;
}

int cmd_generate(const GenerateArgs& a) {
  DatasetProfile profile = resolve_profile(a);
  validate_profile(profile);

  std::cout << "resolved_config: {\"subcommand\":\"generate\",\"profile\":"
            << json_escape(a.profile) << ",\"mix\":" << json_escape(a.mix)
            << ",\"count\":" << a.count << ",\"seed\":" << a.seed
            << ",\"min_fields\":" << a.min_fields
            << ",\"max_fields\":" << a.max_fields
            << ",\"out\":" << json_escape(a.out) << "}\n";

  std::vector<AnnotatedRecord> records = generate_dataset(profile);
  write_corpus(a.out, records);

  std::vector<double> lens;
  lens.reserve(records.size());
  for (const auto& r : records) lens.push_back(static_cast<double>(r.raw.size()));
  std::sort(lens.begin(), lens.end());
  std::cout << "records: " << records.size() << "\n"
            << "length min: " << static_cast<std::size_t>(lens.front())
            << " median: " << quantile_type7(lens, 0.5)
            << " max: " << static_cast<std::size_t>(lens.back()) << "\n"
            << "wrote: " << raw_path(a.out).string() << ", "
            << ann_path(a.out).string() << "\n";
  return 0;
}

// ---- annotate ----------------------------------------------------------

struct AnnotateArgs {
  std::string format = "elf";
  std::string in;
  std::string out;
  std::string config;
};

KnownFormat parse_format(const std::string& name) {
  if (name == "clf") return KnownFormat::Clf;
  if (name == "elf") return KnownFormat::Elf;
  if (name == "quoted-elf") return KnownFormat::QuotedElf;
  throw std::invalid_argument("--format '" + name +
                              "' is not clf|elf|quoted-elf");
}

int cmd_annotate(const AnnotateArgs& a) {
  KnownFormat format = parse_format(a.format);
  std::cout << "resolved_config: {\"subcommand\":\"annotate\",\"format\":"
            << json_escape(a.format) << ",\"in\":" << json_escape(a.in)
            << ",\"out\":" << json_escape(a.out) << "}\n";

  AnnotateFileResult result = annotate_file(a.in, format);
  write_corpus(a.out, result.records);
  const fs::path rejects = fs::path(a.out).concat(".rejects.csv");
  write_rejects_csv(rejects, result.rejects);

  std::cout << "accepted: " << result.records.size() << "\n"
            << "rejected: " << result.rejects.size() << "\n"
            << "wrote: " << raw_path(a.out).string() << ", "
            << ann_path(a.out).string() << ", " << rejects.string() << "\n";
  return 0;
}

// ---- train ---------------------------------------------------------------

struct TrainArgs {
  std::string corpus;
  std::string out = "model.ckpt";
  std::string arch = "mc";
  std::string cell = "lstm";
  ModelConfig model;
  OptimizerConfig opt;
  std::uint64_t seed = 1;
  std::string config;
};

int cmd_train(TrainArgs& a) {
  a.model.arch = parse_arch(a.arch);
  a.model.cell = parse_cell(a.cell);
  validate_model_config(a.model);
  validate_optimizer_config(a.opt);

  std::cout << "resolved_config: {\"subcommand\":\"train\",\"corpus\":"
            << json_escape(a.corpus) << ",\"out\":" << json_escape(a.out)
            << ",\"model\":" << ckpt_detail::config_to_json(a.model).dump()
            << ",\"learning_rate\":" << a.opt.learning_rate
            << ",\"beta1\":" << a.opt.beta1 << ",\"beta2\":" << a.opt.beta2
            << ",\"epsilon\":" << a.opt.epsilon
            << ",\"batch_size\":" << a.opt.batch_size
            << ",\"max_epochs\":" << a.opt.max_epochs
            << ",\"patience\":" << a.opt.patience
            << ",\"val_fraction\":" << a.opt.val_fraction
            << ",\"seed\":" << a.seed << "}\n";

  const double grid[] = {0.0, 0.2, 0.4, 0.6, 0.8};
  if (std::find(std::begin(grid), std::end(grid), a.model.dropout) ==
      std::end(grid)) {
    std::cout << "warning: dropout " << a.model.dropout
              << " is outside the usual grid {0, 0.2, 0.4, 0.6, 0.8}\n";
  }

  std::vector<AnnotatedRecord> corpus = read_corpus(a.corpus);
  TrainResult result = train(a.model, a.opt, corpus, a.seed, &std::cout);

  save_checkpoint(a.out, result.best);
  const fs::path history = fs::path(a.out).concat(".history.csv");
  write_history_csv(history, result.history);

  std::cout << "best epoch: " << result.best_epoch
            << " val_loss: " << result.best.best_val_loss << "\n"
            << "epochs run: " << result.history.size()
            << (result.early_stopped ? " (stopped early)" : "") << "\n"
            << "wrote: " << a.out << ", " << history.string() << "\n";
  return 0;
}

// ---- evaluate --------------------------------------------------------------

struct EvaluateArgs {
  std::string model;
  std::vector<std::string> corpora;
  int beam = 1;
  std::string report = "eval_report";
  std::string config;
};

int cmd_evaluate(const EvaluateArgs& a) {
  std::ostringstream corpora_json;
  for (std::size_t i = 0; i < a.corpora.size(); ++i) {
    corpora_json << (i ? "," : "") << json_escape(a.corpora[i]);
  }
  std::cout << "resolved_config: {\"subcommand\":\"evaluate\",\"model\":"
            << json_escape(a.model) << ",\"corpus\":[" << corpora_json.str()
            << "],\"beam\":" << a.beam
            << ",\"report\":" << json_escape(a.report) << "}\n";

  Checkpoint ck = load_checkpoint(a.model);
  Translator translator(ck);

  std::vector<DatasetEval> evals;
  for (const std::string& stem : a.corpora) {
    std::vector<AnnotatedRecord> corpus = read_corpus(stem);
    std::string name = fs::path(stem).filename().string();
    const double unk = unk_fraction(ck.source_vocab, corpus);
    if (unk > 0.0) {
      std::cout << "warning: " << name << ": " << unk * 100.0
                << "% of input characters are outside the model's vocabulary\n";
    }
    evals.push_back(evaluate_corpus(name, translator, corpus, a.beam));
  }
  emit_report(a.report, evals);

  auto row = [](const char* metric, const std::string& ds, const StatSummary& s) {
    std::cout << metric << ' ' << ds << ": min " << s.min << " avg " << s.avg
              << " q50 " << s.q50 << " q75 " << s.q75 << " q90 " << s.q90
              << " q95 " << s.q95 << " q99 " << s.q99 << " max " << s.max
              << "\n";
  };
  for (const DatasetEval& ev : evals) {
    row("da", ev.dataset, ev.summary.d_a);
    row("dr", ev.dataset, ev.summary.d_r);
  }
  std::cout << "wrote: " << (fs::path(a.report) / "summary.csv").string()
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"log-to-annotation translation toolkit"};
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* generate = app.add_subcommand(
      "generate", "produce a synthetic corpus with aligned annotations");
  generate->add_option("--profile", gen.profile,
                       "dataset profile: TT|TE|TM|TMp|TH|custom");
  generate->add_option("--mix", gen.mix,
                       "custom mix, e.g. elf=0.4,clf=0.24,random=0.36");
  generate->add_option("--count", gen.count, "number of records")
      ->check(CLI::PositiveNumber);
  generate->add_option("--seed", gen.seed, "generator seed");
  generate->add_option("--out", gen.out, "output stem (<stem>.raw/.ann)")
      ->required();
  generate->add_option("--min-fields", gen.min_fields,
                       "random-format lower field count");
  generate->add_option("--max-fields", gen.max_fields,
                       "random-format upper field count");
  generate->add_option("--config", gen.config, "JSON config file");

  AnnotateArgs ann;
  CLI::App* annotate = app.add_subcommand(
      "annotate", "rule-annotate a real log file of known format");
  annotate->add_option("--format", ann.format, "clf|elf|quoted-elf");
  annotate->add_option("--in", ann.in, "input log file")
      ->required()
      ->check(CLI::ExistingFile);
  annotate->add_option("--out", ann.out, "output stem")->required();
  annotate->add_option("--config", ann.config, "JSON config file");

  TrainArgs tr;
  CLI::App* train_cmd = app.add_subcommand(
      "train", "train a character translation model on an aligned corpus");
  train_cmd->add_option("--corpus", tr.corpus, "corpus stem")->required();
  train_cmd->add_option("--out", tr.out, "checkpoint path");
  train_cmd->add_option("--arch", tr.arch, "mc|ml|ms");
  train_cmd->add_option("--cell", tr.cell, "lstm|gru");
  train_cmd->add_option("--cells", tr.model.cells, "hidden units per layer");
  train_cmd->add_option("--layers", tr.model.layers, "recurrent layers");
  train_cmd->add_option("--dropout", tr.model.dropout, "dropout in [0,1)");
  train_cmd->add_option("--embedding-dim", tr.model.embedding_dim,
                        "character embedding width");
  train_cmd->add_option("--max-len", tr.model.max_len,
                        "truncate records beyond this length");
  train_cmd->add_option("--lr", tr.opt.learning_rate, "Adam learning rate");
  train_cmd->add_option("--beta1", tr.opt.beta1, "Adam beta1");
  train_cmd->add_option("--beta2", tr.opt.beta2, "Adam beta2");
  train_cmd->add_option("--epsilon", tr.opt.epsilon, "Adam epsilon");
  train_cmd->add_option("--batch", tr.opt.batch_size, "batch size");
  train_cmd->add_option("--epochs", tr.opt.max_epochs, "epoch budget");
  train_cmd->add_option("--patience", tr.opt.patience,
                        "early-stop patience (epochs)");
  train_cmd->add_option("--val-fraction", tr.opt.val_fraction,
                        "validation split fraction (0 disables)");
  train_cmd->add_option("--seed", tr.seed, "training seed");
  train_cmd->add_option("--config", tr.config, "JSON config file");

  EvaluateArgs ev;
  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "score a trained model against aligned corpora");
  evaluate->add_option("--model", ev.model, "checkpoint path")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("--corpus", ev.corpora, "corpus stem (repeatable)")
      ->required();
  evaluate->add_option("--beam", ev.beam, "beam width (1 = greedy)")
      ->check(CLI::PositiveNumber);
  evaluate->add_option("--report", ev.report, "report output directory");
  evaluate->add_option("--config", ev.config, "JSON config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (generate->parsed()) {
      apply_config_flag(generate, gen.config);
      return cmd_generate(gen);
    }
    if (annotate->parsed()) {
      apply_config_flag(annotate, ann.config);
      return cmd_annotate(ann);
    }
    if (train_cmd->parsed()) {
      apply_config_flag(train_cmd, tr.config);
      return cmd_train(tr);
    }
    if (evaluate->parsed()) {
      apply_config_flag(evaluate, ev.config);
      return cmd_evaluate(ev);
    }
  } catch (const TrainingDivergence& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
