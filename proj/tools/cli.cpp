// Copyright 2026 The DMR Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "cli.hpp"

#include <filesystem>
#include <ostream>

#include "CLI11.hpp"
#include "dmr/synth.hpp"
#include "dmr/training/config.hpp"
#include "dmr/training/trainer.hpp"
#include "pipeline.hpp"

namespace dmr::cli {

namespace {

namespace fs = std::filesystem;

fs::path ManifestPathFor(const fs::path& output) {
  fs::path p = output;
  p += ".manifest.json";
  return p;
}

// Entries of a key-value file fill options that were not given as flags.
// Keys are option names with '_' or '-'.
nlohmann::json ApplyConfigFile(CLI::App* sub, const std::string& path) {
  nlohmann::json applied = nlohmann::json::object();
  if (path.empty()) return applied;
  for (const auto& [key, value] : ReadKeyValueFile(path)) {
    std::string name = "--" + key;
    std::replace(name.begin(), name.end(), '_', '-');
    CLI::Option* opt = sub->get_option_no_throw(name);
    if (opt == nullptr || name == "--config") {
      throw Error(ErrorCategory::kConfig, path + ": unknown key " + key);
    }
    if (opt->count() > 0) continue;
    opt->clear();
    opt->add_result(value);
    opt->run_callback();
    applied[key] = value;
  }
  return applied;
}

std::vector<AnnotatedPassage> LoadOrThrow(const std::string& path, const std::string& format,
                                          std::ostream& err) {
  LoadResult r = LoadCorpusAuto(path, format);
  if (!r.rejects.empty()) err << path << ": skipped " << r.rejects.size() << " malformed record(s)\n";
  if (r.passages.empty()) throw Error(ErrorCategory::kData, path + ": no usable passages");
  return std::move(r.passages);
}

struct IngestArgs {
  std::string input, format = "auto", out, rejects;
};

void Ingest(const IngestArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  RunManifest manifest("ingest", argv);
  manifest.config = {{"input", a.input}, {"format", a.format}};
  const LoadResult r = LoadCorpusAuto(a.input, a.format);
  manifest.AddInput(a.input);
  WriteExhaustive(a.out, r.passages);
  manifest.AddOutput(a.out);
  if (!a.rejects.empty()) {
    WriteFileAtomic(a.rejects, RejectsToJson(r.rejects).dump(2) + "\n");
    manifest.AddOutput(a.rejects);
  }
  manifest.extra = {{"passages", r.passages.size()}, {"rejects", r.rejects.size()}};
  manifest.Write(ManifestPathFor(a.out));
  out << "passages = " << r.passages.size() << "\nrejects = " << r.rejects.size() << "\n";
}

struct StatsArgs {
  std::string input, format = "auto", out;
  bool json = false;
};

void Stats(const StatsArgs& a, const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  const std::vector<AnnotatedPassage> corpus = LoadOrThrow(a.input, a.format, err);
  const CorpusStats stats = ComputeCorpusStats(corpus);
  const std::string text = a.json ? StatsToJson(stats).dump(2) + "\n" : StatsToKeyValue(stats);
  out << text;
  if (!a.out.empty()) {
    RunManifest manifest("stats", argv);
    manifest.config = {{"input", a.input}, {"format", a.format}, {"json", a.json}};
    manifest.AddInput(a.input);
    WriteFileAtomic(a.out, text);
    manifest.AddOutput(a.out);
    manifest.Write(ManifestPathFor(a.out));
  }
}

struct SynthArgs {
  int n = 2000;
  std::uint64_t seed = 7;
  std::string out, catalog, eval_out;
  int eval_n = 0;
};

void Synth(const SynthArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  RunManifest manifest("synth", argv);
  manifest.config = {{"n", a.n}, {"seed", a.seed}, {"catalog", a.catalog.empty() ? "builtin" : a.catalog},
                     {"eval_n", a.eval_n}};
  manifest.seeds = {a.seed};
  if (a.eval_n < 0 || a.eval_n >= a.n) throw Error(ErrorCategory::kUsage, "--eval-n must be in [0, n)");
  if (a.eval_n > 0 && a.eval_out.empty()) throw Error(ErrorCategory::kUsage, "--eval-n needs --eval-out");
  TemplateCatalog catalog;
  if (a.catalog.empty()) {
    catalog = DefaultCookingTemplates();
  } else {
    catalog = LoadCatalog(a.catalog);
    manifest.AddInput(a.catalog);
  }
  const std::vector<AnnotatedPassage> all = Generate(catalog.templates, catalog.fillers, a.n, a.seed);
  const auto split = all.begin() + (a.n - a.eval_n);
  WriteExhaustive(a.out, std::vector<AnnotatedPassage>(all.begin(), split));
  manifest.AddOutput(a.out);
  if (a.eval_n > 0) {
    WriteExhaustive(a.eval_out, std::vector<AnnotatedPassage>(split, all.end()));
    manifest.AddOutput(a.eval_out);
  }
  manifest.Write(ManifestPathFor(a.out));
  out << "passages = " << (a.n - a.eval_n) << "\n";
  if (a.eval_n > 0) out << "eval_passages = " << a.eval_n << "\n";
}

struct TrainArgs {
  std::string kind, corpus, format = "auto", out, config;
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  int epochs = 0;
};

void Train(const TrainArgs& a, CLI::App* sub, const std::vector<std::string>& argv, std::ostream& out,
           std::ostream& err) {
  TrainConfig cfg = a.config.empty() ? TrainConfig{} : TrainConfig::FromFile(a.config);
  for (const std::string& kv : a.sets) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorCategory::kUsage, "--set expects key=value, got " + kv);
    cfg.Set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (sub->get_option("--seed")->count() > 0) cfg.seed = a.seed;
  if (sub->get_option("--epochs")->count() > 0) cfg.epochs = a.epochs;
  cfg.Validate();

  RunManifest manifest("train " + a.kind, argv);
  manifest.config = cfg.ToMap();
  manifest.config["corpus"] = a.corpus;
  manifest.config["format"] = a.format;
  manifest.seeds = {cfg.seed};
  const std::vector<AnnotatedPassage> corpus = LoadOrThrow(a.corpus, a.format, err);
  manifest.AddInput(a.corpus);
  if (!a.config.empty()) manifest.AddInput(a.config);

  TrainOptions options;
  options.checkpoint_dir = a.out;
  options.progress = [&err](const std::string& m) { err << m << "\n"; };
  fs::create_directories(a.out);
  const std::vector<Passage> passages = PassagesOf(corpus);
  TrainLog log;
  bool diverged = false;
  int epochs_run = 0;
  if (a.kind == "dmr") {
    const DmrTrainResult r = TrainDmr(passages, cfg, options);
    log = r.log;
    diverged = r.diverged;
    epochs_run = r.epochs_run;
    manifest.AddOutput(fs::path(a.out) / "masker.ckpt");
    manifest.AddOutput(fs::path(a.out) / "reconstructor.ckpt");
  } else {
    const std::vector<TokenLabelSeq> labels = GoldLabels(corpus);
    const SupervisedTrainResult r = TrainSupervised(passages, labels, cfg, options);
    log = r.log;
    diverged = r.diverged;
    epochs_run = r.epochs_run;
    manifest.AddOutput(fs::path(a.out) / "classifier.ckpt");
  }
  WriteFileAtomic(fs::path(a.out) / "train_log.jsonl", log.ToJsonl());
  WriteFileAtomic(fs::path(a.out) / "config.conf", cfg.ToKeyValue());
  manifest.AddOutput(fs::path(a.out) / "train_log.jsonl");
  manifest.AddOutput(fs::path(a.out) / "config.conf");
  manifest.extra = {{"epochs_run", epochs_run}, {"diverged", diverged}};
  manifest.Write(fs::path(a.out) / "manifest.json");
  out << "epochs_run = " << epochs_run << "\n";
  if (diverged) throw Error(ErrorCategory::kDivergence, "training diverged; last good weights were saved");
}

struct ExtractArgs {
  std::string model, corpus, format = "auto", out, config;
  double threshold = 0.5;
  std::string target = "kept", aggregation = "max";
};

void Extract(ExtractArgs& a, CLI::App* sub, const std::vector<std::string>& argv, std::ostream& out,
             std::ostream& err) {
  ApplyConfigFile(sub, a.config);
  ExtractionConfig cfg;
  cfg.threshold = a.threshold;
  cfg.target = ParseSelectionTarget(a.target);
  cfg.aggregation = ParseWordAggregation(a.aggregation);
  RunManifest manifest("extract", argv);
  manifest.config = {{"model", a.model}, {"corpus", a.corpus}, {"format", a.format},
                     {"threshold", cfg.threshold}, {"target", SelectionTargetName(cfg.target)},
                     {"aggregation", WordAggregationName(cfg.aggregation)}};
  const Checkpoint model = LoadCheckpoint(a.model);
  const std::vector<AnnotatedPassage> corpus = LoadOrThrow(a.corpus, a.format, err);
  manifest.AddInput(a.model);
  manifest.AddInput(a.corpus);
  if (!a.config.empty()) manifest.AddInput(a.config);
  const std::vector<ExtractionResult> results = ExtractAll(model, PassagesOf(corpus), cfg);
  WriteResults(a.out, results);
  manifest.AddOutput(a.out);
  long spans = 0, truncated = 0;
  for (const ExtractionResult& r : results) {
    spans += static_cast<long>(r.spans.size());
    truncated += r.truncated ? 1 : 0;
  }
  manifest.extra = {{"spans", spans}, {"truncated_passages", truncated}};
  manifest.Write(ManifestPathFor(a.out));
  if (truncated > 0) err << "warning: " << truncated << " passage(s) truncated to the model's input length\n";
  out << "passages = " << results.size() << "\nspans = " << spans << "\n";
}

struct BaselineArgs {
  std::string method, corpus, format = "auto", out, config;
  std::string analyzer = "fallback", analysis;
  double length_ratio = 0.8;
  std::string length_rule = "at_least";
  std::string llm_config, llm_base_url, llm_model, cache_dir;
};

void Baseline(BaselineArgs& a, CLI::App* sub, const std::vector<std::string>& argv, std::ostream& out,
              std::ostream& err) {
  ApplyConfigFile(sub, a.config);
  BaselineOptions options;
  options.analyzer = a.analyzer;
  if (!a.analysis.empty()) options.analyzer_options["path"] = a.analysis;
  options.extended = {a.length_ratio, ParseLengthRule(a.length_rule)};
  if (!a.llm_config.empty()) {
    try {
      options.llm = LlmClientConfig::FromJson(nlohmann::json::parse(ReadFile(a.llm_config)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCategory::kConfig, a.llm_config + ": " + e.what());
    }
  }
  if (!a.llm_base_url.empty()) options.llm.base_url = a.llm_base_url;
  if (!a.llm_model.empty()) options.llm.model = a.llm_model;
  if (!a.cache_dir.empty()) options.llm.cache_dir = a.cache_dir;

  RunManifest manifest("baseline", argv);
  manifest.config = options.ToJson();
  manifest.config["method"] = a.method;
  manifest.config["corpus"] = a.corpus;
  manifest.config["format"] = a.format;
  const std::vector<AnnotatedPassage> corpus = LoadOrThrow(a.corpus, a.format, err);
  manifest.AddInput(a.corpus);
  if (!a.analysis.empty()) manifest.AddInput(a.analysis);
  if (!a.config.empty()) manifest.AddInput(a.config);
  BaselineRun run = RunBaseline(a.method, PassagesOf(corpus), options, err);
  WriteResults(a.out, run.results);
  manifest.AddOutput(a.out);
  manifest.extra = run.info;
  manifest.Write(ManifestPathFor(a.out));
  out << "passages = " << run.results.size() << "\n";
}

struct EvalArgs {
  std::string gold, gold_format = "auto", pred, out;
  bool macro = false, per_passage = false;
};

void Eval(const EvalArgs& a, const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  const std::vector<AnnotatedPassage> gold = LoadOrThrow(a.gold, a.gold_format, err);
  const std::vector<TokenLabelSeq> pred = LoadPredictionLabels(a.pred, gold);
  const MetricsReport report =
      TokenPrf(GoldLabels(gold), pred, a.macro ? Averaging::kMacro : Averaging::kMicro);
  out << MetricsToText(report);
  if (!a.out.empty()) {
    RunManifest manifest("eval", argv);
    manifest.config = {{"gold", a.gold}, {"gold_format", a.gold_format}, {"pred", a.pred},
                       {"averaging", a.macro ? "macro" : "micro"}};
    manifest.AddInput(a.gold);
    manifest.AddInput(a.pred);
    WriteFileAtomic(a.out, MetricsToJson(report, a.per_passage).dump(2) + "\n");
    manifest.AddOutput(a.out);
    manifest.Write(ManifestPathFor(a.out));
  }
}

MetricsReport ReportFromJson(const nlohmann::json& j) {
  return MetricsFromCounts(j.at("tp").get<long>(), j.at("fp").get<long>(), j.at("fn").get<long>());
}

struct CompareArgs {
  std::vector<std::string> methods, supervised;
  std::string out;
};

void Compare(const CompareArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  RunManifest manifest("compare", argv);
  // Rows keep first-seen order; several files under one name are seeds.
  std::vector<std::pair<std::string, bool>> order;
  std::map<std::string, std::vector<MetricsReport>> runs;
  std::map<std::string, AggregateReport> aggregates;
  const auto add = [&](const std::string& spec, bool supervised) {
    const std::size_t eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error(ErrorCategory::kUsage, "expected NAME=FILE, got " + spec);
    }
    const std::string name = spec.substr(0, eq);
    const std::string path = spec.substr(eq + 1);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(ReadFile(path));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCategory::kParse, path + ": " + e.what());
    }
    manifest.AddInput(path);
    if (std::find_if(order.begin(), order.end(), [&](const auto& o) { return o.first == name; }) == order.end()) {
      order.push_back({name, supervised});
    }
    if (j.at("f1").is_object()) {
      const auto summary = [&](const char* key) {
        return MetricSummary{j.at(key).at("mean").get<double>(), j.at(key).at("std").get<double>()};
      };
      aggregates[name] = {summary("precision"), summary("recall"), summary("f1"), j.value("runs", 1)};
    } else {
      runs[name].push_back(ReportFromJson(j));
    }
  };
  for (const std::string& s : a.methods) add(s, false);
  for (const std::string& s : a.supervised) add(s, true);
  if (order.empty()) throw Error(ErrorCategory::kUsage, "nothing to compare");
  std::vector<MethodRow> rows;
  for (const auto& [name, supervised] : order) {
    if (aggregates.contains(name) && runs.contains(name)) {
      throw Error(ErrorCategory::kData, name + ": cannot mix aggregate and per-run reports");
    }
    rows.push_back({name, supervised, aggregates.contains(name) ? aggregates[name] : AggregateRuns(runs[name])});
  }
  const ComparisonTable table = MakeComparisonTable(rows);
  out << table.ToText();
  if (!a.out.empty()) {
    const fs::path base = a.out;
    WriteFileAtomic(fs::path(a.out + ".txt"), table.ToText());
    WriteFileAtomic(fs::path(a.out + ".json"), table.ToJson().dump(2) + "\n");
    WriteFileAtomic(fs::path(a.out + ".tsv"), table.ToTsv());
    for (const char* ext : {".txt", ".json", ".tsv"}) manifest.AddOutput(a.out + ext);
    manifest.Write(a.out + ".manifest.json");
  }
}

}  // namespace

int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv, argv + argc);
  CLI::App app{"Candidate-answer extraction: data, training, baselines and evaluation", "dmr"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  IngestArgs ingest;
  CLI::App* ingest_cmd = app.add_subcommand("ingest", "Load a SQuAD or exhaustive corpus and write exhaustive JSONL");
  ingest_cmd->add_option("--input", ingest.input, "Corpus file")->required()->check(CLI::ExistingFile);
  ingest_cmd->add_option("--format", ingest.format, "auto, squad or exhaustive")->capture_default_str();
  ingest_cmd->add_option("--out", ingest.out, "Output JSONL")->required();
  ingest_cmd->add_option("--rejects", ingest.rejects, "Write rejected records here (JSON)");

  StatsArgs stats;
  CLI::App* stats_cmd = app.add_subcommand("stats", "Passage count, average length and answer/context ratio");
  stats_cmd->add_option("--input", stats.input, "Corpus file")->required()->check(CLI::ExistingFile);
  stats_cmd->add_option("--format", stats.format, "auto, squad or exhaustive")->capture_default_str();
  stats_cmd->add_flag("--json", stats.json, "Print JSON instead of key = value");
  stats_cmd->add_option("--out", stats.out, "Also write the report here");

  SynthArgs synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a templated corpus with exhaustive gold spans");
  synth_cmd->add_option("--n", synth.n, "Number of passages")->capture_default_str()->check(CLI::PositiveNumber);
  synth_cmd->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
  synth_cmd->add_option("--out", synth.out, "Output JSONL")->required();
  synth_cmd->add_option("--catalog", synth.catalog, "Template catalog (default: built-in cooking catalog)")
      ->check(CLI::ExistingFile);
  synth_cmd->add_option("--eval-n", synth.eval_n, "Hold out the last N passages")->capture_default_str();
  synth_cmd->add_option("--eval-out", synth.eval_out, "Output JSONL for the held-out passages");

  TrainArgs train;
  CLI::App* train_cmd = app.add_subcommand("train", "Train the masker-reconstructor or the supervised classifier");
  train_cmd->add_option("kind", train.kind, "dmr or supervised")->required()->check(CLI::IsMember({"dmr", "supervised"}));
  train_cmd->add_option("--corpus", train.corpus, "Training corpus")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--format", train.format, "auto, squad or exhaustive")->capture_default_str();
  train_cmd->add_option("--out", train.out, "Output directory")->required();
  train_cmd->add_option("--config", train.config, "Key-value training config")->check(CLI::ExistingFile);
  train_cmd->add_option("--set", train.sets, "Override one config key (key=value)");
  train_cmd->add_option("--seed", train.seed, "Random seed");
  train_cmd->add_option("--epochs", train.epochs, "Epoch cap")->check(CLI::PositiveNumber);

  ExtractArgs extract;
  CLI::App* extract_cmd = app.add_subcommand("extract", "Extract candidate spans with a trained model");
  extract_cmd->add_option("--model", extract.model, "masker.ckpt or classifier.ckpt")->required()->check(CLI::ExistingFile);
  extract_cmd->add_option("--corpus", extract.corpus, "Passages")->required()->check(CLI::ExistingFile);
  extract_cmd->add_option("--format", extract.format, "auto, squad or exhaustive")->capture_default_str();
  extract_cmd->add_option("--out", extract.out, "Output JSONL")->required();
  extract_cmd->add_option("--config", extract.config, "Key-value file with defaults for these flags")->check(CLI::ExistingFile);
  extract_cmd->add_option("--threshold", extract.threshold, "Selection threshold")->capture_default_str();
  extract_cmd->add_option("--target", extract.target, "kept or masked")->capture_default_str();
  extract_cmd->add_option("--aggregation", extract.aggregation, "max or mean over subwords")->capture_default_str();

  BaselineArgs baseline;
  CLI::App* baseline_cmd = app.add_subcommand("baseline", "Run a rule-based or prompt baseline");
  baseline_cmd->add_option("--method", baseline.method, "np, ne, extended_ne, diverseqa, adjp, vp, s or llm")->required();
  baseline_cmd->add_option("--corpus", baseline.corpus, "Passages")->required()->check(CLI::ExistingFile);
  baseline_cmd->add_option("--format", baseline.format, "auto, squad or exhaustive")->capture_default_str();
  baseline_cmd->add_option("--out", baseline.out, "Output JSONL")->required();
  baseline_cmd->add_option("--config", baseline.config, "Key-value file with defaults for these flags")->check(CLI::ExistingFile);
  baseline_cmd->add_option("--analyzer", baseline.analyzer, "Registered analyzer name")->capture_default_str();
  baseline_cmd->add_option("--analysis", baseline.analysis, "Precomputed analyses for the jsonl analyzer");
  baseline_cmd->add_option("--length-ratio", baseline.length_ratio, "Extended NE sentence-length ratio")->capture_default_str();
  baseline_cmd->add_option("--length-rule", baseline.length_rule, "at_least or at_most")->capture_default_str();
  baseline_cmd->add_option("--llm-config", baseline.llm_config, "JSON client config for the prompt baseline");
  baseline_cmd->add_option("--llm-base-url", baseline.llm_base_url, "Chat-completion base URL");
  baseline_cmd->add_option("--llm-model", baseline.llm_model, "Model id");
  baseline_cmd->add_option("--cache-dir", baseline.cache_dir, "Response cache directory");

  EvalArgs eval;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Token-level precision, recall and F1");
  eval_cmd->add_option("--gold", eval.gold, "Annotated corpus")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--gold-format", eval.gold_format, "auto, squad or exhaustive")->capture_default_str();
  eval_cmd->add_option("--pred", eval.pred, "Extraction results or an annotated corpus")->required()->check(CLI::ExistingFile);
  eval_cmd->add_flag("--macro", eval.macro, "Average per passage instead of over tokens");
  eval_cmd->add_flag("--per-passage", eval.per_passage, "Include per-passage counts in --out");
  eval_cmd->add_option("--out", eval.out, "Write the report as JSON");

  CompareArgs compare;
  CLI::App* compare_cmd = app.add_subcommand("compare", "Build a comparison table from eval reports");
  compare_cmd->add_option("--method", compare.methods, "NAME=REPORT for an unsupervised method (repeat per seed)");
  compare_cmd->add_option("--supervised", compare.supervised, "NAME=REPORT for a supervised method");
  compare_cmd->add_option("--out", compare.out, "Output prefix for .txt, .json and .tsv");

  std::string repro_config, repro_out;
  CLI::App* repro_cmd = app.add_subcommand("repro", "Run a method x seed experiment from a JSON config");
  repro_cmd->add_option("--config", repro_config, "Experiment config")->required()->check(CLI::ExistingFile);
  repro_cmd->add_option("--out", repro_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*ingest_cmd) {
      Ingest(ingest, args, out);
    } else if (*stats_cmd) {
      Stats(stats, args, out, err);
    } else if (*synth_cmd) {
      Synth(synth, args, out);
    } else if (*train_cmd) {
      Train(train, train_cmd, args, out, err);
    } else if (*extract_cmd) {
      Extract(extract, extract_cmd, args, out, err);
    } else if (*baseline_cmd) {
      Baseline(baseline, baseline_cmd, args, out, err);
    } else if (*eval_cmd) {
      Eval(eval, args, out, err);
    } else if (*compare_cmd) {
      Compare(compare, args, out);
    } else if (*repro_cmd) {
      const ReproOutcome outcome = RunRepro(repro_config, repro_out, err);
      out << outcome.summary.dump(2) << "\n";
      if (!outcome.complete) {
        err << "error [" << CategoryName(ErrorCategory::kData) << "]: experiment stopped early; partial results kept in "
            << repro_out << "\n";
        return 1;
      }
    }
  } catch (const Error& e) {
    err << "error [" << CategoryName(e.category()) << "]: " << e.what() << "\n";
    return e.category() == ErrorCategory::kUsage ? 2 : 1;
  } catch (const CLI::Error& e) {
    err << "error [" << CategoryName(ErrorCategory::kConfig) << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error [internal]: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace dmr::cli
