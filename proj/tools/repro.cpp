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


#include <ostream>

#include "dmr/synth.hpp"
#include "dmr/training/config.hpp"
#include "dmr/training/trainer.hpp"
#include "pipeline.hpp"

namespace dmr::cli {

namespace {

namespace fs = std::filesystem;

const std::map<std::string, std::string>& DisplayNames() {
  static const std::map<std::string, std::string> names = {
      {"dmr", "DMR"},         {"supervised", "FT"},        {"np", "Noun Phrases"},
      {"ne", "Named Entities"}, {"extended_ne", "Extended NE"}, {"diverseqa", "DiverseQA"},
      {"adjp", "ADJP"},       {"vp", "VP"},                {"s", "S"},
      {"llm", "LLM prompt"}};
  return names;
}

bool Trained(const std::string& method) { return method == "dmr" || method == "supervised"; }

std::string ValueString(const nlohmann::json& v) {
  return v.is_string() ? v.get<std::string>() : v.dump();
}

struct ReproConfig {
  fs::path base_dir;
  nlohmann::json raw;
  std::vector<std::string> methods;
  std::vector<std::uint64_t> seeds;
  TrainConfig train;
  ExtractionConfig extraction;
  BaselineOptions baseline;
};

fs::path Resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

ReproConfig ParseConfig(const fs::path& path) {
  ReproConfig c;
  c.base_dir = path.parent_path();
  try {
    c.raw = nlohmann::json::parse(ReadFile(path));
    c.methods = c.raw.at("methods").get<std::vector<std::string>>();
    c.seeds = c.raw.value("seeds", std::vector<std::uint64_t>{1, 2, 3});
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCategory::kConfig, path.string() + ": " + e.what());
  }
  if (c.methods.empty()) throw Error(ErrorCategory::kConfig, "no methods listed");
  if (c.seeds.empty()) throw Error(ErrorCategory::kConfig, "no seeds listed");
  for (const std::string& m : c.methods) {
    if (!DisplayNames().contains(m)) throw Error(ErrorCategory::kConfig, "unknown method: " + m);
  }

  const nlohmann::json& corpus = c.raw.at("corpus");
  if (corpus.contains("path")) {
    const fs::path p = Resolve(c.base_dir, corpus.at("path").get<std::string>());
    if (!fs::exists(p)) throw Error(ErrorCategory::kConfig, "training corpus not found: " + p.string());
  } else if (!corpus.contains("synth")) {
    throw Error(ErrorCategory::kConfig, "corpus needs \"path\" or \"synth\"");
  }
  if (c.raw.contains("eval")) {
    const fs::path p = Resolve(c.base_dir, c.raw.at("eval").at("path").get<std::string>());
    if (!fs::exists(p)) throw Error(ErrorCategory::kConfig, "eval set not found: " + p.string());
  } else if (corpus.value("eval_n", 0) <= 0) {
    throw Error(ErrorCategory::kConfig, "no eval set: give \"eval\" or a corpus \"eval_n\" holdout");
  }

  if (c.raw.contains("train_config")) {
    c.train = TrainConfig::FromFile(Resolve(c.base_dir, c.raw.at("train_config").get<std::string>()));
  }
  const nlohmann::json overrides = c.raw.value("train", nlohmann::json::object());
  for (const auto& [key, value] : overrides.items()) {
    c.train.Set(key, ValueString(value));
  }
  c.train.Validate();
  const nlohmann::json ex = c.raw.value("extraction", nlohmann::json::object());
  c.extraction.threshold = ex.value("threshold", c.extraction.threshold);
  c.extraction.target = ParseSelectionTarget(ex.value("target", std::string("kept")));
  c.extraction.aggregation = ParseWordAggregation(ex.value("aggregation", std::string("max")));
  const nlohmann::json bl = c.raw.value("baseline", nlohmann::json::object());
  c.baseline.analyzer = bl.value("analyzer", c.baseline.analyzer);
  c.baseline.analyzer_options = bl.value("analyzer_options", nlohmann::json::object());
  if (c.baseline.analyzer_options.contains("path")) {
    c.baseline.analyzer_options["path"] =
        Resolve(c.base_dir, c.baseline.analyzer_options["path"].get<std::string>()).string();
  }
  c.baseline.extended.length_ratio = bl.value("length_ratio", 0.8);
  c.baseline.extended.rule = ParseLengthRule(bl.value("length_rule", std::string("at_least")));
  if (bl.contains("llm")) c.baseline.llm = LlmClientConfig::FromJson(bl.at("llm"));
  if (!c.baseline.llm.cache_dir.empty()) c.baseline.llm.cache_dir = Resolve(c.base_dir, c.baseline.llm.cache_dir.string());
  return c;
}

}  // namespace

ReproOutcome RunRepro(const fs::path& config_path, const fs::path& out_dir, std::ostream& log) {
  const ReproConfig cfg = ParseConfig(config_path);
  RunManifest manifest("repro", {config_path.string(), out_dir.string()});
  manifest.AddInput(config_path);
  manifest.config = cfg.raw;
  manifest.config["resolved_train_config"] = cfg.train.ToMap();
  manifest.seeds = cfg.seeds;
  fs::create_directories(out_dir);

  // Corpus and eval set.
  std::vector<AnnotatedPassage> train_set, eval_set;
  const nlohmann::json& corpus = cfg.raw.at("corpus");
  const int eval_n = corpus.value("eval_n", 0);
  if (corpus.contains("synth")) {
    const nlohmann::json& s = corpus.at("synth");
    const TemplateCatalog catalog = s.contains("catalog")
                                        ? LoadCatalog(Resolve(cfg.base_dir, s.at("catalog").get<std::string>()))
                                        : DefaultCookingTemplates();
    train_set = Generate(catalog.templates, catalog.fillers, s.value("n", 2000), s.value("seed", 7));
  } else {
    const fs::path p = Resolve(cfg.base_dir, corpus.at("path").get<std::string>());
    train_set = LoadCorpusAuto(p, corpus.value("format", std::string("auto"))).passages;
    manifest.AddInput(p);
  }
  if (cfg.raw.contains("eval")) {
    const fs::path p = Resolve(cfg.base_dir, cfg.raw.at("eval").at("path").get<std::string>());
    eval_set = LoadCorpusAuto(p, cfg.raw.at("eval").value("format", std::string("auto"))).passages;
    manifest.AddInput(p);
  }
  if (eval_n > 0) {
    if (eval_n >= static_cast<int>(train_set.size())) {
      throw Error(ErrorCategory::kConfig, "eval_n leaves no training passages");
    }
    const auto split = train_set.end() - eval_n;
    if (eval_set.empty()) eval_set.assign(split, train_set.end());
    train_set.erase(split, train_set.end());
  }
  if (eval_set.empty()) throw Error(ErrorCategory::kData, "eval set is empty");
  WriteExhaustive(out_dir / "corpus" / "train.jsonl", train_set);
  WriteExhaustive(out_dir / "corpus" / "eval.jsonl", eval_set);
  const std::vector<Passage> train_passages = PassagesOf(train_set);
  const std::vector<Passage> eval_passages = PassagesOf(eval_set);
  const std::vector<TokenLabelSeq> gold = GoldLabels(eval_set);
  log << "train passages = " << train_set.size() << ", eval passages = " << eval_set.size() << "\n";

  std::vector<MethodRow> rows;
  nlohmann::json failures = nlohmann::json::array();
  nlohmann::json llm_info;
  const auto evaluate = [&](const std::vector<ExtractionResult>& results, const fs::path& dir) {
    WriteResults(dir / "pred.jsonl", results);
    const MetricsReport m = TokenPrf(gold, ResultLabels(results, eval_set));
    WriteFileAtomic(dir / "metrics.json", MetricsToJson(m).dump(2) + "\n");
    manifest.AddOutput(dir / "pred.jsonl");
    return m;
  };

  for (const std::string& method : cfg.methods) {
    std::vector<MetricsReport> reports;
    const fs::path method_dir = out_dir / method;
    try {
      if (Trained(method)) {
        for (std::uint64_t seed : cfg.seeds) {
          log << method << " seed " << seed << "\n";
          const fs::path dir = method_dir / ("seed-" + std::to_string(seed));
          TrainConfig tc = cfg.train;
          tc.seed = seed;
          TrainOptions options;
          options.checkpoint_dir = dir;
          options.progress = [&log](const std::string& m) { log << "  " << m << "\n"; };
          Checkpoint model;
          if (method == "dmr") {
            DmrTrainResult r = TrainDmr(train_passages, tc, options);
            if (r.diverged) throw Error(ErrorCategory::kDivergence, "dmr diverged at seed " + std::to_string(seed));
            WriteFileAtomic(dir / "train_log.jsonl", r.log.ToJsonl());
            model = std::move(r.masker);
          } else {
            SupervisedTrainResult r = TrainSupervised(train_passages, GoldLabels(train_set), tc, options);
            if (r.diverged) throw Error(ErrorCategory::kDivergence, "supervised diverged at seed " + std::to_string(seed));
            WriteFileAtomic(dir / "train_log.jsonl", r.log.ToJsonl());
            model = std::move(r.classifier);
          }
          reports.push_back(evaluate(ExtractAll(model, eval_passages, cfg.extraction), dir));
        }
      } else {
        log << method << "\n";
        BaselineRun run = RunBaseline(method, eval_passages, cfg.baseline, log);
        if (method == "llm") llm_info = run.info;
        reports.push_back(evaluate(run.results, method_dir));
      }
    } catch (const Error& e) {
      failures.push_back({{"method", method}, {"category", CategoryName(e.category())}, {"message", e.what()},
                          {"completed_runs", reports.size()}});
      log << "error [" << CategoryName(e.category()) << "]: " << method << ": " << e.what() << "\n";
    }
    if (!reports.empty()) {
      const auto& names = DisplayNames();
      rows.push_back({names.at(method) + (failures.empty() ? "" : " (partial)"), method == "supervised",
                      AggregateRuns(reports)});
    }
    if (!failures.empty()) break;
  }

  ReproOutcome outcome;
  outcome.complete = failures.empty();
  nlohmann::json table_json = nlohmann::json::array();
  if (!rows.empty()) {
    const ComparisonTable table = MakeComparisonTable(rows);
    WriteFileAtomic(out_dir / "table.txt", table.ToText());
    WriteFileAtomic(out_dir / "table.json", table.ToJson().dump(2) + "\n");
    WriteFileAtomic(out_dir / "table.tsv", table.ToTsv());
    manifest.AddOutput(out_dir / "table.txt");
    table_json = table.ToJson();
    log << table.ToText();
  }
  outcome.summary = {{"status", outcome.complete ? "complete" : "partial"},
                     {"rows", table_json},
                     {"failures", failures}};
  if (!llm_info.is_null()) manifest.extra["llm"] = llm_info;
  manifest.extra["status"] = outcome.summary["status"];
  manifest.extra["failures"] = failures;
  WriteFileAtomic(out_dir / "summary.json", outcome.summary.dump(2) + "\n");
  manifest.Write(out_dir / "manifest.json");
  return outcome;
}

}  // namespace dmr::cli
