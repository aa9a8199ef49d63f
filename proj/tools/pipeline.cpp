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


#include "pipeline.hpp"

#include <ostream>
#include <unordered_map>

#include "cli.hpp"

namespace dmr::cli {

RunManifest::RunManifest(std::string command, std::vector<std::string> argv)
    : command_(std::move(command)), argv_(std::move(argv)) {}

void RunManifest::AddInput(const std::filesystem::path& path) {
  inputs_[path.string()] = Sha256File(path);
}

void RunManifest::AddOutput(const std::filesystem::path& path) { outputs_.push_back(path.string()); }

nlohmann::json RunManifest::ToJson() const {
  nlohmann::json j = {{"command", command_},
                      {"argv", argv_},
                      {"config", config},
                      {"inputs", inputs_},
                      {"seeds", seeds},
                      {"tool_version", kToolVersion},
                      {"outputs", outputs_},
                      {"duration_seconds", duration_seconds_}};
  if (!extra.empty()) j["extra"] = extra;
  return j;
}

void RunManifest::Write(const std::filesystem::path& path) {
  duration_seconds_ =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  WriteFileAtomic(path, ToJson().dump(2) + "\n");
}

LoadResult LoadCorpusAuto(const std::filesystem::path& path, const std::string& format) {
  if (format == "auto") {
    return LoadCorpus(path, path.extension() == ".jsonl" ? CorpusFormat::kExhaustive : CorpusFormat::kSquad);
  }
  return LoadCorpus(path, ParseCorpusFormat(format));
}

std::vector<Passage> PassagesOf(const std::vector<AnnotatedPassage>& corpus) {
  std::vector<Passage> out;
  out.reserve(corpus.size());
  for (const AnnotatedPassage& ap : corpus) out.push_back(ap.passage);
  return out;
}

std::vector<TokenLabelSeq> GoldLabels(const std::vector<AnnotatedPassage>& corpus) {
  std::vector<TokenLabelSeq> out;
  out.reserve(corpus.size());
  for (const AnnotatedPassage& ap : corpus) out.push_back(SpansToLabels(ap));
  return out;
}

std::vector<ExtractionResult> ExtractAll(const Checkpoint& model, const std::vector<Passage>& passages,
                                         const ExtractionConfig& config) {
  const SpanScorer scorer(model);
  std::vector<ExtractionResult> out;
  out.reserve(passages.size());
  for (const Passage& p : passages) out.push_back(scorer.Extract(p, config));
  return out;
}

nlohmann::json BaselineOptions::ToJson() const {
  return {{"analyzer", analyzer},
          {"analyzer_options", analyzer_options},
          {"length_ratio", extended.length_ratio},
          {"length_rule", LengthRuleName(extended.rule)},
          {"llm", llm.ToJson()}};
}

BaselineRun RunBaseline(const std::string& method, const std::vector<Passage>& passages,
                        const BaselineOptions& options, std::ostream& log) {
  BaselineRun run;
  if (method == "llm") {
    LlmClient client(options.llm);
    nlohmann::json keys = nlohmann::json::array();
    nlohmann::json warnings = nlohmann::json::array();
    long items = 0, dropped = 0, hits = 0;
    for (const Passage& p : passages) {
      LlmExtraction e = client.Extract(p);
      keys.push_back(e.cache_key);
      for (const std::string& w : e.warnings) {
        log << "warning: " << w << "\n";
        warnings.push_back(w);
      }
      items += e.items;
      dropped += e.dropped;
      hits += e.cache_hit ? 1 : 0;
      run.results.push_back(std::move(e.result));
    }
    run.info = {{"cache_keys", keys}, {"items", items}, {"dropped", dropped},
                {"cache_hits", hits}, {"warnings", warnings}};
    return run;
  }
  const std::vector<std::string> names = RuleBaselineNames();
  if (std::find(names.begin(), names.end(), method) == names.end()) {
    throw Error(ErrorCategory::kConfig, "unknown baseline method: " + method);
  }
  const std::unique_ptr<AnalyzerPort> analyzer = MakeAnalyzer(options.analyzer, options.analyzer_options);
  for (const Passage& p : passages) {
    const SyntacticAnalysis a = analyzer->Analyze(p);
    ValidateAnalysis(a, p);
    run.results.push_back(RunRuleBaseline(method, p, a, options.extended));
  }
  return run;
}

std::vector<TokenLabelSeq> ResultLabels(const std::vector<ExtractionResult>& results,
                                        const std::vector<AnnotatedPassage>& corpus) {
  std::unordered_map<std::string, const Passage*> by_id;
  for (const AnnotatedPassage& ap : corpus) by_id[ap.passage.id] = &ap.passage;
  std::vector<TokenLabelSeq> out;
  out.reserve(results.size());
  for (const ExtractionResult& r : results) {
    auto it = by_id.find(r.passage_id);
    if (it == by_id.end()) {
      throw Error(ErrorCategory::kData, "prediction for unknown passage " + r.passage_id);
    }
    out.push_back(ResultToLabels(r, *it->second));
  }
  return out;
}

std::vector<TokenLabelSeq> LoadPredictionLabels(const std::filesystem::path& path,
                                                const std::vector<AnnotatedPassage>& corpus) {
  const std::string content = ReadFile(path);
  const std::size_t begin = content.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  const std::string first = content.substr(begin, content.find('\n', begin) - begin);
  nlohmann::json probe;
  try {
    probe = nlohmann::json::parse(first);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCategory::kParse, path.string() + ": " + e.what());
  }
  if (probe.contains("passage_id")) return ResultLabels(LoadResults(path), corpus);
  const LoadResult loaded = LoadExhaustive(path);
  if (!loaded.rejects.empty()) {
    throw Error(ErrorCategory::kData, path.string() + ": rejected record " + loaded.rejects.front().record +
                                          " (" + loaded.rejects.front().reason + ")");
  }
  return GoldLabels(loaded.passages);
}

}  // namespace dmr::cli
