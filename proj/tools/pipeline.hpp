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


#ifndef DMR_TOOLS_PIPELINE_HPP_
#define DMR_TOOLS_PIPELINE_HPP_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "dmr/baselines/llm.hpp"
#include "dmr/baselines/rules.hpp"
#include "dmr/corpus.hpp"
#include "dmr/eval.hpp"
#include "dmr/extraction.hpp"
#include "json.hpp"

namespace dmr::cli {

class RunManifest {
 public:
  RunManifest(std::string command, std::vector<std::string> argv);

  nlohmann::json config = nlohmann::json::object();
  nlohmann::json extra = nlohmann::json::object();
  std::vector<std::uint64_t> seeds;

  void AddInput(const std::filesystem::path& path);
  void AddOutput(const std::filesystem::path& path);
  nlohmann::json ToJson() const;
  // Stamps the duration and writes atomically.
  void Write(const std::filesystem::path& path);

 private:
  std::string command_;
  std::vector<std::string> argv_;
  std::map<std::string, std::string> inputs_;
  std::vector<std::string> outputs_;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
  double duration_seconds_ = 0.0;
};

// "auto" picks exhaustive JSONL for .jsonl files and SQuAD otherwise.
LoadResult LoadCorpusAuto(const std::filesystem::path& path, const std::string& format);

std::vector<Passage> PassagesOf(const std::vector<AnnotatedPassage>& corpus);
std::vector<TokenLabelSeq> GoldLabels(const std::vector<AnnotatedPassage>& corpus);

std::vector<ExtractionResult> ExtractAll(const Checkpoint& model, const std::vector<Passage>& passages,
                                         const ExtractionConfig& config);

struct BaselineOptions {
  std::string analyzer = "fallback";
  nlohmann::json analyzer_options = nlohmann::json::object();
  ExtendedNeConfig extended;
  LlmClientConfig llm;

  nlohmann::json ToJson() const;
};

struct BaselineRun {
  std::vector<ExtractionResult> results;
  // Cache keys, dropped-item counts and warnings of the prompt baseline.
  nlohmann::json info = nlohmann::json::object();
};

// Rule methods (np, ne, extended_ne, diverseqa, adjp, vp, s) or "llm".
BaselineRun RunBaseline(const std::string& method, const std::vector<Passage>& passages,
                        const BaselineOptions& options, std::ostream& log);

std::vector<TokenLabelSeq> ResultLabels(const std::vector<ExtractionResult>& results,
                                        const std::vector<AnnotatedPassage>& corpus);

// Predictions may be extraction results or an annotated corpus.
std::vector<TokenLabelSeq> LoadPredictionLabels(const std::filesystem::path& path,
                                                const std::vector<AnnotatedPassage>& corpus);

struct ReproOutcome {
  nlohmann::json summary;
  bool complete = true;
};

// Runs every method x seed named by a repro config and writes the comparison
// table under `out_dir`. Validation errors throw before any work starts; a
// failing sub-run stops the experiment and returns the partial outcome.
ReproOutcome RunRepro(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
                      std::ostream& log);

}  // namespace dmr::cli

#endif  // DMR_TOOLS_PIPELINE_HPP_
