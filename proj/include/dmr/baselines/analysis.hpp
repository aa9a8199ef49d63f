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


#ifndef DMR_BASELINES_ANALYSIS_HPP_
#define DMR_BASELINES_ANALYSIS_HPP_

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "dmr/common.hpp"
#include "dmr/corpus.hpp"
#include "json.hpp"

namespace dmr {

struct EntityMention {
  CharRange range;
  std::string type;

  friend bool operator==(const EntityMention&, const EntityMention&) = default;
};

// One node of a constituency tree stored in preorder; `parent` is -1 for the
// sentence root.
struct Constituent {
  std::string label;
  CharRange range;
  int parent = -1;

  friend bool operator==(const Constituent&, const Constituent&) = default;
};

struct SentenceAnalysis {
  CharRange range;
  std::vector<CharRange> chunks;
  std::vector<EntityMention> entities;
  std::vector<Constituent> tree;
};

struct AnalyzerCapabilities {
  bool chunks = false;
  bool entities = false;
  bool parse = false;
};

struct SyntacticAnalysis {
  std::string passage_id;
  AnalyzerCapabilities capabilities;
  std::vector<SentenceAnalysis> sentences;
};

// Throws kData when a range leaves the passage or its sentence, or a tree
// node is not contained in its parent.
void ValidateAnalysis(const SyntacticAnalysis& analysis, const Passage& passage);

// Throws kConfig naming the missing capability.
void RequireCapabilities(const SyntacticAnalysis& analysis, AnalyzerCapabilities needed);

class AnalyzerPort {
 public:
  virtual ~AnalyzerPort() = default;
  virtual std::string name() const = 0;
  virtual AnalyzerCapabilities capabilities() const = 0;
  virtual SyntacticAnalysis Analyze(const Passage& passage) const = 0;
};

// Deterministic lexicon and suffix tagger with a small phrase grammar. Good
// enough for tests and the synthetic corpus; real parsers plug in through
// the registry or precomputed JSONL.
class FallbackAnalyzer : public AnalyzerPort {
 public:
  std::string name() const override { return "fallback"; }
  AnalyzerCapabilities capabilities() const override { return {true, true, true}; }
  SyntacticAnalysis Analyze(const Passage& passage) const override;
};

// Serves analyses produced offline, one JSON object per line keyed by
// passage id. Capabilities are the intersection over all records.
class JsonlAnalyzer : public AnalyzerPort {
 public:
  explicit JsonlAnalyzer(const std::filesystem::path& path);
  std::string name() const override { return "jsonl"; }
  AnalyzerCapabilities capabilities() const override { return capabilities_; }
  SyntacticAnalysis Analyze(const Passage& passage) const override;

 private:
  AnalyzerCapabilities capabilities_{true, true, true};
  std::vector<SyntacticAnalysis> records_;
};

nlohmann::json AnalysisToJson(const SyntacticAnalysis& analysis);
SyntacticAnalysis AnalysisFromJson(const nlohmann::json& j);

using AnalyzerFactory =
    std::function<std::unique_ptr<AnalyzerPort>(const nlohmann::json& options)>;

// "fallback" and "jsonl" (option "path") are registered by default.
void RegisterAnalyzer(const std::string& name, AnalyzerFactory factory);
std::unique_ptr<AnalyzerPort> MakeAnalyzer(const std::string& name,
                                           const nlohmann::json& options = nlohmann::json::object());
std::vector<std::string> AnalyzerNames();

}  // namespace dmr

#endif  // DMR_BASELINES_ANALYSIS_HPP_
