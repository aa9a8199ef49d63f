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


#include "dmr/baselines/analysis.hpp"

#include <fstream>
#include <map>
#include <mutex>

namespace dmr {

namespace {

void CheckRange(const CharRange& r, const CharRange& outer, const std::string& what,
                const std::string& id) {
  if (r.start < 0 || r.start > r.end || !outer.contains(r)) {
    throw Error(ErrorCategory::kData, "passage " + id + ": " + what + " [" +
                                          std::to_string(r.start) + ", " + std::to_string(r.end) +
                                          ") outside [" + std::to_string(outer.start) + ", " +
                                          std::to_string(outer.end) + ")");
  }
}

nlohmann::json RangeJson(const CharRange& r) { return nlohmann::json::array({r.start, r.end}); }

CharRange RangeFrom(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw Error(ErrorCategory::kParse, "range must be [start, end]");
  return {j[0].get<int>(), j[1].get<int>()};
}

}  // namespace

void ValidateAnalysis(const SyntacticAnalysis& analysis, const Passage& passage) {
  const CharRange whole{0, static_cast<int>(utf8::Length(passage.text))};
  const std::string& id = passage.id;
  for (const SentenceAnalysis& s : analysis.sentences) {
    CheckRange(s.range, whole, "sentence", id);
    for (const CharRange& c : s.chunks) CheckRange(c, s.range, "chunk", id);
    for (const EntityMention& e : s.entities) CheckRange(e.range, s.range, "entity", id);
    for (std::size_t i = 0; i < s.tree.size(); ++i) {
      const Constituent& node = s.tree[i];
      if (node.parent < 0) {
        CheckRange(node.range, s.range, node.label, id);
        continue;
      }
      if (node.parent >= static_cast<int>(i)) {
        throw Error(ErrorCategory::kData,
                    "passage " + id + ": tree node " + std::to_string(i) + " is not in preorder");
      }
      CheckRange(node.range, s.tree[static_cast<std::size_t>(node.parent)].range, node.label, id);
    }
  }
}

void RequireCapabilities(const SyntacticAnalysis& analysis, AnalyzerCapabilities needed) {
  const AnalyzerCapabilities& have = analysis.capabilities;
  const auto missing = [&](const char* name) {
    throw Error(ErrorCategory::kConfig, std::string("analyzer does not provide ") + name);
  };
  if (needed.chunks && !have.chunks) missing("noun chunks");
  if (needed.entities && !have.entities) missing("named entities");
  if (needed.parse && !have.parse) missing("a constituency parse");
}

nlohmann::json AnalysisToJson(const SyntacticAnalysis& analysis) {
  nlohmann::json sentences = nlohmann::json::array();
  for (const SentenceAnalysis& s : analysis.sentences) {
    nlohmann::json chunks = nlohmann::json::array();
    for (const CharRange& c : s.chunks) chunks.push_back(RangeJson(c));
    nlohmann::json entities = nlohmann::json::array();
    for (const EntityMention& e : s.entities) {
      entities.push_back({{"range", RangeJson(e.range)}, {"type", e.type}});
    }
    nlohmann::json tree = nlohmann::json::array();
    for (const Constituent& c : s.tree) {
      tree.push_back({{"label", c.label}, {"range", RangeJson(c.range)}, {"parent", c.parent}});
    }
    sentences.push_back({{"range", RangeJson(s.range)},
                         {"chunks", chunks},
                         {"entities", entities},
                         {"tree", tree}});
  }
  const AnalyzerCapabilities& cap = analysis.capabilities;
  return {{"id", analysis.passage_id},
          {"capabilities", {{"chunks", cap.chunks}, {"entities", cap.entities}, {"parse", cap.parse}}},
          {"sentences", sentences}};
}

SyntacticAnalysis AnalysisFromJson(const nlohmann::json& j) {
  SyntacticAnalysis a;
  try {
    a.passage_id = j.at("id").get<std::string>();
    const nlohmann::json& cap = j.at("capabilities");
    a.capabilities.chunks = cap.value("chunks", false);
    a.capabilities.entities = cap.value("entities", false);
    a.capabilities.parse = cap.value("parse", false);
    for (const nlohmann::json& js : j.at("sentences")) {
      SentenceAnalysis s;
      s.range = RangeFrom(js.at("range"));
      for (const nlohmann::json& c : js.value("chunks", nlohmann::json::array())) {
        s.chunks.push_back(RangeFrom(c));
      }
      for (const nlohmann::json& e : js.value("entities", nlohmann::json::array())) {
        s.entities.push_back({RangeFrom(e.at("range")), e.at("type").get<std::string>()});
      }
      for (const nlohmann::json& c : js.value("tree", nlohmann::json::array())) {
        s.tree.push_back({c.at("label").get<std::string>(), RangeFrom(c.at("range")),
                          c.at("parent").get<int>()});
      }
      a.sentences.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCategory::kParse, std::string("bad analysis record: ") + e.what());
  }
  return a;
}

JsonlAnalyzer::JsonlAnalyzer(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::kIo, "cannot open " + path.string());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    SyntacticAnalysis a;
    try {
      a = AnalysisFromJson(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCategory::kParse, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.category(), path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    capabilities_.chunks = capabilities_.chunks && a.capabilities.chunks;
    capabilities_.entities = capabilities_.entities && a.capabilities.entities;
    capabilities_.parse = capabilities_.parse && a.capabilities.parse;
    records_.push_back(std::move(a));
  }
}

SyntacticAnalysis JsonlAnalyzer::Analyze(const Passage& passage) const {
  for (const SyntacticAnalysis& a : records_) {
    if (a.passage_id == passage.id) {
      ValidateAnalysis(a, passage);
      return a;
    }
  }
  throw Error(ErrorCategory::kData, "no precomputed analysis for passage " + passage.id);
}

namespace {

struct Registry {
  std::mutex mu;
  std::map<std::string, AnalyzerFactory> factories;

  Registry() {
    factories["fallback"] = [](const nlohmann::json&) {
      return std::make_unique<FallbackAnalyzer>();
    };
    factories["jsonl"] = [](const nlohmann::json& options) -> std::unique_ptr<AnalyzerPort> {
      if (!options.contains("path")) {
        throw Error(ErrorCategory::kConfig, "jsonl analyzer needs a \"path\" option");
      }
      return std::make_unique<JsonlAnalyzer>(options.at("path").get<std::string>());
    };
  }
};

Registry& GetRegistry() {
  static Registry registry;
  return registry;
}

}  // namespace

void RegisterAnalyzer(const std::string& name, AnalyzerFactory factory) {
  Registry& r = GetRegistry();
  std::lock_guard lock(r.mu);
  r.factories[name] = std::move(factory);
}

std::unique_ptr<AnalyzerPort> MakeAnalyzer(const std::string& name, const nlohmann::json& options) {
  Registry& r = GetRegistry();
  AnalyzerFactory factory;
  {
    std::lock_guard lock(r.mu);
    auto it = r.factories.find(name);
    if (it == r.factories.end()) throw Error(ErrorCategory::kConfig, "unknown analyzer: " + name);
    factory = it->second;
  }
  return factory(options);
}

std::vector<std::string> AnalyzerNames() {
  Registry& r = GetRegistry();
  std::lock_guard lock(r.mu);
  std::vector<std::string> names;
  for (const auto& [name, factory] : r.factories) names.push_back(name);
  return names;
}

}  // namespace dmr
