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


#include "dmr/baselines/rules.hpp"

#include <algorithm>
#include <cctype>

namespace dmr {

namespace {

int WordCount(const Passage& passage, const CharRange& range) {
  int n = 0;
  for (const CharRange& w : passage.word_offsets) n += range.contains(w) ? 1 : 0;
  return n;
}

CandidateSpan MakeSpan(CharRange range, std::string label, std::string source) {
  CandidateSpan s;
  s.range = range;
  s.score = 1.0;
  s.label = std::move(label);
  s.sources = {std::move(source)};
  return s;
}

ExtractionResult Finish(const Passage& passage, std::vector<CandidateSpan> spans) {
  ExtractionResult r;
  r.passage_id = passage.id;
  r.spans = MergeSpans(passage, std::move(spans));
  return r;
}

std::string LowerLabel(std::string_view label) {
  std::string out(label);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Merges spans with identical ranges, unioning their sources.
std::vector<CandidateSpan> DedupExact(std::vector<CandidateSpan> spans) {
  std::stable_sort(spans.begin(), spans.end(),
                   [](const CandidateSpan& a, const CandidateSpan& b) { return a.range < b.range; });
  std::vector<CandidateSpan> out;
  for (CandidateSpan& s : spans) {
    if (!out.empty() && out.back().range == s.range) {
      for (std::string& src : s.sources) out.back().sources.push_back(std::move(src));
    } else {
      out.push_back(std::move(s));
    }
  }
  for (CandidateSpan& s : out) {
    std::sort(s.sources.begin(), s.sources.end());
    s.sources.erase(std::unique(s.sources.begin(), s.sources.end()), s.sources.end());
  }
  return out;
}

std::vector<CandidateSpan> ExtendedParts(const Passage& passage, const SyntacticAnalysis& analysis,
                                         const ExtendedNeConfig& config) {
  if (!(config.length_ratio > 0.0 && config.length_ratio <= 1.0)) {
    throw Error(ErrorCategory::kConfig, "length ratio must be in (0, 1]");
  }
  RequireCapabilities(analysis, {.entities = true, .parse = true});
  std::vector<CandidateSpan> spans;
  for (const SentenceAnalysis& s : analysis.sentences) {
    const double bound = config.length_ratio * WordCount(passage, s.range);
    for (const EntityMention& e : s.entities) {
      const Constituent* best = nullptr;
      int best_len = 0;
      for (const Constituent& node : s.tree) {
        if (!node.range.contains(e.range)) continue;
        const int len = WordCount(passage, node.range);
        if (config.rule == LengthRule::kAtLeast) {
          if (len >= bound && (best == nullptr || len <= best_len)) {
            best = &node;
            best_len = len;
          }
        } else if (len <= bound && (best == nullptr || len > best_len)) {
          best = &node;
          best_len = len;
        }
      }
      spans.push_back(MakeSpan(best ? best->range : e.range, e.type, "extended_ne"));
    }
  }
  return spans;
}

std::vector<CandidateSpan> ConstituentParts(const SyntacticAnalysis& analysis,
                                            std::span<const std::string> labels) {
  RequireCapabilities(analysis, {.parse = true});
  std::vector<CandidateSpan> spans;
  for (const SentenceAnalysis& s : analysis.sentences) {
    for (const Constituent& node : s.tree) {
      if (std::find(labels.begin(), labels.end(), node.label) != labels.end()) {
        spans.push_back(MakeSpan(node.range, node.label, LowerLabel(node.label)));
      }
    }
  }
  return spans;
}

}  // namespace

ExtractionResult ExtractNounPhrases(const Passage& passage, const SyntacticAnalysis& analysis) {
  RequireCapabilities(analysis, {.chunks = true});
  std::vector<CandidateSpan> spans;
  for (const SentenceAnalysis& s : analysis.sentences) {
    for (const CharRange& c : s.chunks) spans.push_back(MakeSpan(c, "NP", "np"));
  }
  return Finish(passage, std::move(spans));
}

ExtractionResult ExtractNamedEntities(const Passage& passage, const SyntacticAnalysis& analysis) {
  RequireCapabilities(analysis, {.entities = true});
  std::vector<EntityMention> all;
  for (const SentenceAnalysis& s : analysis.sentences) {
    all.insert(all.end(), s.entities.begin(), s.entities.end());
  }
  std::stable_sort(all.begin(), all.end(), [](const EntityMention& a, const EntityMention& b) {
    if (a.range.start != b.range.start) return a.range.start < b.range.start;
    return a.range.end > b.range.end;
  });
  std::vector<CandidateSpan> spans;
  for (const EntityMention& e : all) {
    if (!spans.empty() && spans.back().range.contains(e.range)) continue;
    spans.push_back(MakeSpan(e.range, e.type, "ne"));
  }
  return Finish(passage, std::move(spans));
}

LengthRule ParseLengthRule(std::string_view name) {
  if (name == "at_least") return LengthRule::kAtLeast;
  if (name == "at_most") return LengthRule::kAtMost;
  throw Error(ErrorCategory::kConfig, "unknown length rule: " + std::string(name));
}

const char* LengthRuleName(LengthRule rule) {
  return rule == LengthRule::kAtLeast ? "at_least" : "at_most";
}

ExtractionResult ExtractExtendedEntities(const Passage& passage, const SyntacticAnalysis& analysis,
                                         const ExtendedNeConfig& config) {
  return Finish(passage, ExtendedParts(passage, analysis, config));
}

ExtractionResult ExtractConstituents(const Passage& passage, const SyntacticAnalysis& analysis,
                                     std::span<const std::string> labels) {
  return Finish(passage, ConstituentParts(analysis, labels));
}

ExtractionResult DiverseQaResult::BySource(const Passage& passage, std::string_view source) const {
  std::vector<CandidateSpan> picked;
  for (const CandidateSpan& s : parts) {
    if (std::find(s.sources.begin(), s.sources.end(), source) != s.sources.end()) {
      CandidateSpan copy = s;
      copy.sources = {std::string(source)};
      picked.push_back(std::move(copy));
    }
  }
  return Finish(passage, std::move(picked));
}

DiverseQaResult ExtractDiverseQa(const Passage& passage, const SyntacticAnalysis& analysis,
                                 const ExtendedNeConfig& config) {
  static const std::vector<std::string> kLabels = {"NP", "ADJP", "VP", "S"};
  std::vector<CandidateSpan> parts = ExtendedParts(passage, analysis, config);
  std::vector<CandidateSpan> constituents = ConstituentParts(analysis, kLabels);
  parts.insert(parts.end(), constituents.begin(), constituents.end());
  DiverseQaResult out;
  out.parts = DedupExact(std::move(parts));
  const std::vector<std::size_t> bytes = utf8::CodePointOffsets(passage.text);
  for (CandidateSpan& s : out.parts) s.text = utf8::Substr(passage.text, bytes, s.range);
  out.merged = Finish(passage, out.parts);
  return out;
}

std::vector<std::string> RuleBaselineNames() {
  return {"np", "ne", "extended_ne", "diverseqa", "adjp", "vp", "s"};
}

ExtractionResult RunRuleBaseline(std::string_view method, const Passage& passage,
                                 const SyntacticAnalysis& analysis, const ExtendedNeConfig& config) {
  if (method == "np") return ExtractNounPhrases(passage, analysis);
  if (method == "ne") return ExtractNamedEntities(passage, analysis);
  if (method == "extended_ne") return ExtractExtendedEntities(passage, analysis, config);
  if (method == "diverseqa") return ExtractDiverseQa(passage, analysis, config).merged;
  if (method == "adjp" || method == "vp" || method == "s") {
    std::string label(method);
    for (char& c : label) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    const std::vector<std::string> labels = {label};
    return ExtractConstituents(passage, analysis, labels);
  }
  throw Error(ErrorCategory::kConfig, "unknown baseline: " + std::string(method));
}

}  // namespace dmr
