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


#ifndef DMR_BASELINES_RULES_HPP_
#define DMR_BASELINES_RULES_HPP_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dmr/baselines/analysis.hpp"
#include "dmr/extraction.hpp"

namespace dmr {

ExtractionResult ExtractNounPhrases(const Passage& passage, const SyntacticAnalysis& analysis);

// Nested entities collapse to the outermost one; the type goes in `label`.
ExtractionResult ExtractNamedEntities(const Passage& passage, const SyntacticAnalysis& analysis);

enum class LengthRule { kAtLeast, kAtMost };

LengthRule ParseLengthRule(std::string_view name);
const char* LengthRuleName(LengthRule rule);

struct ExtendedNeConfig {
  double length_ratio = 0.8;
  LengthRule rule = LengthRule::kAtLeast;
};

// Grows each entity to a constituent containing it whose word length
// relative to the sentence satisfies `config`. At-least picks the shortest
// such constituent, at-most the longest. Entities with no qualifying
// constituent are emitted as-is.
ExtractionResult ExtractExtendedEntities(const Passage& passage,
                                         const SyntacticAnalysis& analysis,
                                         const ExtendedNeConfig& config = {});

// Every constituent whose label is in `labels`; sources are the lowercased
// labels.
ExtractionResult ExtractConstituents(const Passage& passage, const SyntacticAnalysis& analysis,
                                     std::span<const std::string> labels);

struct DiverseQaResult {
  ExtractionResult merged;
  // Deduplicated by exact range before merging, with every source tag.
  std::vector<CandidateSpan> parts;

  // Parts carrying `source`, overlap-merged.
  ExtractionResult BySource(const Passage& passage, std::string_view source) const;
};

DiverseQaResult ExtractDiverseQa(const Passage& passage, const SyntacticAnalysis& analysis,
                                 const ExtendedNeConfig& config = {});

// Names accepted by RunRuleBaseline: np, ne, extended_ne, diverseqa, adjp,
// vp, s.
std::vector<std::string> RuleBaselineNames();
ExtractionResult RunRuleBaseline(std::string_view method, const Passage& passage,
                                 const SyntacticAnalysis& analysis,
                                 const ExtendedNeConfig& config = {});

}  // namespace dmr

#endif  // DMR_BASELINES_RULES_HPP_
