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

#ifndef DMR_EXTRACTION_HPP_
#define DMR_EXTRACTION_HPP_

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dmr/corpus.hpp"
#include "dmr/model/checkpoint.hpp"
#include "dmr/model/vocab.hpp"

namespace dmr {

struct CandidateSpan {
  CharRange range;
  std::string text;
  double score = 0.0;
  // Baselines record the entity type or constituent label here.
  std::string label;
  std::vector<std::string> sources;
};

struct ExtractionResult {
  std::string passage_id;
  std::vector<CandidateSpan> spans;  // sorted, non-overlapping
  double threshold = 0.0;
  bool truncated = false;
};

// Which masker decision marks a candidate-answer word. Kept words are the
// hard-to-recover ones; `kMasked` selects the complement.
enum class SelectionTarget { kKept, kMasked };
enum class WordAggregation { kMax, kMean };

SelectionTarget ParseSelectionTarget(std::string_view name);
WordAggregation ParseWordAggregation(std::string_view name);
const char* SelectionTargetName(SelectionTarget target);
const char* WordAggregationName(WordAggregation aggregation);

struct ExtractionConfig {
  double threshold = 0.5;
  SelectionTarget target = SelectionTarget::kKept;
  WordAggregation aggregation = WordAggregation::kMax;
};

// Per-word aggregate of per-subword probabilities. Words cut off by
// truncation get 0 and set `truncated`.
struct WordScores {
  std::vector<double> values;
  bool truncated = false;
};

WordScores AggregateToWords(const SubwordEncoding& enc, std::span<const double> subword_values,
                            WordAggregation aggregation);

// Mask probability per word: aggregate over its subwords of (1 - keep_prob).
WordScores WordMaskProbs(const SubwordEncoding& enc, std::span<const double> keep_probs,
                         WordAggregation aggregation = WordAggregation::kMax);

// Selects words with score >= threshold, merges consecutive selections into
// spans, trims boundary punctuation and drops punctuation-only runs. Span
// score is the mean word score.
ExtractionResult ExtractFromScores(const Passage& passage, std::span<const double> word_scores,
                                   double threshold);

// A trained masker or supervised classifier, ready for deterministic
// inference.
class SpanScorer {
 public:
  explicit SpanScorer(const Checkpoint& checkpoint);
  ~SpanScorer();
  SpanScorer(SpanScorer&&) noexcept;
  SpanScorer& operator=(SpanScorer&&) noexcept;

  const std::string& role() const;
  SubwordEncoding Encode(const Passage& passage) const;
  // Keep probability per subword (masker), or P(answer) for a classifier.
  std::vector<double> SubwordProbs(const SubwordEncoding& enc) const;
  // Per-word selection scores under `config`.
  WordScores Score(const Passage& passage, const ExtractionConfig& config) const;
  ExtractionResult Extract(const Passage& passage, const ExtractionConfig& config) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// label 1 iff the word overlaps a predicted span. Throws kData on id mismatch.
TokenLabelSeq ResultToLabels(const ExtractionResult& result, const Passage& passage);

nlohmann::json ResultToJson(const ExtractionResult& result);
ExtractionResult ResultFromJson(const nlohmann::json& j);
std::string ResultsToJsonl(std::span<const ExtractionResult> results);
void WriteResults(const std::filesystem::path& path, std::span<const ExtractionResult> results);
std::vector<ExtractionResult> LoadResults(const std::filesystem::path& path);

// Sorts spans, merges overlapping ones (keeping the union of
// sources) and refreshes text from the passage.
std::vector<CandidateSpan> MergeSpans(const Passage& passage, std::vector<CandidateSpan> spans);

}  // namespace dmr

#endif  // DMR_EXTRACTION_HPP_
