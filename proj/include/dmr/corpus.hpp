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

#ifndef DMR_CORPUS_HPP_
#define DMR_CORPUS_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dmr/common.hpp"
#include "json.hpp"

namespace dmr {

// A context passage segmented into word tokens. Offsets are code-point
// ranges into `text`; text[word_offsets[i]] == word_tokens[i].
struct Passage {
  std::string id;
  std::string text;
  std::vector<std::string> word_tokens;
  std::vector<CharRange> word_offsets;

  int size() const { return static_cast<int>(word_tokens.size()); }
};

struct AnswerSpan {
  CharRange range;
  std::string answer_text;

  friend bool operator==(const AnswerSpan&, const AnswerSpan&) = default;
};

// Gold spans may overlap each other.
struct AnnotatedPassage {
  Passage passage;
  std::vector<AnswerSpan> spans;
};

// One binary label per word token; 1 marks an answer token.
struct TokenLabelSeq {
  std::string passage_id;
  std::vector<std::uint8_t> labels;

  friend bool operator==(const TokenLabelSeq&, const TokenLabelSeq&) = default;
};

struct CorpusStats {
  std::size_t passage_count = 0;
  std::size_t token_count = 0;
  std::size_t answer_token_count = 0;
  double avg_passage_length = 0.0;
  // Micro-averaged over every word token of the corpus.
  double answer_context_ratio = 0.0;
};

struct Reject {
  std::string record;
  std::string reason;
};

struct LoadResult {
  std::vector<AnnotatedPassage> passages;
  std::vector<Reject> rejects;
};

enum class CorpusFormat { kSquad, kExhaustive };

CorpusFormat ParseCorpusFormat(std::string_view name);

struct WordTokenization {
  std::vector<std::string> tokens;
  std::vector<CharRange> offsets;
};

bool IsWhitespace(char32_t cp);
bool IsPunctuation(char32_t cp);
// True when every code point of the token is punctuation.
bool IsPunctuationToken(std::string_view token);

// Rule-based segmentation: whitespace separates words and every punctuation
// mark becomes its own token. Throws kData on empty or whitespace-only text.
WordTokenization TokenizeWords(std::string_view text);

Passage MakePassage(std::string id, std::string text);

// Validates a span against the passage text. Returns an empty string when
// valid, otherwise the reject reason.
std::string CheckSpan(const Passage& passage,
                      const std::vector<std::size_t>& byte_offsets,
                      const AnswerSpan& span);

// label_i = 1 iff token i shares at least one character with any range.
TokenLabelSeq RangesToLabels(const Passage& passage,
                             std::span<const CharRange> ranges);
TokenLabelSeq SpansToLabels(const AnnotatedPassage& ap);

CorpusStats ComputeCorpusStats(std::span<const AnnotatedPassage> corpus);
std::string StatsToKeyValue(const CorpusStats& stats);
nlohmann::json StatsToJson(const CorpusStats& stats);

LoadResult LoadSquad(const std::filesystem::path& path);
LoadResult LoadExhaustive(const std::filesystem::path& path);
LoadResult LoadCorpus(const std::filesystem::path& path, CorpusFormat format);

// Exhaustive-annotation records, one JSON object per line.
nlohmann::json ToExhaustiveRecord(const AnnotatedPassage& ap);
std::string ToExhaustiveJsonl(std::span<const AnnotatedPassage> corpus);
void WriteExhaustive(const std::filesystem::path& path,
                     std::span<const AnnotatedPassage> corpus);

nlohmann::json RejectsToJson(std::span<const Reject> rejects);

}  // namespace dmr

#endif  // DMR_CORPUS_HPP_
