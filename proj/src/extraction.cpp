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

#include "dmr/extraction.hpp"

#include <algorithm>
#include <sstream>

#include "dmr/model/masker.hpp"
#include "dmr/model/ops.hpp"

namespace dmr {

using json = nlohmann::json;

SelectionTarget ParseSelectionTarget(std::string_view name) {
  if (name == "kept") return SelectionTarget::kKept;
  if (name == "masked") return SelectionTarget::kMasked;
  throw Error(ErrorCategory::kConfig, "unknown selection target: " + std::string(name));
}

WordAggregation ParseWordAggregation(std::string_view name) {
  if (name == "max") return WordAggregation::kMax;
  if (name == "mean") return WordAggregation::kMean;
  throw Error(ErrorCategory::kConfig, "unknown word aggregation: " + std::string(name));
}

const char* SelectionTargetName(SelectionTarget target) {
  return target == SelectionTarget::kKept ? "kept" : "masked";
}

const char* WordAggregationName(WordAggregation aggregation) {
  return aggregation == WordAggregation::kMax ? "max" : "mean";
}

WordScores AggregateToWords(const SubwordEncoding& enc, std::span<const double> subword_values,
                            WordAggregation aggregation) {
  if (static_cast<int>(subword_values.size()) != enc.size()) {
    throw Error(ErrorCategory::kModel, "encoding " + enc.passage_id + ": score length mismatch");
  }
  WordScores out;
  out.values.assign(static_cast<std::size_t>(enc.word_count), 0.0);
  std::vector<int> counts(static_cast<std::size_t>(enc.word_count), 0);
  for (int i = 0; i < enc.size(); ++i) {
    if (enc.is_special(i)) continue;
    const auto w = static_cast<std::size_t>(enc.subword_to_word[static_cast<std::size_t>(i)]);
    const double v = subword_values[static_cast<std::size_t>(i)];
    if (aggregation == WordAggregation::kMax) {
      out.values[w] = counts[w] == 0 ? v : std::max(out.values[w], v);
    } else {
      out.values[w] += v;
    }
    ++counts[w];
  }
  for (std::size_t w = 0; w < counts.size(); ++w) {
    if (counts[w] == 0) {
      out.truncated = true;
      out.values[w] = 0.0;
    } else if (aggregation == WordAggregation::kMean) {
      out.values[w] /= counts[w];
    }
  }
  return out;
}

WordScores WordMaskProbs(const SubwordEncoding& enc, std::span<const double> keep_probs,
                         WordAggregation aggregation) {
  std::vector<double> mask(keep_probs.size());
  for (std::size_t i = 0; i < keep_probs.size(); ++i) mask[i] = 1.0 - keep_probs[i];
  return AggregateToWords(enc, mask, aggregation);
}

ExtractionResult ExtractFromScores(const Passage& passage, std::span<const double> word_scores,
                                   double threshold) {
  if (static_cast<int>(word_scores.size()) != passage.size()) {
    throw Error(ErrorCategory::kData, "passage " + passage.id + ": score length mismatch");
  }
  ExtractionResult result;
  result.passage_id = passage.id;
  result.threshold = threshold;
  const std::vector<std::size_t> bytes = utf8::CodePointOffsets(passage.text);
  const int n = passage.size();
  int i = 0;
  while (i < n) {
    if (word_scores[static_cast<std::size_t>(i)] < threshold) {
      ++i;
      continue;
    }
    int begin = i;
    int end = i;
    while (end < n && word_scores[static_cast<std::size_t>(end)] >= threshold) ++end;
    i = end;
    const auto punct = [&](int k) {
      return IsPunctuationToken(passage.word_tokens[static_cast<std::size_t>(k)]);
    };
    while (begin < end && punct(begin)) ++begin;
    while (end > begin && punct(end - 1)) --end;
    if (begin == end) continue;
    CandidateSpan span;
    span.range = {passage.word_offsets[static_cast<std::size_t>(begin)].start,
                  passage.word_offsets[static_cast<std::size_t>(end - 1)].end};
    span.text = utf8::Substr(passage.text, bytes, span.range);
    double sum = 0.0;
    for (int k = begin; k < end; ++k) sum += word_scores[static_cast<std::size_t>(k)];
    span.score = sum / (end - begin);
    result.spans.push_back(std::move(span));
  }
  return result;
}

struct SpanScorer::Impl {
  std::string role;
  SubwordVocab vocab;
  TokenClassifier<double> model;
};

SpanScorer::SpanScorer(const Checkpoint& checkpoint) {
  if (checkpoint.role != "masker" && checkpoint.role != "classifier") {
    throw Error(ErrorCategory::kModel,
                "extraction needs a masker or classifier checkpoint, got " + checkpoint.role);
  }
  impl_ = std::make_unique<Impl>(Impl{checkpoint.role, SubwordVocab(checkpoint.vocab),
                                      TokenClassifier<double>(checkpoint.config, checkpoint.role)});
  if (impl_->vocab.size() != checkpoint.config.vocab_size) {
    throw Error(ErrorCategory::kModel, "checkpoint vocabulary does not match its config");
  }
  ImportTensors(checkpoint, impl_->model.Parameters());
}

SpanScorer::~SpanScorer() = default;
SpanScorer::SpanScorer(SpanScorer&&) noexcept = default;
SpanScorer& SpanScorer::operator=(SpanScorer&&) noexcept = default;

const std::string& SpanScorer::role() const { return impl_->role; }

SubwordEncoding SpanScorer::Encode(const Passage& passage) const {
  return EncodeSubwords(passage, impl_->vocab, impl_->model.config().max_input_length);
}

std::vector<double> SpanScorer::SubwordProbs(const SubwordEncoding& enc) const {
  typename TokenClassifier<double>::Cache cache;
  const Matrix<double> logits = impl_->model.Logits(enc, cache);
  std::vector<double> out(static_cast<std::size_t>(enc.size()));
  for (int i = 0; i < enc.size(); ++i) {
    const double gap = logits(i, 0) - logits(i, 1);
    if (impl_->role == "classifier") {
      out[static_cast<std::size_t>(i)] = enc.is_special(i) ? 0.0 : Sigmoid(-gap);
    } else {
      out[static_cast<std::size_t>(i)] = enc.is_special(i) ? 1.0 : Sigmoid(gap);
    }
  }
  return out;
}

WordScores SpanScorer::Score(const Passage& passage, const ExtractionConfig& config) const {
  const SubwordEncoding enc = Encode(passage);
  std::vector<double> probs = SubwordProbs(enc);
  // A classifier already scores the answer class; for a masker the score
  // follows the configured selection target.
  if (impl_->role == "masker" && config.target == SelectionTarget::kMasked) {
    for (double& p : probs) p = 1.0 - p;
  }
  return AggregateToWords(enc, probs, config.aggregation);
}

ExtractionResult SpanScorer::Extract(const Passage& passage, const ExtractionConfig& config) const {
  const WordScores scores = Score(passage, config);
  ExtractionResult result = ExtractFromScores(passage, scores.values, config.threshold);
  result.truncated = scores.truncated;
  return result;
}

TokenLabelSeq ResultToLabels(const ExtractionResult& result, const Passage& passage) {
  if (result.passage_id != passage.id) {
    throw Error(ErrorCategory::kData,
                "result for " + result.passage_id + " does not match passage " + passage.id);
  }
  std::vector<CharRange> ranges;
  ranges.reserve(result.spans.size());
  for (const CandidateSpan& s : result.spans) ranges.push_back(s.range);
  return RangesToLabels(passage, ranges);
}

json ResultToJson(const ExtractionResult& result) {
  json spans = json::array();
  for (const CandidateSpan& s : result.spans) {
    json j{{"char_start", s.range.start},
           {"char_end", s.range.end},
           {"text", s.text},
           {"score", s.score}};
    if (!s.label.empty()) j["label"] = s.label;
    if (!s.sources.empty()) j["sources"] = s.sources;
    spans.push_back(std::move(j));
  }
  json out{{"passage_id", result.passage_id}, {"spans", std::move(spans)}, {"threshold", result.threshold}};
  if (result.truncated) out["truncated"] = true;
  return out;
}

ExtractionResult ResultFromJson(const json& j) {
  ExtractionResult r;
  r.passage_id = j.at("passage_id").get<std::string>();
  r.threshold = j.value("threshold", 0.0);
  r.truncated = j.value("truncated", false);
  for (const json& s : j.at("spans")) {
    CandidateSpan span;
    span.range = {s.at("char_start").get<int>(), s.at("char_end").get<int>()};
    span.text = s.value("text", std::string());
    span.score = s.value("score", 0.0);
    span.label = s.value("label", std::string());
    if (s.contains("sources")) span.sources = s.at("sources").get<std::vector<std::string>>();
    r.spans.push_back(std::move(span));
  }
  return r;
}

std::string ResultsToJsonl(std::span<const ExtractionResult> results) {
  std::string out;
  for (const ExtractionResult& r : results) {
    out += ResultToJson(r).dump();
    out += '\n';
  }
  return out;
}

void WriteResults(const std::filesystem::path& path, std::span<const ExtractionResult> results) {
  WriteFileAtomic(path, ResultsToJsonl(results));
}

std::vector<ExtractionResult> LoadResults(const std::filesystem::path& path) {
  std::istringstream in(ReadFile(path));
  std::vector<ExtractionResult> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(ResultFromJson(json::parse(line)));
    } catch (const json::exception& e) {
      throw Error(ErrorCategory::kParse,
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<CandidateSpan> MergeSpans(const Passage& passage, std::vector<CandidateSpan> spans) {
  std::sort(spans.begin(), spans.end(), [](const CandidateSpan& a, const CandidateSpan& b) {
    return a.range < b.range;
  });
  std::vector<CandidateSpan> out;
  for (CandidateSpan& s : spans) {
    if (!out.empty() && out.back().range.overlaps(s.range)) {
      CandidateSpan& last = out.back();
      last.range.end = std::max(last.range.end, s.range.end);
      last.score = std::max(last.score, s.score);
      if (last.label.empty()) last.label = s.label;
      for (std::string& src : s.sources) {
        if (std::find(last.sources.begin(), last.sources.end(), src) == last.sources.end()) {
          last.sources.push_back(std::move(src));
        }
      }
    } else {
      out.push_back(std::move(s));
    }
  }
  const std::vector<std::size_t> bytes = utf8::CodePointOffsets(passage.text);
  for (CandidateSpan& s : out) {
    std::sort(s.sources.begin(), s.sources.end());
    s.text = utf8::Substr(passage.text, bytes, s.range);
  }
  return out;
}

}  // namespace dmr
