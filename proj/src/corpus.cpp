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

#include "dmr/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace dmr {

using json = nlohmann::json;

CorpusFormat ParseCorpusFormat(std::string_view name) {
  if (name == "squad") return CorpusFormat::kSquad;
  if (name == "exhaustive" || name == "jsonl") return CorpusFormat::kExhaustive;
  throw Error(ErrorCategory::kUsage, "unknown corpus format: " + std::string(name));
}

bool IsWhitespace(char32_t cp) {
  switch (cp) {
    case U' ': case U'\t': case U'\n': case U'\r': case U'\v': case U'\f':
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000: case 0x200B: case 0xFEFF:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

bool IsPunctuation(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
           (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
  }
  if (cp >= 0xA1 && cp <= 0xBF) {
    // Latin-1 letters and digits in this block stay word characters.
    return cp != 0xAA && cp != 0xB2 && cp != 0xB3 && cp != 0xB5 &&
           cp != 0xB9 && cp != 0xBA && !(cp >= 0xBC && cp <= 0xBE);
  }
  if (cp == 0xD7 || cp == 0xF7) return true;
  return (cp >= 0x2010 && cp <= 0x2027) || (cp >= 0x2030 && cp <= 0x205E) ||
         (cp >= 0x20A0 && cp <= 0x20CF) || (cp >= 0x2190 && cp <= 0x23FF) ||
         (cp >= 0x2500 && cp <= 0x27BF) || (cp >= 0x3001 && cp <= 0x303F) ||
         (cp >= 0xFF01 && cp <= 0xFF0F) || (cp >= 0xFF1A && cp <= 0xFF20) ||
         (cp >= 0xFF3B && cp <= 0xFF40) || (cp >= 0xFF5B && cp <= 0xFF65);
}

bool IsPunctuationToken(std::string_view token) {
  const std::u32string cps = utf8::Decode(token);
  if (cps.empty()) return false;
  return std::all_of(cps.begin(), cps.end(), IsPunctuation);
}

WordTokenization TokenizeWords(std::string_view text) {
  const std::u32string cps = utf8::Decode(text);
  WordTokenization out;
  const int n = static_cast<int>(cps.size());
  int i = 0;
  while (i < n) {
    if (IsWhitespace(cps[i])) {
      ++i;
      continue;
    }
    int j = i + 1;
    if (!IsPunctuation(cps[i])) {
      while (j < n && !IsWhitespace(cps[j]) && !IsPunctuation(cps[j])) ++j;
    }
    out.offsets.push_back({i, j});
    out.tokens.push_back(utf8::Encode(std::u32string_view(cps).substr(i, j - i)));
    i = j;
  }
  if (out.tokens.empty()) {
    throw Error(ErrorCategory::kData, "text has no word tokens");
  }
  return out;
}

Passage MakePassage(std::string id, std::string text) {
  WordTokenization tok = TokenizeWords(text);
  return Passage{std::move(id), std::move(text), std::move(tok.tokens),
                 std::move(tok.offsets)};
}

std::string CheckSpan(const Passage& passage,
                      const std::vector<std::size_t>& byte_offsets,
                      const AnswerSpan& span) {
  const int length = static_cast<int>(byte_offsets.size()) - 1;
  if (span.range.start < 0 || span.range.start >= span.range.end ||
      span.range.end > length) {
    return "span out of bounds";
  }
  if (utf8::Substr(passage.text, byte_offsets, span.range) != span.answer_text) {
    return "answer text mismatch";
  }
  return {};
}

TokenLabelSeq RangesToLabels(const Passage& passage,
                             std::span<const CharRange> ranges) {
  TokenLabelSeq out{passage.id, std::vector<std::uint8_t>(passage.word_tokens.size(), 0)};
  for (std::size_t i = 0; i < passage.word_offsets.size(); ++i) {
    for (const CharRange& r : ranges) {
      if (passage.word_offsets[i].overlaps(r)) {
        out.labels[i] = 1;
        break;
      }
    }
  }
  return out;
}

TokenLabelSeq SpansToLabels(const AnnotatedPassage& ap) {
  std::vector<CharRange> ranges;
  ranges.reserve(ap.spans.size());
  for (const AnswerSpan& s : ap.spans) ranges.push_back(s.range);
  return RangesToLabels(ap.passage, ranges);
}

CorpusStats ComputeCorpusStats(std::span<const AnnotatedPassage> corpus) {
  if (corpus.empty()) throw Error(ErrorCategory::kData, "corpus is empty");
  CorpusStats stats;
  stats.passage_count = corpus.size();
  for (const AnnotatedPassage& ap : corpus) {
    const TokenLabelSeq labels = SpansToLabels(ap);
    stats.token_count += labels.labels.size();
    for (std::uint8_t l : labels.labels) stats.answer_token_count += l;
  }
  stats.avg_passage_length =
      static_cast<double>(stats.token_count) / static_cast<double>(stats.passage_count);
  stats.answer_context_ratio = stats.token_count == 0
                                   ? 0.0
                                   : static_cast<double>(stats.answer_token_count) /
                                         static_cast<double>(stats.token_count);
  return stats;
}

std::string StatsToKeyValue(const CorpusStats& stats) {
  std::ostringstream out;
  out.precision(6);
  out << std::fixed;
  out << "passage_count = " << stats.passage_count << "\n"
      << "token_count = " << stats.token_count << "\n"
      << "answer_token_count = " << stats.answer_token_count << "\n"
      << "avg_passage_length = " << stats.avg_passage_length << "\n"
      << "answer_context_ratio = " << stats.answer_context_ratio << "\n";
  return out.str();
}

json StatsToJson(const CorpusStats& stats) {
  return json{{"passage_count", stats.passage_count},
              {"token_count", stats.token_count},
              {"answer_token_count", stats.answer_token_count},
              {"avg_passage_length", stats.avg_passage_length},
              {"answer_context_ratio", stats.answer_context_ratio}};
}

namespace {

// Adds the span if valid and not already present; otherwise records a reject.
void AddSpan(AnnotatedPassage& ap, const std::vector<std::size_t>& offsets,
             AnswerSpan span, const std::string& record,
             std::vector<Reject>& rejects) {
  std::string reason = CheckSpan(ap.passage, offsets, span);
  if (!reason.empty()) {
    rejects.push_back({record, reason});
    return;
  }
  for (const AnswerSpan& s : ap.spans) {
    if (s.range == span.range) return;
  }
  ap.spans.push_back(std::move(span));
}

void SortSpans(AnnotatedPassage& ap) {
  std::sort(ap.spans.begin(), ap.spans.end(),
            [](const AnswerSpan& a, const AnswerSpan& b) { return a.range < b.range; });
}

json ParseJsonFile(const std::filesystem::path& path) {
  const std::string content = ReadFile(path);
  try {
    return json::parse(content);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCategory::kParse, path.string() + ": " + e.what());
  }
}

}  // namespace

LoadResult LoadSquad(const std::filesystem::path& path) {
  const json root = ParseJsonFile(path);
  LoadResult result;
  std::unordered_map<std::string, std::size_t> by_context;
  std::vector<std::vector<std::size_t>> offsets;
  try {
    const json& data = root.at("data");
    for (std::size_t a = 0; a < data.size(); ++a) {
      const json& paragraphs = data[a].at("paragraphs");
      for (std::size_t p = 0; p < paragraphs.size(); ++p) {
        const json& para = paragraphs[p];
        std::string context = para.at("context").get<std::string>();
        const std::string record = "squad-" + std::to_string(a) + "-" + std::to_string(p);
        std::size_t index;
        if (auto it = by_context.find(context); it != by_context.end()) {
          index = it->second;
        } else {
          Passage passage;
          try {
            passage = MakePassage(record, context);
          } catch (const Error& e) {
            result.rejects.push_back({record, "empty context"});
            continue;
          }
          index = result.passages.size();
          by_context.emplace(std::move(context), index);
          offsets.push_back(utf8::CodePointOffsets(passage.text));
          result.passages.push_back({std::move(passage), {}});
        }
        AnnotatedPassage& ap = result.passages[index];
        if (!para.contains("qas")) continue;
        for (const json& qa : para.at("qas")) {
          const std::string qid = qa.value("id", record);
          for (const json& ans : qa.at("answers")) {
            const std::string text = ans.at("text").get<std::string>();
            const int start = ans.at("answer_start").get<int>();
            const int end = start + static_cast<int>(utf8::Length(text));
            AddSpan(ap, offsets[index], {{start, end}, text}, record + "/" + qid,
                    result.rejects);
          }
        }
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCategory::kParse, path.string() + ": " + e.what());
  }
  for (AnnotatedPassage& ap : result.passages) SortSpans(ap);
  return result;
}

LoadResult LoadExhaustive(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::kIo, "cannot open " + path.string());
  LoadResult result;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCategory::kParse, where + ": " + e.what());
    }
    try {
      std::string id = rec.at("id").get<std::string>();
      std::string context = rec.at("context").get<std::string>();
      AnnotatedPassage ap;
      try {
        ap.passage = MakePassage(id, std::move(context));
      } catch (const Error&) {
        result.rejects.push_back({id, "empty context"});
        continue;
      }
      const auto offsets = utf8::CodePointOffsets(ap.passage.text);
      for (const json& ans : rec.at("answers")) {
        AnswerSpan span{{ans.at("char_start").get<int>(), ans.at("char_end").get<int>()},
                        ans.at("text").get<std::string>()};
        AddSpan(ap, offsets, std::move(span), id, result.rejects);
      }
      SortSpans(ap);
      result.passages.push_back(std::move(ap));
    } catch (const json::exception& e) {
      throw Error(ErrorCategory::kParse, where + ": " + e.what());
    }
  }
  return result;
}

LoadResult LoadCorpus(const std::filesystem::path& path, CorpusFormat format) {
  return format == CorpusFormat::kSquad ? LoadSquad(path) : LoadExhaustive(path);
}

json ToExhaustiveRecord(const AnnotatedPassage& ap) {
  json answers = json::array();
  for (const AnswerSpan& s : ap.spans) {
    answers.push_back({{"text", s.answer_text},
                       {"char_start", s.range.start},
                       {"char_end", s.range.end}});
  }
  return json{{"id", ap.passage.id}, {"context", ap.passage.text}, {"answers", answers}};
}

std::string ToExhaustiveJsonl(std::span<const AnnotatedPassage> corpus) {
  std::string out;
  for (const AnnotatedPassage& ap : corpus) {
    out += ToExhaustiveRecord(ap).dump();
    out += '\n';
  }
  return out;
}

void WriteExhaustive(const std::filesystem::path& path,
                     std::span<const AnnotatedPassage> corpus) {
  WriteFileAtomic(path, ToExhaustiveJsonl(corpus));
}

json RejectsToJson(std::span<const Reject> rejects) {
  json out = json::array();
  for (const Reject& r : rejects) out.push_back({{"record", r.record}, {"reason", r.reason}});
  return out;
}

}  // namespace dmr
