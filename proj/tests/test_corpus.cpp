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

#include <gtest/gtest.h>

#include <fstream>

#include "dmr/corpus.hpp"
#include "dmr/random.hpp"
#include "dmr/synth.hpp"
#include "test_util.hpp"

namespace dmr {
namespace {

using testing::TempDir;

void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

TEST(Tokenize, SplitsPunctuation) {
  const WordTokenization t = TokenizeWords("Add 2 tablespoons (30 ml)");
  EXPECT_EQ(t.tokens, (std::vector<std::string>{"Add", "2", "tablespoons", "(", "30", "ml", ")"}));
}

TEST(Tokenize, Offsets) {
  const WordTokenization t = TokenizeWords("3 to 5 minutes");
  EXPECT_EQ(t.offsets, (std::vector<CharRange>{{0, 1}, {2, 4}, {5, 6}, {7, 14}}));
}

TEST(Tokenize, RejectsBlank) {
  EXPECT_THROW(TokenizeWords("   "), Error);
  EXPECT_THROW(TokenizeWords(""), Error);
}

TEST(Tokenize, RoundTripWithUnicode) {
  const std::string text = "Préchauffez le four à 180 °C — puis « mélangez » l’huile…";
  const Passage p = MakePassage("u", text);
  for (int i = 0; i < p.size(); ++i) {
    EXPECT_EQ(utf8::Substr(text, p.word_offsets[static_cast<std::size_t>(i)]),
              p.word_tokens[static_cast<std::size_t>(i)]);
  }
  for (std::size_t i = 1; i < p.word_offsets.size(); ++i) {
    EXPECT_LE(p.word_offsets[i - 1].end, p.word_offsets[i].start);
  }
}

AnnotatedPassage Annotate(const std::string& text, std::vector<CharRange> ranges) {
  AnnotatedPassage ap{MakePassage("p", text), {}};
  for (CharRange r : ranges) ap.spans.push_back({r, utf8::Substr(text, r)});
  return ap;
}

TEST(Labels, OverlapRule) {
  EXPECT_EQ(SpansToLabels(Annotate("Add 2 tablespoons of oil", {{4, 17}})).labels,
            (std::vector<std::uint8_t>{0, 1, 1, 0, 0}));
  EXPECT_EQ(SpansToLabels(Annotate("Add 2 tablespoons of oil", {})).labels,
            (std::vector<std::uint8_t>(5, 0)));
  // Tokens {1,2} and {2,3} overlap at token 2.
  EXPECT_EQ(SpansToLabels(Annotate("a bb cc dd e", {{2, 7}, {5, 10}})).labels,
            (std::vector<std::uint8_t>{0, 1, 1, 1, 0}));
  // Partial-word overlap still counts.
  EXPECT_EQ(SpansToLabels(Annotate("tablespoons of oil", {{5, 11}})).labels,
            (std::vector<std::uint8_t>{1, 0, 0}));
}

TEST(Labels, AddingSpansIsMonotone) {
  Rng rng(3);
  const Passage p = MakePassage("p", "Heat the oil in a large pot over medium heat for 3 to 5 minutes .");
  const int len = static_cast<int>(utf8::Length(p.text));
  std::vector<CharRange> ranges;
  TokenLabelSeq prev = RangesToLabels(p, ranges);
  for (int k = 0; k < 20; ++k) {
    const int a = static_cast<int>(rng.Below(static_cast<std::size_t>(len)));
    const int b = a + 1 + static_cast<int>(rng.Below(static_cast<std::size_t>(len - a)));
    ranges.push_back({a, b});
    const TokenLabelSeq now = RangesToLabels(p, ranges);
    for (std::size_t i = 0; i < now.labels.size(); ++i) EXPECT_GE(now.labels[i], prev.labels[i]);
    prev = now;
  }
}

TEST(Stats, HandCases) {
  std::vector<AnnotatedPassage> one{Annotate("a b c d e f g h i j", {{0, 9}})};
  CorpusStats s = ComputeCorpusStats(one);
  EXPECT_EQ(s.passage_count, 1u);
  EXPECT_DOUBLE_EQ(s.avg_passage_length, 10.0);
  EXPECT_DOUBLE_EQ(s.answer_context_ratio, 0.5);

  std::string thirty;
  for (int i = 0; i < 30; ++i) thirty += (i ? " w" : "w");
  std::vector<AnnotatedPassage> two{Annotate("a b c d e f g h i j", {{0, 3}}),
                                    Annotate(thirty, {{0, 11}})};
  s = ComputeCorpusStats(two);
  EXPECT_DOUBLE_EQ(s.answer_context_ratio, 8.0 / 40.0);
  EXPECT_DOUBLE_EQ(s.avg_passage_length, 20.0);
  EXPECT_THROW(ComputeCorpusStats(std::vector<AnnotatedPassage>{}), Error);
}

// Character-marking oracle: mark answer characters, then count tokens with
// at least one marked character.
TEST(Stats, RatioMatchesCharacterMarkingOracle) {
  const TemplateCatalog catalog = DefaultCookingTemplates();
  std::vector<AnnotatedPassage> corpus = Generate(catalog.templates, catalog.fillers, 200, 31);
  Rng rng(8);
  // Add random overlapping spans so the oracle sees more than filler ranges.
  for (AnnotatedPassage& ap : corpus) {
    const int len = static_cast<int>(utf8::Length(ap.passage.text));
    for (int k = 0; k < 2; ++k) {
      const int a = static_cast<int>(rng.Below(static_cast<std::size_t>(len)));
      const int b = std::min(len, a + 1 + static_cast<int>(rng.Below(12)));
      ap.spans.push_back({{a, b}, utf8::Substr(ap.passage.text, CharRange{a, b})});
    }
  }
  long tokens = 0, positive = 0;
  for (const AnnotatedPassage& ap : corpus) {
    std::vector<bool> marked(utf8::Length(ap.passage.text), false);
    for (const AnswerSpan& s : ap.spans) {
      for (int c = s.range.start; c < s.range.end; ++c) marked[static_cast<std::size_t>(c)] = true;
    }
    for (const CharRange& w : ap.passage.word_offsets) {
      ++tokens;
      bool any = false;
      for (int c = w.start; c < w.end; ++c) any = any || marked[static_cast<std::size_t>(c)];
      positive += any;
    }
  }
  const CorpusStats s = ComputeCorpusStats(corpus);
  EXPECT_EQ(s.token_count, static_cast<std::size_t>(tokens));
  EXPECT_EQ(s.answer_token_count, static_cast<std::size_t>(positive));
  EXPECT_EQ(s.answer_context_ratio, static_cast<double>(positive) / static_cast<double>(tokens));
}

const char* kSquadFixture = R"({"version": "1.1", "data": [
 {"title": "Broncos", "paragraphs": [
   {"context": "The game in Denver was won by the Broncos.",
    "qas": [
      {"id": "q1", "question": "Where?", "answers": [{"answer_start": 12, "text": "Denver"}]},
      {"id": "q2", "question": "Where again?", "answers": [{"answer_start": 12, "text": "Denver"},
                                                          {"answer_start": 34, "text": "Broncos"}]},
      {"id": "q3", "question": "Bad", "answers": [{"answer_start": 0, "text": "Denver"}]}]},
   {"context": "The game in Denver was won by the Broncos.",
    "qas": [{"id": "q4", "question": "Who?", "answers": [{"answer_start": 30, "text": "the Broncos"}]}]}]},
 {"title": "Other", "paragraphs": [
   {"context": "Heat 2 tablespoons of oil.", "qas": []}]}]})";

TEST(Squad, LoadDedupAndRejects) {
  TempDir dir("squad");
  WriteText(dir / "train.json", kSquadFixture);
  const LoadResult r = LoadSquad(dir / "train.json");
  ASSERT_EQ(r.passages.size(), 2u);
  const AnnotatedPassage& a = r.passages[0];
  ASSERT_EQ(a.spans.size(), 3u);
  EXPECT_EQ(a.spans[0].range, (CharRange{12, 18}));
  EXPECT_EQ(a.spans[0].answer_text, "Denver");
  ASSERT_EQ(r.rejects.size(), 1u);
  EXPECT_EQ(r.rejects[0].reason, "answer text mismatch");
  EXPECT_TRUE(r.passages[1].spans.empty());
}

TEST(Squad, MalformedJsonNamesPath) {
  TempDir dir("squad-bad");
  WriteText(dir / "broken.json", "{\"data\": [");
  try {
    LoadSquad(dir / "broken.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::kParse);
    EXPECT_NE(std::string(e.what()).find("broken.json"), std::string::npos);
  }
}

TEST(Exhaustive, LoadRecordsAndRejects) {
  TempDir dir("exh");
  WriteText(dir / "gold.jsonl",
            "{\"id\": \"a\", \"context\": \"Add oil.\", \"answers\": []}\n"
            "{\"id\": \"b\", \"context\": \"Add oil.\", \"answers\": [{\"text\": \"oil\", \"char_start\": 4, \"char_end\": 7}]}\n"
            "{\"id\": \"c\", \"context\": \"Add oil.\", \"answers\": [{\"text\": \"oil.x\", \"char_start\": 4, \"char_end\": 40}]}\n");
  const LoadResult r = LoadExhaustive(dir / "gold.jsonl");
  ASSERT_EQ(r.passages.size(), 3u);
  EXPECT_TRUE(r.passages[0].spans.empty());
  EXPECT_EQ(r.passages[1].spans.size(), 1u);
  ASSERT_EQ(r.rejects.size(), 1u);
  EXPECT_EQ(r.rejects[0].reason, "span out of bounds");
  WriteText(dir / "bad.jsonl", "{\"id\": \"a\", \"context\": \"x\", \"answers\": []}\n{oops\n");
  try {
    LoadExhaustive(dir / "bad.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("bad.jsonl:2"), std::string::npos);
  }
}

TEST(Exhaustive, FiftyRecords) {
  TempDir dir("exh50");
  const TemplateCatalog catalog = DefaultCookingTemplates();
  const std::vector<AnnotatedPassage> corpus = Generate(catalog.templates, catalog.fillers, 50, 2);
  WriteExhaustive(dir / "g.jsonl", corpus);
  EXPECT_EQ(LoadExhaustive(dir / "g.jsonl").passages.size(), 50u);
}

TEST(Exhaustive, SquadRoundTrip) {
  TempDir dir("roundtrip");
  WriteText(dir / "train.json", kSquadFixture);
  const LoadResult squad = LoadSquad(dir / "train.json");
  WriteExhaustive(dir / "out.jsonl", squad.passages);
  const LoadResult back = LoadExhaustive(dir / "out.jsonl");
  ASSERT_EQ(back.passages.size(), squad.passages.size());
  EXPECT_TRUE(back.rejects.empty());
  for (std::size_t i = 0; i < back.passages.size(); ++i) {
    EXPECT_EQ(back.passages[i].passage.id, squad.passages[i].passage.id);
    EXPECT_EQ(back.passages[i].passage.text, squad.passages[i].passage.text);
    EXPECT_EQ(back.passages[i].spans, squad.passages[i].spans);
  }
}

TEST(StatsReport, KeyValueAndJson) {
  const CorpusStats s = ComputeCorpusStats(std::vector<AnnotatedPassage>{Annotate("a b c d", {{0, 1}})});
  const std::string kv = StatsToKeyValue(s);
  EXPECT_NE(kv.find("passage_count = 1"), std::string::npos);
  EXPECT_EQ(StatsToJson(s)["answer_context_ratio"], 0.25);
}

TEST(Common, DeriveSeedAndSha) {
  EXPECT_NE(DeriveSeed(1, "a"), DeriveSeed(1, "b"));
  EXPECT_NE(DeriveSeed(1, "a", 0), DeriveSeed(1, "a", 1));
  EXPECT_EQ(DeriveSeed(7, "shuffle", 3), DeriveSeed(7, "shuffle", 3));
  EXPECT_EQ(Sha256Hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  Rng a(5), b(5);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.Bits(), b.Bits());
}

}  // namespace
}  // namespace dmr
