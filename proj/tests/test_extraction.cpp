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

#include "dmr/eval.hpp"
#include "dmr/extraction.hpp"
#include "dmr/random.hpp"
#include "dmr/synth.hpp"
#include "dmr/training/trainer.hpp"
#include "test_util.hpp"

namespace dmr {
namespace {

SubwordEncoding TwoWordEncoding() {
  SubwordEncoding enc;
  enc.passage_id = "p";
  enc.ids = {2, 7, 8, 9, 3};
  enc.subword_to_word = {-1, 0, 0, 1, -1};
  enc.valid.assign(5, 1);
  enc.word_count = 2;
  return enc;
}

TEST(WordMaskProbsTest, MaxOverSubwords) {
  const SubwordEncoding enc = TwoWordEncoding();
  const std::vector<double> keep{1.0, 0.9, 0.2, 0.7, 1.0};
  const WordScores s = WordMaskProbs(enc, keep);
  EXPECT_NEAR(s.values[0], 0.8, 1e-12);
  EXPECT_NEAR(s.values[1], 0.3, 1e-12);
  EXPECT_FALSE(s.truncated);
  const WordScores mean = WordMaskProbs(enc, keep, WordAggregation::kMean);
  EXPECT_NEAR(mean.values[0], 0.45, 1e-12);
  const std::vector<double> all_keep(5, 1.0);
  EXPECT_EQ(WordMaskProbs(enc, all_keep).values, std::vector<double>({0.0, 0.0}));
}

TEST(WordMaskProbsTest, TruncatedWordsGetZero) {
  SubwordEncoding enc = TwoWordEncoding();
  enc.word_count = 3;
  enc.truncated = true;
  const std::vector<double> keep{1.0, 0.1, 0.1, 0.1, 1.0};
  const WordScores s = WordMaskProbs(enc, keep);
  EXPECT_EQ(s.values[2], 0.0);
  EXPECT_TRUE(s.truncated);
}

TEST(ExtractFromScoresTest, ThresholdAndRunMerge) {
  const Passage p = MakePassage("p", "Add two spoons of oil");
  const ExtractionResult r = ExtractFromScores(p, std::vector<double>{0.9, 0.8, 0.1, 0.95, 0.9}, 0.5);
  ASSERT_EQ(r.spans.size(), 2u);
  EXPECT_EQ(r.spans[0].text, "Add two");
  EXPECT_EQ(r.spans[1].text, "of oil");
  EXPECT_EQ(r.spans[0].range, (CharRange{0, 7}));
  EXPECT_NEAR(r.spans[1].score, 0.925, 1e-12);
  EXPECT_TRUE(ExtractFromScores(p, std::vector<double>(5, 0.2), 0.5).spans.empty());
}

TEST(ExtractFromScoresTest, PunctuationTrimmedAndDropped) {
  const Passage p = MakePassage("p", "Use (30 ml) of oil , please .");
  // Use ( 30 ml ) of oil , please .
  const std::vector<double> s{0.1, 0.9, 0.9, 0.9, 0.9, 0.1, 0.1, 0.9, 0.1, 0.9};
  const ExtractionResult r = ExtractFromScores(p, s, 0.5);
  ASSERT_EQ(r.spans.size(), 1u);
  EXPECT_EQ(r.spans[0].text, "30 ml");
  const ExtractionResult inner = ExtractFromScores(p, std::vector<double>{0.9, 0.9, 0.9, 0.9, 0.9, 0.1, 0.1, 0.1, 0.1, 0.1}, 0.5);
  ASSERT_EQ(inner.spans.size(), 1u);
  EXPECT_EQ(inner.spans[0].text, "Use (30 ml");
}

TEST(ExtractFromScoresTest, AgreesWithThresholdingAndIsMonotone) {
  const TemplateCatalog catalog = DefaultCookingTemplates();
  const std::vector<AnnotatedPassage> corpus = Generate(catalog.templates, catalog.fillers, 100, 17);
  Rng rng(5);
  for (const AnnotatedPassage& ap : corpus) {
    const Passage& p = ap.passage;
    std::vector<double> scores;
    for (int i = 0; i < p.size(); ++i) scores.push_back(rng.Uniform());
    const TokenLabelSeq labels = ResultToLabels(ExtractFromScores(p, scores, 0.5), p);
    for (int i = 0; i < p.size(); ++i) {
      const auto k = static_cast<std::size_t>(i);
      if (IsPunctuationToken(p.word_tokens[k])) {
        if (labels.labels[k]) {
          EXPECT_GE(scores[k], 0.5);
        }
        continue;
      }
      EXPECT_EQ(labels.labels[k], scores[k] >= 0.5 ? 1 : 0);
    }
    TokenLabelSeq prev = ResultToLabels(ExtractFromScores(p, scores, 0.9), p);
    for (double theta : {0.7, 0.5, 0.3, 0.1}) {
      const TokenLabelSeq now = ResultToLabels(ExtractFromScores(p, scores, theta), p);
      for (std::size_t k = 0; k < now.labels.size(); ++k) {
        if (prev.labels[k]) {
          EXPECT_EQ(now.labels[k], 1);
        }
      }
      prev = now;
    }
  }
}

TEST(ResultToLabelsTest, Cases) {
  const Passage p = MakePassage("p", "a b c d e f");
  ExtractionResult r;
  r.passage_id = "p";
  EXPECT_EQ(ResultToLabels(r, p).labels, std::vector<std::uint8_t>(6, 0));
  r.spans.push_back({{6, 9}, "d e", 1.0, {}, {}});
  EXPECT_EQ(ResultToLabels(r, p).labels, (std::vector<std::uint8_t>{0, 0, 0, 1, 1, 0}));
  r.passage_id = "q";
  EXPECT_THROW(ResultToLabels(r, p), Error);
}

TEST(ResultsIo, JsonlRoundTrip) {
  testing::TempDir dir("results");
  ExtractionResult r;
  r.passage_id = "p1";
  r.threshold = 0.5;
  r.spans.push_back({{0, 3}, "Add", 0.75, "NP", {"np", "vp"}});
  r.spans.push_back({{8, 11}, "oil", 0.5, {}, {}});
  WriteResults(dir / "r.jsonl", std::vector<ExtractionResult>{r});
  const std::vector<ExtractionResult> back = LoadResults(dir / "r.jsonl");
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(ResultsToJsonl(back), ResultsToJsonl(std::vector<ExtractionResult>{r}));
}

TEST(MergeSpansTest, OverlapsMergeWithSources) {
  const Passage p = MakePassage("p", "Add the olive oil now");
  std::vector<CandidateSpan> spans{{{8, 17}, "", 0.2, {}, {"np"}},
                                   {{4, 13}, "", 0.4, {}, {"vp"}},
                                   {{18, 21}, "", 0.1, {}, {"np"}},
                                   {{4, 13}, "", 0.3, {}, {"np"}}};
  const std::vector<CandidateSpan> out = MergeSpans(p, spans);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].text, "the olive oil");
  EXPECT_EQ(out[0].sources, (std::vector<std::string>{"np", "vp"}));
  EXPECT_EQ(out[1].text, "now");
}

TEST(SpanScorerTest, ClassifierOverfitsItsOwnLabels) {
  const TemplateCatalog catalog = DefaultCookingTemplates();
  const std::vector<AnnotatedPassage> corpus = Generate(catalog.templates, catalog.fillers, 10, 3);
  std::vector<Passage> passages;
  std::vector<TokenLabelSeq> labels;
  for (const AnnotatedPassage& ap : corpus) {
    passages.push_back(ap.passage);
    labels.push_back(SpansToLabels(ap));
  }
  TrainConfig cfg;
  cfg.num_layers = 2;
  cfg.hidden_size = 32;
  cfg.num_heads = 4;
  cfg.ff_size = 64;
  cfg.effective_batch_size = 2;
  cfg.learning_rate = 3e-3;
  cfg.epochs = 40;
  cfg.convergence_patience = 0;
  cfg.vocab_min_count = 1;
  const SupervisedTrainResult r = TrainSupervised(passages, labels, cfg);
  const SpanScorer scorer(r.classifier);
  // Word-level decisions before span trimming, which would drop the closing
  // parentheses that some gold fillers end with.
  std::vector<TokenLabelSeq> pred;
  for (const Passage& p : passages) {
    TokenLabelSeq t{p.id, {}};
    for (double v : scorer.Score(p, {}).values) t.labels.push_back(v >= 0.5 ? 1 : 0);
    pred.push_back(std::move(t));
  }
  EXPECT_GE(TokenPrf(labels, pred).f1, 0.99);
  // Inference is deterministic.
  EXPECT_EQ(ResultsToJsonl(std::vector<ExtractionResult>{scorer.Extract(passages[0], {})}),
            ResultsToJsonl(std::vector<ExtractionResult>{scorer.Extract(passages[0], {})}));
}

TEST(SpanScorerTest, RejectsReconstructorCheckpoint) {
  Checkpoint c;
  c.role = "reconstructor";
  EXPECT_THROW(SpanScorer{c}, Error);
}

}  // namespace
}  // namespace dmr
