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

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>

#include "dmr/baselines/analysis.hpp"
#include "dmr/baselines/llm.hpp"
#include "dmr/baselines/rules.hpp"
#include "dmr/synth.hpp"
#include "httplib.h"
#include "test_util.hpp"

namespace dmr {
namespace {

std::vector<std::string> Texts(const ExtractionResult& r) {
  std::vector<std::string> out;
  for (const CandidateSpan& s : r.spans) out.push_back(s.text);
  return out;
}

bool Contains(const std::vector<std::string>& v, const std::string& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

void ExpectWellFormed(const Passage& p, const ExtractionResult& r) {
  const std::vector<std::size_t> bytes = utf8::CodePointOffsets(p.text);
  const int len = static_cast<int>(bytes.size()) - 1;
  EXPECT_EQ(r.passage_id, p.id);
  for (std::size_t i = 0; i < r.spans.size(); ++i) {
    const CandidateSpan& s = r.spans[i];
    EXPECT_GE(s.range.start, 0);
    EXPECT_LT(s.range.start, s.range.end);
    EXPECT_LE(s.range.end, len);
    EXPECT_EQ(utf8::Substr(p.text, bytes, s.range), s.text);
    if (i > 0) {
      EXPECT_LE(r.spans[i - 1].range.end, s.range.start) << p.text;
    }
  }
}

// Word i of a passage "w0 w1 ... wN-1 ." as a char range.
CharRange Words(const Passage& p, int first, int last) {
  return {p.word_offsets[first].start, p.word_offsets[last - 1].end};
}

Passage TwentyWords() {
  std::string text;
  for (int i = 0; i < 20; ++i) text += (i ? " w" : "w") + std::to_string(i);
  return MakePassage("p20", text);
}

SyntacticAnalysis HandAnalysis(const Passage& p) {
  SyntacticAnalysis a;
  a.passage_id = p.id;
  a.capabilities = {true, true, true};
  SentenceAnalysis s;
  s.range = Words(p, 0, 20);
  s.entities = {{Words(p, 5, 7), "PERSON"}};
  s.tree = {{"S", Words(p, 0, 20), -1},
            {"S", Words(p, 3, 20), 0},   // 17 of 20 words
            {"VP", Words(p, 4, 14), 1},  // 10 words
            {"NP", Words(p, 5, 9), 2},
            {"ADJP", Words(p, 15, 17), 1}};
  s.chunks = {Words(p, 5, 9), Words(p, 5, 9), Words(p, 10, 12)};
  a.sentences.push_back(s);
  return a;
}

TEST(Fallback, CookingSentenceChunks) {
  const Passage p = MakePassage("c", "Add 2 tablespoons of olive oil to a large pot.");
  const SyntacticAnalysis a = FallbackAnalyzer().Analyze(p);
  ValidateAnalysis(a, p);
  const auto np = Texts(ExtractNounPhrases(p, a));
  EXPECT_TRUE(Contains(np, "2 tablespoons"));
  EXPECT_TRUE(Contains(np, "olive oil"));
  EXPECT_TRUE(Contains(np, "a large pot"));
  ASSERT_EQ(a.sentences.size(), 1u);
  bool has_vp = false;
  for (const Constituent& c : a.sentences[0].tree) has_vp = has_vp || c.label == "VP";
  EXPECT_TRUE(has_vp);
}

TEST(Fallback, EntitiesAndAdjectivePhrases) {
  const Passage p = MakePassage(
      "e", "Melt 4 tablespoons (60 ml) of butter in a pan. Turn the heat to medium-high and "
           "cook for 3 to 5 minutes. Preheat the oven to 350F. Marie Curie moved to Paris in 1891.");
  const SyntacticAnalysis a = FallbackAnalyzer().Analyze(p);
  ValidateAnalysis(a, p);
  EXPECT_EQ(a.sentences.size(), 4u);
  const ExtractionResult ne = ExtractNamedEntities(p, a);
  std::map<std::string, std::string> types;
  for (const CandidateSpan& s : ne.spans) types[s.text] = s.label;
  EXPECT_EQ(types["60 ml"], "QUANTITY");
  EXPECT_EQ(types["4 tablespoons"], "QUANTITY");
  EXPECT_EQ(types["3 to 5 minutes"], "TIME");
  EXPECT_EQ(types["350F"], "QUANTITY");
  EXPECT_EQ(types["Marie Curie"], "PERSON");
  EXPECT_EQ(types["1891"], "DATE");
  EXPECT_TRUE(types.contains("Paris"));
  const std::vector<std::string> adjp = {"ADJP"};
  EXPECT_TRUE(Contains(Texts(ExtractConstituents(p, a, adjp)), "medium-high"));
}

TEST(Fallback, NoNouns) {
  const Passage p = MakePassage("n", "Go quickly!");
  const SyntacticAnalysis a = FallbackAnalyzer().Analyze(p);
  EXPECT_TRUE(ExtractNounPhrases(p, a).spans.empty());
  EXPECT_TRUE(ExtractNamedEntities(p, a).spans.empty());
}

TEST(Fallback, InvariantsOnSyntheticAndOddText) {
  const TemplateCatalog c = DefaultCookingTemplates();
  std::vector<Passage> passages;
  for (const AnnotatedPassage& ap : Generate(c.templates, c.fillers, 150, 11)) passages.push_back(ap.passage);
  for (const char* text : {"...", "Hello", "3.5 cups, 1,000 people; U.S. troops -- (\"quoted\").",
                           "caf\xC3\xA9 na\xC3\xAFve \xE2\x80\x9Cquote\xE2\x80\x9D", "and and , , of the"}) {
    passages.push_back(MakePassage("odd", text));
  }
  FallbackAnalyzer analyzer;
  for (const Passage& p : passages) {
    const SyntacticAnalysis a = analyzer.Analyze(p);
    ASSERT_NO_THROW(ValidateAnalysis(a, p)) << p.text;
    EXPECT_EQ(AnalysisToJson(analyzer.Analyze(p)), AnalysisToJson(a));
    for (const std::string& m : RuleBaselineNames()) ExpectWellFormed(p, RunRuleBaseline(m, p, a));

    // DiverseQA covers every token Extended NE does, and its per-source view
    // matches the standalone constituent extractors.
    const DiverseQaResult dqa = ExtractDiverseQa(p, a);
    const TokenLabelSeq all = ResultToLabels(dqa.merged, p);
    const TokenLabelSeq ext = ResultToLabels(ExtractExtendedEntities(p, a), p);
    for (std::size_t k = 0; k < all.labels.size(); ++k) EXPECT_GE(all.labels[k], ext.labels[k]);
    for (const char* label : {"VP", "NP", "ADJP", "S"}) {
      const std::vector<std::string> labels = {label};
      std::string source(label);
      std::transform(source.begin(), source.end(), source.begin(), ::tolower);
      const ExtractionResult by_source = dqa.BySource(p, source);
      const ExtractionResult direct = ExtractConstituents(p, a, labels);
      ASSERT_EQ(by_source.spans.size(), direct.spans.size());
      for (std::size_t k = 0; k < direct.spans.size(); ++k) {
        EXPECT_EQ(by_source.spans[k].range, direct.spans[k].range);
        EXPECT_EQ(by_source.spans[k].sources, direct.spans[k].sources);
      }
    }
  }
}

TEST(Rules, DuplicateChunksDeduplicated) {
  const Passage p = TwentyWords();
  const ExtractionResult r = ExtractNounPhrases(p, HandAnalysis(p));
  ASSERT_EQ(r.spans.size(), 2u);
  EXPECT_EQ(r.spans[0].text, "w5 w6 w7 w8");
}

TEST(Rules, NestedEntitiesKeepOutermost) {
  const Passage p = TwentyWords();
  SyntacticAnalysis a = HandAnalysis(p);
  a.sentences[0].entities = {{Words(p, 2, 3), "CARDINAL"}, {Words(p, 1, 4), "DATE"}, {Words(p, 8, 9), "NAME"}};
  const ExtractionResult r = ExtractNamedEntities(p, a);
  ASSERT_EQ(r.spans.size(), 2u);
  EXPECT_EQ(r.spans[0].text, "w1 w2 w3");
  EXPECT_EQ(r.spans[0].label, "DATE");
  a.sentences[0].entities.clear();
  EXPECT_TRUE(ExtractNamedEntities(p, a).spans.empty());
}

TEST(Rules, ExtendedEntityLengthRule) {
  const Passage p = TwentyWords();
  const SyntacticAnalysis a = HandAnalysis(p);
  ExtendedNeConfig at_least;
  const ExtractionResult r = ExtractExtendedEntities(p, a, at_least);
  ASSERT_EQ(r.spans.size(), 1u);
  EXPECT_EQ(r.spans[0].range, Words(p, 3, 20));

  ExtendedNeConfig at_most{0.8, LengthRule::kAtMost};
  const ExtractionResult m = ExtractExtendedEntities(p, a, at_most);
  ASSERT_EQ(m.spans.size(), 1u);
  EXPECT_EQ(m.spans[0].range, Words(p, 4, 14));

  SyntacticAnalysis bare = a;
  bare.sentences[0].tree = {{"NP", Words(p, 5, 9), -1}};
  const ExtractionResult f = ExtractExtendedEntities(p, bare, at_least);
  ASSERT_EQ(f.spans.size(), 1u);
  EXPECT_EQ(f.spans[0].range, Words(p, 5, 7));
  EXPECT_THROW(ExtractExtendedEntities(p, a, {1.5, LengthRule::kAtLeast}), Error);
}

TEST(Rules, DiverseQaUnionAndSourceTags) {
  const Passage p = TwentyWords();
  SyntacticAnalysis a = HandAnalysis(p);
  // The entity extends to the inner S, which is also an S constituent.
  const DiverseQaResult r = ExtractDiverseQa(p, a);
  const auto it = std::find_if(r.parts.begin(), r.parts.end(),
                               [&](const CandidateSpan& s) { return s.range == Words(p, 3, 20); });
  ASSERT_NE(it, r.parts.end());
  EXPECT_EQ(it->sources, (std::vector<std::string>{"extended_ne", "s"}));
  ASSERT_EQ(r.merged.spans.size(), 1u);
  EXPECT_EQ(r.merged.spans[0].range, Words(p, 0, 20));
  const ExtractionResult vp = r.BySource(p, "vp");
  ASSERT_EQ(vp.spans.size(), 1u);
  EXPECT_EQ(vp.spans[0].text, "w4 w5 w6 w7 w8 w9 w10 w11 w12 w13");
}

TEST(Rules, MissingCapability) {
  const Passage p = TwentyWords();
  SyntacticAnalysis a = HandAnalysis(p);
  a.capabilities = {true, false, false};
  EXPECT_NO_THROW(ExtractNounPhrases(p, a));
  for (const char* m : {"ne", "extended_ne", "diverseqa", "vp"}) {
    try {
      RunRuleBaseline(m, p, a);
      ADD_FAILURE() << m;
    } catch (const Error& e) {
      EXPECT_EQ(e.category(), ErrorCategory::kConfig);
    }
  }
  a.capabilities = {false, true, true};
  EXPECT_THROW(ExtractNounPhrases(p, a), Error);
  EXPECT_THROW(RunRuleBaseline("nope", p, a), Error);
}

TEST(Analysis, ValidationRejectsBadTrees) {
  const Passage p = TwentyWords();
  SyntacticAnalysis a = HandAnalysis(p);
  EXPECT_NO_THROW(ValidateAnalysis(a, p));
  a.sentences[0].tree[3].range = Words(p, 2, 9);  // NP leaks out of its VP
  EXPECT_THROW(ValidateAnalysis(a, p), Error);
  a = HandAnalysis(p);
  a.sentences[0].chunks.push_back({0, 1000});
  EXPECT_THROW(ValidateAnalysis(a, p), Error);
}

TEST(Analysis, JsonlAdapterAndRegistry) {
  testing::TempDir dir("analysis");
  const Passage p = TwentyWords();
  SyntacticAnalysis a = HandAnalysis(p);
  a.capabilities.chunks = false;
  WriteFileAtomic(dir / "a.jsonl", AnalysisToJson(a).dump() + "\n");
  const auto adapter = MakeAnalyzer("jsonl", {{"path", (dir / "a.jsonl").string()}});
  EXPECT_EQ(adapter->name(), "jsonl");
  EXPECT_FALSE(adapter->capabilities().chunks);
  EXPECT_EQ(AnalysisToJson(adapter->Analyze(p)), AnalysisToJson(a));
  EXPECT_THROW(adapter->Analyze(MakePassage("other", "x")), Error);
  EXPECT_EQ(MakeAnalyzer("fallback")->name(), "fallback");
  EXPECT_THROW(MakeAnalyzer("spacy"), Error);
  EXPECT_THROW(MakeAnalyzer("jsonl"), Error);
  RegisterAnalyzer("custom", [](const nlohmann::json&) { return std::make_unique<FallbackAnalyzer>(); });
  EXPECT_TRUE(Contains(AnalyzerNames(), "custom"));
}

TEST(Llm, PromptAndParsing) {
  const std::string prompt = BuildPrompt("Passage.");
  EXPECT_TRUE(prompt.starts_with("Extracting qualified candidate answers from context passages is a "
                                 "critical step for most question generation systems. Please extract "
                                 "an exhaustive list of candidate answers (substrings from the "
                                 "following context passage): "));
  EXPECT_TRUE(prompt.ends_with(": Passage."));
  EXPECT_EQ(ParseListItems("1. olive oil\n2. large pot"), (std::vector<std::string>{"olive oil", "large pot"}));
  EXPECT_EQ(ParseListItems("Candidates:\n- \"olive oil\"\n\n* 3) x\n10) ten\n"),
            (std::vector<std::string>{"Candidates:", "olive oil", "3) x", "ten"}));
}

TEST(Llm, LocateLeftmostAndDrop) {
  const Passage p = MakePassage("l", "Add olive oil to a large pot, then more olive oil.");
  const LocatedItems r = LocateItems(p, {"olive oil", "large pot", "extra virgin oil"});
  EXPECT_EQ(r.dropped, 1);
  ASSERT_EQ(r.spans.size(), 2u);
  EXPECT_EQ(r.spans[0].range, (CharRange{4, 13}));
  EXPECT_EQ(r.spans[1].text, "large pot");
}

class FakeEndpoint {
 public:
  FakeEndpoint() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      ++calls;
      last_body = nlohmann::json::parse(req.body);
      last_auth = req.get_header_value("Authorization");
      if (fail_first > 0) {
        --fail_first;
        res.status = 503;
        return;
      }
      const nlohmann::json reply = {
          {"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}};
      res.set_content(reply.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeEndpoint() { Stop(); }
  void Stop() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

  std::atomic<int> calls{0};
  int fail_first = 0;
  std::string content = "1. olive oil\n2. large pot\n3. extra virgin oil";
  nlohmann::json last_body;
  std::string last_auth;

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

LlmClientConfig TestConfig(const std::string& url) {
  LlmClientConfig c;
  c.base_url = url;
  c.api_key_env = "DMR_TEST_LLM_KEY";
  c.min_interval_seconds = 0.0;
  c.backoff_seconds = 0.0;
  c.max_retries = 2;
  c.timeout_seconds = 5.0;
  return c;
}

TEST(Llm, ClientAgainstLocalEndpointWithCache) {
  ::setenv("DMR_TEST_LLM_KEY", "sk-test", 1);
  testing::TempDir dir("llm");
  FakeEndpoint server;
  LlmClientConfig cfg = TestConfig(server.url());
  cfg.cache_dir = dir / "cache";
  const Passage p = MakePassage("q", "Add 2 tablespoons of olive oil to a large pot.");

  LlmClient client(cfg);
  const LlmExtraction r = client.Extract(p);
  EXPECT_FALSE(r.cache_hit);
  EXPECT_EQ(r.items, 3);
  EXPECT_EQ(r.dropped, 1);
  EXPECT_EQ(Texts(r.result), (std::vector<std::string>{"olive oil", "large pot"}));
  EXPECT_EQ(server.last_auth, "Bearer sk-test");
  EXPECT_EQ(server.last_body.at("temperature").get<double>(), 0.0);
  EXPECT_EQ(server.last_body.at("model"), cfg.model);
  EXPECT_EQ(server.last_body.at("messages").at(0).at("content"), BuildPrompt(p.text));

  server.Stop();
  LlmClient offline(cfg);
  const LlmExtraction again = offline.Extract(p);
  EXPECT_TRUE(again.cache_hit);
  EXPECT_EQ(again.cache_key, r.cache_key);
  EXPECT_EQ(Texts(again.result), Texts(r.result));
  EXPECT_EQ(server.calls, 1);
}

TEST(Llm, RetriesThenSucceeds) {
  ::setenv("DMR_TEST_LLM_KEY", "sk-test", 1);
  FakeEndpoint server;
  server.fail_first = 2;
  server.content = "nothing here";
  LlmClient client(TestConfig(server.url()));
  const LlmExtraction r = client.Extract(MakePassage("q", "A passage."));
  EXPECT_EQ(server.calls, 3);
  EXPECT_TRUE(r.result.spans.empty());
  EXPECT_EQ(r.warnings.size(), 1u);
}

TEST(Llm, TransportAndKeyErrors) {
  ::setenv("DMR_TEST_LLM_KEY", "sk-test", 1);
  int port = 0;
  {
    FakeEndpoint probe;
    port = std::stoi(probe.url().substr(probe.url().rfind(':') + 1));
  }
  LlmClientConfig cfg = TestConfig("http://127.0.0.1:" + std::to_string(port));
  cfg.max_retries = 1;
  LlmClient client(cfg);
  try {
    client.Extract(MakePassage("q", "A passage."));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::kTransport);
  }
  ::unsetenv("DMR_TEST_LLM_KEY");
  EXPECT_THROW(LlmClient(cfg).Extract(MakePassage("q", "A passage.")), Error);
  cfg.temperature = 0.7;
  EXPECT_THROW(LlmClient{cfg}, Error);
}

}  // namespace
}  // namespace dmr
