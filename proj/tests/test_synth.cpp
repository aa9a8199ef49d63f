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

#include <set>

#include "dmr/corpus.hpp"
#include "dmr/synth.hpp"

namespace dmr {
namespace {

bool HasFiller(const TemplateCatalog& c, const std::string& slot, const std::string& text) {
  for (const Filler& f : c.fillers.slots.at(slot)) {
    if (f.text == text) return true;
  }
  return false;
}

TEST(Catalog, DefaultShape) {
  const TemplateCatalog c = DefaultCookingTemplates();
  EXPECT_GE(c.templates.size(), 20u);
  EXPECT_GE(c.fillers.slots.size(), 5u);
  for (const auto& [slot, fillers] : c.fillers.slots) EXPECT_GE(fillers.size(), 8u) << slot;
  EXPECT_TRUE(HasFiller(c, "AMOUNT", "3 tablespoons (45 ml)"));
  EXPECT_TRUE(HasFiller(c, "SUBSTITUTION", "butter"));
  for (const char* slot : {"AMOUNT", "CONTAINER", "TIME", "HEAT_LEVEL", "SUBSTITUTION"}) {
    EXPECT_TRUE(c.fillers.slots.contains(slot)) << slot;
  }
  bool any_base = false, any_added = false;
  for (const auto& [slot, fillers] : c.fillers.slots) {
    for (const Filler& f : fillers) (f.added ? any_added : any_base) = true;
  }
  EXPECT_TRUE(any_base);
  EXPECT_TRUE(any_added);
}

TEST(Catalog, FormatRoundTrip) {
  const TemplateCatalog c = DefaultCookingTemplates();
  const TemplateCatalog back = ParseCatalog(FormatCatalog(c));
  EXPECT_EQ(FormatCatalog(back), FormatCatalog(c));
}

TEST(Catalog, ParseErrors) {
  EXPECT_THROW(ParseTemplate("t", "no slots here"), Error);
  EXPECT_THROW(ParseTemplate("t", "Add {AMOUNT}{CONTAINER}."), Error);
  EXPECT_THROW(ParseCatalog("template: t\ntext: Add {AMOUNT}.\nslot: AMOUNT\nbase: one\n"), Error);
  try {
    ParseCatalog("template: t\ntext: Add {AMOUNT} to {POT}.\nslot: AMOUNT\nbase: a\nbase: b\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("POT"), std::string::npos);
  }
}

TEST(Generate, TableExamplePassage) {
  const Template t = ParseTemplate("t", "Add {AMOUNT} of olive oil to a {CONTAINER}.");
  FillerCatalog f;
  f.slots["AMOUNT"] = {{"2 tablespoons (30 ml)", false}, {"1 cup", true}};
  f.slots["CONTAINER"] = {{"large pot", false}, {"wok", true}};
  const AnnotatedPassage ap = Render(t, f, {0, 0}, "x");
  EXPECT_EQ(ap.passage.text, "Add 2 tablespoons (30 ml) of olive oil to a large pot.");
  ASSERT_EQ(ap.spans.size(), 2u);
  EXPECT_EQ(ap.spans[0].answer_text, "2 tablespoons (30 ml)");
  EXPECT_EQ(ap.spans[0].range, (CharRange{4, 25}));
  EXPECT_EQ(ap.spans[1].answer_text, "large pot");
}

TEST(Generate, DeterministicAndValid) {
  const TemplateCatalog c = DefaultCookingTemplates();
  const auto a = Generate(c.templates, c.fillers, 300, 7);
  const auto b = Generate(c.templates, c.fillers, 300, 7);
  const auto other = Generate(c.templates, c.fillers, 300, 8);
  EXPECT_EQ(ToExhaustiveJsonl(a), ToExhaustiveJsonl(b));
  EXPECT_NE(ToExhaustiveJsonl(a), ToExhaustiveJsonl(other));
  std::set<std::string> ids;
  for (const AnnotatedPassage& ap : a) {
    ids.insert(ap.passage.id);
    const std::vector<std::size_t> bytes = utf8::CodePointOffsets(ap.passage.text);
    for (const AnswerSpan& s : ap.spans) EXPECT_EQ(CheckSpan(ap.passage, bytes, s), "");
    for (std::size_t i = 1; i < ap.spans.size(); ++i) {
      EXPECT_LE(ap.spans[i - 1].range.end, ap.spans[i].range.start);
    }
  }
  EXPECT_EQ(ids.size(), 300u);
  EXPECT_THROW(Generate(c.templates, c.fillers, 0, 7), Error);
}

TEST(Generate, LiteralsPlusFillersReproduceText) {
  const TemplateCatalog c = DefaultCookingTemplates();
  for (const AnnotatedPassage& ap : Generate(c.templates, c.fillers, 50, 3)) {
    // Removing the gold spans leaves exactly the literals of some template.
    std::string rest;
    int cursor = 0;
    const std::u32string text = utf8::Decode(ap.passage.text);
    for (const AnswerSpan& s : ap.spans) {
      rest += utf8::Encode(text.substr(static_cast<std::size_t>(cursor), static_cast<std::size_t>(s.range.start - cursor)));
      rest += "{}";
      cursor = s.range.end;
    }
    rest += utf8::Encode(text.substr(static_cast<std::size_t>(cursor)));
    bool matched = false;
    for (const Template& t : c.templates) {
      std::string lit;
      for (const TemplatePart& p : t.parts) lit += p.is_slot ? "{}" : p.text;
      matched = matched || lit == rest;
    }
    EXPECT_TRUE(matched) << ap.passage.text;
  }
}

TEST(Generate, EveryTemplateRendersWithSingletonCatalog) {
  const TemplateCatalog c = DefaultCookingTemplates();
  FillerCatalog singleton;
  for (const auto& [slot, fillers] : c.fillers.slots) singleton.slots[slot] = {fillers.front()};
  for (const Template& t : c.templates) {
    const auto out = Generate({t}, singleton, 1, 1);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].spans.size(), t.slot_names().size());
  }
}

TEST(Generate, RatioStableAcrossSeeds) {
  const TemplateCatalog c = DefaultCookingTemplates();
  std::vector<double> ratios;
  for (std::uint64_t seed : {1, 2, 3, 4}) {
    const CorpusStats s = ComputeCorpusStats(Generate(c.templates, c.fillers, 1000, seed));
    EXPECT_GT(s.answer_context_ratio, 0.0);
    EXPECT_LT(s.answer_context_ratio, 1.0);
    ratios.push_back(s.answer_context_ratio);
  }
  for (double r : ratios) EXPECT_NEAR(r, ratios.front(), 0.02);
}

}  // namespace
}  // namespace dmr
