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


// Rule-based fallback analyzer. Glued punctuation ("medium-high", "3.5",
// "don't") is folded into one unit before tagging; everything downstream
// works on units and converts to character ranges at the end.

#include <algorithm>
#include <cctype>
#include <optional>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

#include "dmr/baselines/analysis.hpp"

namespace dmr {

namespace {

enum class Tag { kDT, kPRP, kPRPS, kIN, kTO, kCC, kSUB, kMD, kAUX, kVB, kVBN, kVBG, kRB, kJJ, kCD, kNN, kNNP, kPUNCT };

using WordSet = std::unordered_set<std::string_view>;

const std::unordered_map<std::string_view, Tag>& ClosedClass() {
  static const std::unordered_map<std::string_view, Tag> m = [] {
    std::unordered_map<std::string_view, Tag> t;
    for (std::string_view w : {"a", "an", "the", "this", "these", "those", "each", "every", "some",
                               "any", "all", "both", "no", "another", "either", "neither"}) {
      t[w] = Tag::kDT;
    }
    for (std::string_view w : {"my", "your", "his", "her", "its", "our", "their"}) t[w] = Tag::kPRPS;
    for (std::string_view w : {"i", "you", "he", "she", "it", "we", "they", "me", "him", "us", "them",
                               "itself", "themselves", "yourself", "one"}) {
      t[w] = Tag::kPRP;
    }
    for (std::string_view w : {"of", "in", "on", "at", "for", "with", "from", "by", "into", "onto",
                               "over", "under", "about", "after", "before", "during", "through",
                               "between", "without", "within", "per", "like", "than", "as",
                               "against", "among", "across", "around", "behind", "beside", "near",
                               "toward", "towards", "upon", "throughout", "via", "off", "out", "up",
                               "down", "along", "inside", "since"}) {
      t[w] = Tag::kIN;
    }
    t["to"] = Tag::kTO;
    for (std::string_view w : {"and", "or", "but", "nor", "yet"}) t[w] = Tag::kCC;
    for (std::string_view w : {"if", "when", "while", "until", "because", "which", "who", "whom",
                               "whose", "where", "whether", "although", "though", "unless", "so",
                               "whereas", "that"}) {
      t[w] = Tag::kSUB;
    }
    for (std::string_view w : {"can", "could", "should", "would", "will", "may", "might", "must",
                               "shall", "can't", "won't", "don't", "doesn't", "didn't",
                               "shouldn't", "wouldn't", "couldn't"}) {
      t[w] = Tag::kMD;
    }
    for (std::string_view w : {"is", "are", "was", "were", "be", "been", "being", "am", "has", "have",
                               "had", "do", "does", "did", "isn't", "aren't", "wasn't", "weren't"}) {
      t[w] = Tag::kAUX;
    }
    for (std::string_view w : {"not", "very", "too", "also", "then", "there", "here", "once", "roughly",
                               "approximately", "just", "still", "well", "again", "now", "halfway",
                               "almost", "nearly", "often", "always", "never", "soon", "only",
                               "even", "later", "already", "together", "instead", "gently", "until",
                               "first", "away", "back", "evenly", "quickly", "slowly"}) {
      if (!t.contains(w)) t[w] = Tag::kRB;
    }
    for (std::string_view w : {"zero", "one", "two", "three", "four", "five", "six", "seven", "eight",
                               "nine", "ten", "eleven", "twelve", "fifteen", "twenty", "thirty",
                               "forty", "fifty", "hundred", "thousand", "million", "billion", "half",
                               "dozen"}) {
      if (w != "one") t[w] = Tag::kCD;
    }
    return t;
  }();
  return m;
}

const WordSet& Verbs() {
  static const WordSet s = {
      "add", "place", "put", "turn", "heat", "allow", "take", "leave", "toss", "roast", "melt", "stir",
      "let", "soften", "preheat", "substitute", "use", "cook", "bake", "boil", "simmer", "fry",
      "saute", "pour", "mix", "whisk", "beat", "chop", "dice", "slice", "mince", "grate", "crush",
      "season", "serve", "remove", "cover", "drain", "coat", "brush", "sprinkle", "combine",
      "transfer", "reduce", "bring", "set", "keep", "wait", "start", "shimmer", "make", "get", "go",
      "come", "see", "know", "think", "become", "begin", "show", "find", "give", "tell", "call", "try",
      "need", "feel", "seem", "include", "continue", "follow", "lead", "hold", "build", "win", "lose",
      "play", "move", "live", "believe", "write", "provide", "run", "return", "open", "close",
      "form", "create", "develop", "receive", "remain", "consider", "appear", "buy", "sell", "pay",
      "meet", "report", "describe", "establish", "produce", "publish", "announce", "introduce",
      "release", "rise", "fall", "grow", "spend", "increase", "expand", "attend", "locate", "name",
      "refer", "mean", "help", "ask", "work", "want", "like", "prefer", "check", "flip", "grease",
      "line", "rinse", "pat", "wrap", "rest", "cool", "warm", "taste", "adjust", "discard", "fill",
      "lower", "raise", "stop", "change", "replace", "cut", "divide", "spread", "press", "fold",
      "knead", "roll", "shape", "arrange", "scatter", "blend", "puree", "strain", "skim", "baste",
      "marinate", "broil", "grill", "steam", "poach", "sear", "brown", "caramelize", "deglaze",
      "require", "contain", "allow", "represent", "serve", "occur", "happen", "exist", "become",
      "marry", "die", "study", "teach", "design", "invent", "discover", "defeat", "join", "leave"};
  return s;
}

const std::unordered_map<std::string_view, Tag>& IrregularVerbs() {
  static const std::unordered_map<std::string_view, Tag> m = {
      {"made", Tag::kVBN},  {"took", Tag::kVBN},   {"taken", Tag::kVBN}, {"began", Tag::kVBN},
      {"begun", Tag::kVBN}, {"became", Tag::kVBN}, {"gave", Tag::kVBN},  {"given", Tag::kVBN},
      {"found", Tag::kVBN}, {"held", Tag::kVBN},   {"led", Tag::kVBN},   {"won", Tag::kVBN},
      {"built", Tag::kVBN}, {"wrote", Tag::kVBN},  {"written", Tag::kVBN}, {"ran", Tag::kVBN},
      {"came", Tag::kVBN},  {"went", Tag::kVBN},   {"gone", Tag::kVBN},  {"saw", Tag::kVBN},
      {"seen", Tag::kVBN},  {"knew", Tag::kVBN},   {"known", Tag::kVBN}, {"thought", Tag::kVBN},
      {"told", Tag::kVBN},  {"left", Tag::kVBN},   {"kept", Tag::kVBN},  {"brought", Tag::kVBN},
      {"got", Tag::kVBN},   {"born", Tag::kVBN},   {"grew", Tag::kVBN},  {"grown", Tag::kVBN},
      {"rose", Tag::kVBN},  {"fell", Tag::kVBN},   {"sold", Tag::kVBN},  {"paid", Tag::kVBN},
      {"met", Tag::kVBN},   {"spent", Tag::kVBN},  {"cut", Tag::kVBN},   {"let", Tag::kVB},
      {"said", Tag::kVBN},  {"says", Tag::kVB},    {"say", Tag::kVB},    {"lies", Tag::kVB}};
  return m;
}

const WordSet& Adjectives() {
  static const WordSet s = {
      "hot", "cold", "large", "small", "medium", "high", "low", "big", "little", "new", "old", "good",
      "great", "best", "last", "long", "short", "deep", "shallow", "heavy", "wide", "fresh", "dry",
      "warm", "gentle", "whole", "fine", "thin", "thick", "soft", "hard", "golden", "brown",
      "black", "white", "red", "green", "yellow", "light", "dark", "nonstick", "extra", "virgin",
      "full", "empty", "other", "same", "different", "many", "few", "several", "more", "most",
      "less", "such", "own", "early", "late", "major", "main", "national", "public", "local",
      "important", "available", "possible", "famous", "original", "final", "single", "common",
      "young", "strong", "bright", "simple", "tender", "crisp", "smooth", "firm", "ready", "clean",
      "cast", "first", "second", "third", "next", "previous", "certain", "various", "free", "real",
      "true", "able", "due", "low-heat", "sure", "each"};
  return s;
}

const WordSet& Months() {
  static const WordSet s = {"january", "february", "march", "april", "may", "june", "july",
                            "august", "september", "october", "november", "december",
                            "monday", "tuesday", "wednesday", "thursday", "friday", "saturday",
                            "sunday"};
  return s;
}

const WordSet& TimeUnits() {
  static const WordSet s = {"second", "seconds", "minute", "minutes", "hour", "hours", "min",
                            "mins", "sec", "secs", "hr", "hrs"};
  return s;
}

const WordSet& DateUnits() {
  static const WordSet s = {"day", "days", "week", "weeks", "month", "months", "year", "years",
                            "decade", "decades", "century", "centuries"};
  return s;
}

const WordSet& QuantityUnits() {
  static const WordSet s = {
      "tablespoon", "tablespoons", "teaspoon", "teaspoons", "tbsp", "tsp", "cup", "cups", "ounce",
      "ounces", "oz", "ml", "l", "liter", "liters", "litre", "litres", "g", "gram", "grams", "kg",
      "kilogram", "kilograms", "pound", "pounds", "lb", "lbs", "inch", "inches", "cm", "mm", "m",
      "meter", "meters", "metre", "metres", "km", "kilometers", "mile", "miles", "foot", "feet",
      "degree", "degrees", "f", "c", "quart", "quarts", "pint", "pints", "gallon", "gallons",
      "spoonful", "spoonfuls", "pinch", "pinches", "acre", "acres", "ton", "tons"};
  return s;
}

const WordSet& MoneyUnits() {
  static const WordSet s = {"dollar", "dollars", "cent", "cents", "euro", "euros"};
  return s;
}

const WordSet& OrgKeywords() {
  static const WordSet s = {"university", "college", "company", "inc", "corporation", "corp",
                            "church", "institute", "association", "council", "party", "school",
                            "academy", "society", "club", "committee", "agency", "department",
                            "bank", "group", "league", "union", "foundation", "museum"};
  return s;
}

const WordSet& PlaceKeywords() {
  static const WordSet s = {"river", "mountain", "mountains", "city", "lake", "island", "islands",
                            "county", "street", "ocean", "sea", "valley", "state", "province",
                            "kingdom", "republic", "bay", "park", "hall", "building", "square"};
  return s;
}

const WordSet& Approximators() {
  static const WordSet s = {"about", "around", "roughly", "approximately", "nearly", "almost",
                            "over", "under", "only", "some"};
  return s;
}

std::string Lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool StartsWithDigit(std::string_view s) {
  return !s.empty() && std::isdigit(static_cast<unsigned char>(s.front()));
}

bool StartsUpper(std::string_view s) {
  return !s.empty() && std::isupper(static_cast<unsigned char>(s.front()));
}

// Tag of a lowercase word from its inflection against the verb lexicon.
std::optional<Tag> VerbForm(const std::string& w) {
  const WordSet& verbs = Verbs();
  const auto has = [&](std::string_view stem) { return verbs.contains(stem); };
  if (has(w)) return Tag::kVB;
  if (auto it = IrregularVerbs().find(w); it != IrregularVerbs().end()) return it->second;
  const auto ends = [&](std::string_view suf) {
    return w.size() > suf.size() + 1 && w.ends_with(suf);
  };
  const auto stem = [&](std::size_t cut) { return w.substr(0, w.size() - cut); };
  if (ends("ies") && has(stem(3) + "y")) return Tag::kVB;
  if (ends("es") && has(stem(2))) return Tag::kVB;
  if (ends("s") && has(stem(1))) return Tag::kVB;
  if (ends("ied") && has(stem(3) + "y")) return Tag::kVBN;
  if (ends("ed")) {
    const std::string s = stem(2);
    if (has(s) || has(s + "e")) return Tag::kVBN;
    if (s.size() > 2 && s[s.size() - 1] == s[s.size() - 2] && has(s.substr(0, s.size() - 1))) {
      return Tag::kVBN;
    }
  }
  if (ends("ing")) {
    const std::string s = stem(3);
    if (has(s) || has(s + "e")) return Tag::kVBG;
    if (s.size() > 2 && s[s.size() - 1] == s[s.size() - 2] && has(s.substr(0, s.size() - 1))) {
      return Tag::kVBG;
    }
  }
  return std::nullopt;
}

Tag LexicalTag(const std::string& text) {
  const std::string w = Lower(text);
  if (IsPunctuationToken(text)) return Tag::kPUNCT;
  if (StartsWithDigit(w)) return Tag::kCD;
  if (auto it = ClosedClass().find(w); it != ClosedClass().end()) return it->second;
  // Hyphenated compounds take the class of their last part.
  if (std::size_t dash = w.rfind('-'); dash != std::string::npos && dash + 1 < w.size()) {
    const std::string last = w.substr(dash + 1);
    if (Adjectives().contains(last)) return Tag::kJJ;
    if (auto v = VerbForm(last); v && *v != Tag::kVB) return Tag::kJJ;
    if (StartsWithDigit(last)) return Tag::kCD;
    return StartsUpper(text) ? Tag::kNNP : Tag::kNN;
  }
  if (Adjectives().contains(w)) return Tag::kJJ;
  if (auto v = VerbForm(w)) return *v;
  if (w.size() > 4 && w.ends_with("ly")) return Tag::kRB;
  for (std::string_view suf : {"ous", "ful", "ive", "able", "ible", "ic", "less", "ish", "ical"}) {
    if (w.size() > suf.size() + 2 && w.ends_with(suf)) return Tag::kJJ;
  }
  if (w.size() > 4 && w.ends_with("ed")) return Tag::kVBN;
  if (w.size() > 5 && w.ends_with("ing")) return Tag::kVBG;
  return StartsUpper(text) ? Tag::kNNP : Tag::kNN;
}

struct Unit {
  int first = 0;  // passage token range [first, last)
  int last = 0;
  std::string text;
  std::string lower;
  Tag tag = Tag::kNN;
};

bool IsNominal(Tag t) { return t == Tag::kNN || t == Tag::kNNP || t == Tag::kCD; }
bool IsVerbal(Tag t) {
  return t == Tag::kVB || t == Tag::kVBN || t == Tag::kVBG || t == Tag::kMD || t == Tag::kAUX;
}

// Folds glued joiners into their neighbours: "medium-high", "3.5", "don't".
std::vector<Unit> MakeUnits(const Passage& p) {
  std::vector<Unit> units;
  const int n = p.size();
  const auto glued = [&](int a, int b) { return p.word_offsets[a].end == p.word_offsets[b].start; };
  const auto word = [&](int i) { return !IsPunctuationToken(p.word_tokens[i]); };
  const auto joiner = [&](int i) {
    const std::string& t = p.word_tokens[i];
    return t == "-" || t == "." || t == "'" || t == "/" || t == ":" || t == "," || t == "’";
  };
  int i = 0;
  while (i < n) {
    int j = i + 1;
    if (word(i)) {
      while (j + 1 < n && joiner(j) && word(j + 1) && glued(j - 1, j) && glued(j, j + 1)) {
        const std::string& sep = p.word_tokens[j];
        // Commas and periods only join digits ("1,000", "3.5"); a period joins
        // single letters too ("U.S").
        if (sep == "," || sep == ":") {
          if (!StartsWithDigit(p.word_tokens[j - 1]) || !StartsWithDigit(p.word_tokens[j + 1])) break;
        }
        if (sep == "." && !(StartsWithDigit(p.word_tokens[j - 1]) && StartsWithDigit(p.word_tokens[j + 1])) &&
            !(p.word_tokens[j - 1].size() == 1 && p.word_tokens[j + 1].size() == 1)) {
          break;
        }
        j += 2;
      }
    }
    Unit u;
    u.first = i;
    u.last = j;
    for (int k = i; k < j; ++k) u.text += p.word_tokens[k];
    u.lower = Lower(u.text);
    u.tag = LexicalTag(u.text);
    units.push_back(std::move(u));
    i = j;
  }
  return units;
}

bool EndsSentence(const Unit& u) { return u.text == "." || u.text == "!" || u.text == "?"; }

void ContextualRetag(std::vector<Unit>& s) {
  const int n = static_cast<int>(s.size());
  const auto tag = [&](int i) { return (i >= 0 && i < n) ? s[i].tag : Tag::kPUNCT; };
  if (n > 0) {
    Unit& u = s[0];
    const bool known = ClosedClass().contains(u.lower) || VerbForm(u.lower) ||
                       Adjectives().contains(u.lower);
    if (known) {
      u.tag = LexicalTag(u.lower);
    } else if (u.tag == Tag::kNNP) {
      const Tag next = tag(1);
      if (next == Tag::kDT || next == Tag::kCD || next == Tag::kPRP || next == Tag::kPRPS ||
          next == Tag::kIN || next == Tag::kTO || next == Tag::kRB) {
        u.tag = Tag::kVB;
      }
    }
    if (u.tag == Tag::kRB && tag(1) == Tag::kNNP && VerbForm(s[1].lower)) s[1].tag = Tag::kVB;
  }
  for (int i = 0; i < n; ++i) {
    Unit& u = s[i];
    const Tag prev = tag(i - 1);
    const Tag next = tag(i + 1);
    if (u.lower == "that" && (next == Tag::kNN || next == Tag::kJJ || next == Tag::kNNP)) {
      u.tag = Tag::kDT;
    }
    if ((u.tag == Tag::kVB || u.tag == Tag::kVBG) &&
        (prev == Tag::kDT || prev == Tag::kPRPS || prev == Tag::kJJ || prev == Tag::kCD)) {
      u.tag = Tag::kNN;
    } else if (u.tag == Tag::kVB && prev == Tag::kIN) {
      u.tag = Tag::kNN;
    } else if ((u.tag == Tag::kVBN || u.tag == Tag::kVBG) &&
               (next == Tag::kNN || next == Tag::kNNP || next == Tag::kJJ) &&
               prev != Tag::kAUX && prev != Tag::kMD && prev != Tag::kPRP && i > 0) {
      u.tag = Tag::kJJ;
    }
  }
}

struct Span {
  int begin = 0;  // unit indices [begin, end)
  int end = 0;
};

// (DT|PRP$)? modifiers* nominal+, or a lone pronoun.
std::vector<Span> NounChunks(const std::vector<Unit>& s) {
  std::vector<Span> chunks;
  const int n = static_cast<int>(s.size());
  int i = 0;
  while (i < n) {
    const Tag t = s[i].tag;
    if (t == Tag::kPRP) {
      chunks.push_back({i, i + 1});
      ++i;
      continue;
    }
    int j = i;
    if (t == Tag::kDT || t == Tag::kPRPS) ++j;
    int head_end = -1;
    while (j < n) {
      const Tag tj = s[j].tag;
      if (tj == Tag::kJJ || IsNominal(tj)) {
        if (IsNominal(tj)) head_end = j + 1;
        ++j;
      } else if (tj == Tag::kRB && j + 1 < n && s[j + 1].tag == Tag::kJJ && j > i) {
        ++j;
      } else {
        break;
      }
    }
    if (head_end > 0) {
      chunks.push_back({i, head_end});
      i = head_end;
    } else {
      i = std::max(i + 1, j);
    }
  }
  return chunks;
}

std::string NameType(const std::vector<Unit>& s, Span span) {
  for (int k = span.begin; k < span.end; ++k) {
    if (OrgKeywords().contains(s[k].lower)) return "ORG";
  }
  for (int k = span.begin; k < span.end; ++k) {
    if (PlaceKeywords().contains(s[k].lower)) return "LOC";
  }
  if (span.end - span.begin == 1 && Months().contains(s[span.begin].lower)) return "DATE";
  return span.end - span.begin >= 2 ? "PERSON" : "NAME";
}

bool IsYear(const std::string& w) {
  return w.size() == 4 && std::all_of(w.begin(), w.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }) &&
         (w[0] == '1' || w[0] == '2');
}

struct Entity {
  Span span;
  std::string type;
};

std::vector<Entity> Entities(const std::vector<Unit>& s) {
  std::vector<Entity> out;
  const int n = static_cast<int>(s.size());
  int i = 0;
  while (i < n) {
    const Unit& u = s[i];
    // Dates led by a month name: "March 1", "March 1, 2023".
    if (Months().contains(u.lower) && u.tag == Tag::kNNP) {
      int j = i + 1;
      if (j < n && s[j].tag == Tag::kCD) ++j;
      if (j + 1 < n && s[j].text == "," && IsYear(s[j + 1].text)) j += 2;
      out.push_back({{i, j}, "DATE"});
      i = j;
      continue;
    }
    int start = i;
    int j = i;
    if (Approximators().contains(u.lower) && i + 1 < n && s[i + 1].tag == Tag::kCD) ++j;
    const bool money = s[j].text == "$" && j + 1 < n && s[j + 1].tag == Tag::kCD;
    if (money) ++j;
    if (s[j].tag == Tag::kCD) {
      const Unit& num = s[j];
      ++j;
      // Ranges: "3 to 5", "10 - 12", "2 or 3".
      if (j + 1 < n && (s[j].lower == "to" || s[j].text == "-" || s[j].lower == "or" ||
                        s[j].lower == "and") &&
          s[j + 1].tag == Tag::kCD) {
        j += 2;
      }
      std::string type = money ? "MONEY" : "CARDINAL";
      if (j < n && !money) {
        const std::string& unit = s[j].lower;
        if (TimeUnits().contains(unit)) {
          type = "TIME";
          ++j;
        } else if (DateUnits().contains(unit)) {
          type = "DATE";
          ++j;
        } else if (unit == "percent" || unit == "%") {
          type = "PERCENT";
          ++j;
        } else if (MoneyUnits().contains(unit)) {
          type = "MONEY";
          ++j;
        } else if (QuantityUnits().contains(unit)) {
          type = "QUANTITY";
          ++j;
        } else if (Months().contains(unit)) {
          type = "DATE";
          ++j;
          if (j < n && IsYear(s[j].text)) ++j;
        }
      }
      if (type == "CARDINAL") {
        // "350F", "180C" and friends.
        const std::string& w = num.lower;
        const char last = w.back();
        if ((last == 'f' || last == 'c') && w.size() > 1 &&
            std::isdigit(static_cast<unsigned char>(w[w.size() - 2]))) {
          type = "QUANTITY";
        } else if (IsYear(num.text) && j == start + 1) {
          type = "DATE";
        }
      }
      out.push_back({{start, j}, type});
      i = j;
      continue;
    }
    if (u.tag == Tag::kNNP) {
      int k = i + 1;
      while (k < n) {
        if (s[k].tag == Tag::kNNP) {
          ++k;
        } else if ((s[k].lower == "of" || s[k].lower == "de") && k + 1 < n && s[k + 1].tag == Tag::kNNP) {
          k += 2;
        } else {
          break;
        }
      }
      out.push_back({{i, k}, NameType(s, {i, k})});
      i = k;
      continue;
    }
    ++i;
  }
  return out;
}

struct Node {
  std::string label;
  Span span;
};

int LabelRank(const std::string& label) {
  static const std::vector<std::string> order = {"S", "SBAR", "VP", "NP", "PP", "ADJP"};
  return static_cast<int>(std::find(order.begin(), order.end(), label) - order.begin());
}

bool IsClauseSeparator(const Unit& u) { return u.text == "," || u.text == ";" || u.text == ":"; }

std::vector<Node> Constituents(const std::vector<Unit>& s, const std::vector<Span>& chunks) {
  const int n = static_cast<int>(s.size());
  std::vector<Node> nodes;
  nodes.push_back({"S", {0, n}});

  // Split into clauses at subordinators, and at separators or coordinators
  // when both sides carry a verb.
  const auto has_verb = [&](int a, int b) {
    for (int k = a; k < b; ++k) {
      if (IsVerbal(s[k].tag)) return true;
    }
    return false;
  };
  const auto next_boundary = [&](int from) {
    for (int k = from; k < n; ++k) {
      if (s[k].tag == Tag::kSUB || s[k].tag == Tag::kCC || IsClauseSeparator(s[k]) || EndsSentence(s[k])) {
        return k;
      }
    }
    return n;
  };
  std::vector<int> cuts = {0};
  for (int k = 1; k < n; ++k) {
    const bool sub = s[k].tag == Tag::kSUB;
    const bool sep = s[k].tag == Tag::kCC || IsClauseSeparator(s[k]);
    if (!sub && !sep) continue;
    int after = k + 1;
    while (after < n && (s[after].tag == Tag::kCC || IsClauseSeparator(s[after]))) ++after;
    if (sub && after < n && s[after].tag != Tag::kSUB) {
      if (has_verb(after, next_boundary(after)) && has_verb(cuts.back(), k)) cuts.push_back(k);
    } else if (sep && has_verb(cuts.back(), k) && has_verb(after, next_boundary(after))) {
      cuts.push_back(k);
    }
  }
  cuts.push_back(n);

  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    int a = cuts[c];
    int b = cuts[c + 1];
    while (a < b && (s[a].tag == Tag::kCC || IsClauseSeparator(s[a]))) ++a;
    while (b > a && s[b - 1].tag == Tag::kPUNCT) --b;
    if (a >= b) continue;
    const bool subordinate = s[a].tag == Tag::kSUB;
    if (cuts.size() > 3 || subordinate) {
      if (subordinate) {
        nodes.push_back({"SBAR", {a, b}});
        ++a;
      }
      if (a < b) nodes.push_back({"S", {a, b}});
    }
    // Verb phrases: from each verb group onward, plus the main verb inside an
    // auxiliary chain and every "to"-infinitive.
    bool in_group = false;
    for (int k = a; k < b; ++k) {
      const bool verbal = IsVerbal(s[k].tag);
      if (verbal && !in_group) nodes.push_back({"VP", {k, b}});
      if (verbal && in_group && (s[k - 1].tag == Tag::kMD || s[k - 1].tag == Tag::kAUX)) {
        nodes.push_back({"VP", {k, b}});
      }
      if (s[k].tag == Tag::kTO && k + 1 < b && s[k + 1].tag == Tag::kVB) {
        nodes.push_back({"VP", {k, b}});
      }
      in_group = verbal || (in_group && s[k].tag == Tag::kRB);
    }
  }

  for (std::size_t c = 0; c < chunks.size(); ++c) {
    const Span ch = chunks[c];
    nodes.push_back({"NP", ch});
    // NP of NP.
    if (ch.end + 1 < n && s[ch.end].lower == "of" && c + 1 < chunks.size() &&
        chunks[c + 1].begin == ch.end + 1) {
      nodes.push_back({"NP", {ch.begin, chunks[c + 1].end}});
    }
  }
  for (std::size_t c = 0; c < chunks.size(); ++c) {
    const Span ch = chunks[c];
    const int p = ch.begin - 1;
    if (p >= 0 && (s[p].tag == Tag::kIN || s[p].tag == Tag::kTO)) {
      int end = ch.end;
      if (end + 1 < n && s[end].lower == "of" && c + 1 < chunks.size() && chunks[c + 1].begin == end + 1) {
        end = chunks[c + 1].end;
      }
      nodes.push_back({"PP", {p, end}});
    }
  }
  // Adjective phrases outside noun chunks: "medium-high", "very hot".
  std::vector<bool> in_chunk(static_cast<std::size_t>(n), false);
  for (const Span& ch : chunks) {
    for (int k = ch.begin; k < ch.end; ++k) in_chunk[static_cast<std::size_t>(k)] = true;
  }
  for (int k = 0; k < n;) {
    if (in_chunk[static_cast<std::size_t>(k)] || (s[k].tag != Tag::kJJ && s[k].tag != Tag::kRB)) {
      ++k;
      continue;
    }
    int j = k;
    int last_adj = -1;
    while (j < n && !in_chunk[static_cast<std::size_t>(j)] &&
           (s[j].tag == Tag::kJJ || s[j].tag == Tag::kRB ||
            (s[j].text == "-" && j + 1 < n && s[j + 1].tag == Tag::kJJ))) {
      if (s[j].tag == Tag::kJJ) last_adj = j;
      ++j;
    }
    if (last_adj >= 0) nodes.push_back({"ADJP", {k, last_adj + 1}});
    k = std::max(j, k + 1);
  }
  return nodes;
}

// Orders nodes into a preorder tree by containment, dropping any node that
// crosses an earlier one.
std::vector<std::pair<Node, int>> BuildTree(std::vector<Node> nodes) {
  std::stable_sort(nodes.begin(), nodes.end(), [](const Node& x, const Node& y) {
    if (x.span.begin != y.span.begin) return x.span.begin < y.span.begin;
    if (x.span.end != y.span.end) return x.span.end > y.span.end;
    return LabelRank(x.label) < LabelRank(y.label);
  });
  std::vector<std::pair<Node, int>> out;
  std::vector<int> stack;
  for (const Node& node : nodes) {
    if (!out.empty()) {
      const Node& prev = out.back().first;
      if (prev.label == node.label && prev.span.begin == node.span.begin && prev.span.end == node.span.end) {
        continue;
      }
    }
    bool crosses = false;
    while (!stack.empty()) {
      const Span top = out[static_cast<std::size_t>(stack.back())].first.span;
      if (top.begin <= node.span.begin && node.span.end <= top.end) break;
      if (node.span.begin < top.end) crosses = true;
      stack.pop_back();
    }
    if (crosses || (stack.empty() && !out.empty())) continue;
    out.push_back({node, stack.empty() ? -1 : stack.back()});
    stack.push_back(static_cast<int>(out.size()) - 1);
  }
  return out;
}

}  // namespace

SyntacticAnalysis FallbackAnalyzer::Analyze(const Passage& passage) const {
  SyntacticAnalysis analysis;
  analysis.passage_id = passage.id;
  analysis.capabilities = capabilities();
  const std::vector<Unit> units = MakeUnits(passage);
  std::size_t begin = 0;
  while (begin < units.size()) {
    std::size_t end = begin;
    while (end < units.size() && !EndsSentence(units[end])) ++end;
    if (end < units.size()) ++end;
    // Trailing closing quotes and brackets belong to the sentence just ended.
    while (end < units.size() && (units[end].text == "\"" || units[end].text == ")" ||
                                  units[end].text == "'" || units[end].text == "”")) {
      ++end;
    }
    std::vector<Unit> s(units.begin() + static_cast<std::ptrdiff_t>(begin),
                        units.begin() + static_cast<std::ptrdiff_t>(end));
    ContextualRetag(s);
    const auto range = [&](Span sp) {
      return CharRange{passage.word_offsets[s[sp.begin].first].start,
                       passage.word_offsets[s[sp.end - 1].last - 1].end};
    };
    SentenceAnalysis out;
    out.range = range({0, static_cast<int>(s.size())});
    const std::vector<Span> chunks = NounChunks(s);
    for (const Span& c : chunks) out.chunks.push_back(range(c));
    for (const Entity& e : Entities(s)) out.entities.push_back({range(e.span), e.type});
    for (const auto& [node, parent] : BuildTree(Constituents(s, chunks))) {
      out.tree.push_back({node.label, range(node.span), parent});
    }
    analysis.sentences.push_back(std::move(out));
    begin = end;
  }
  return analysis;
}

}  // namespace dmr
