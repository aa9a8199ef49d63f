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

#include "dmr/synth.hpp"

#include <cstdio>
#include <random>
#include <sstream>

#include "dmr/random.hpp"

namespace dmr {

std::vector<std::string> Template::slot_names() const {
  std::vector<std::string> names;
  for (const TemplatePart& p : parts) {
    if (p.is_slot) names.push_back(p.text);
  }
  return names;
}

Template ParseTemplate(std::string id, std::string_view text) {
  Template t{std::move(id), {}};
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t open = text.find('{', pos);
    if (open == std::string_view::npos) {
      t.parts.push_back({false, std::string(text.substr(pos))});
      break;
    }
    const std::size_t close = text.find('}', open);
    if (close == std::string_view::npos) {
      throw Error(ErrorCategory::kData, "template " + t.id + ": unclosed slot");
    }
    if (open > pos) t.parts.push_back({false, std::string(text.substr(pos, open - pos))});
    const std::string name(text.substr(open + 1, close - open - 1));
    if (name.empty()) throw Error(ErrorCategory::kData, "template " + t.id + ": empty slot");
    if (!t.parts.empty() && t.parts.back().is_slot) {
      throw Error(ErrorCategory::kData,
                  "template " + t.id + ": adjacent slots need a literal between them");
    }
    t.parts.push_back({true, name});
    pos = close + 1;
  }
  if (t.slot_names().empty()) {
    throw Error(ErrorCategory::kData, "template " + t.id + " has no slot");
  }
  return t;
}

void ValidateCatalog(const std::vector<Template>& templates,
                     const FillerCatalog& fillers, std::size_t min_fillers) {
  for (const Template& t : templates) {
    for (const std::string& slot : t.slot_names()) {
      auto it = fillers.slots.find(slot);
      if (it == fillers.slots.end() || it->second.empty()) {
        throw Error(ErrorCategory::kData,
                    "slot " + slot + " (template " + t.id + ") missing from catalog");
      }
      if (it->second.size() < min_fillers) {
        throw Error(ErrorCategory::kData, "slot " + slot + " has fewer than " +
                                              std::to_string(min_fillers) + " fillers");
      }
    }
  }
}

namespace {

std::string_view Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

TemplateCatalog ParseCatalog(std::string_view text) {
  TemplateCatalog catalog;
  std::string pending_template;
  std::string current_slot;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = Trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) {
      throw Error(ErrorCategory::kParse,
                  "catalog line " + std::to_string(line_no) + ": expected key: value");
    }
    const std::string_view key = Trim(line.substr(0, colon));
    const std::string_view value = Trim(line.substr(colon + 1));
    if (key == "template") {
      pending_template = std::string(value);
      current_slot.clear();
    } else if (key == "text") {
      if (pending_template.empty()) {
        throw Error(ErrorCategory::kParse,
                    "catalog line " + std::to_string(line_no) + ": text outside a template");
      }
      catalog.templates.push_back(ParseTemplate(pending_template, value));
      pending_template.clear();
    } else if (key == "slot") {
      current_slot = std::string(value);
      catalog.fillers.slots[current_slot];
    } else if (key == "base" || key == "added") {
      if (current_slot.empty()) {
        throw Error(ErrorCategory::kParse,
                    "catalog line " + std::to_string(line_no) + ": filler outside a slot");
      }
      catalog.fillers.slots[current_slot].push_back({std::string(value), key == "added"});
    } else {
      throw Error(ErrorCategory::kParse, "catalog line " + std::to_string(line_no) +
                                             ": unknown key '" + std::string(key) + "'");
    }
  }
  if (!pending_template.empty()) {
    throw Error(ErrorCategory::kParse, "template " + pending_template + " has no text");
  }
  ValidateCatalog(catalog.templates, catalog.fillers);
  return catalog;
}

TemplateCatalog LoadCatalog(const std::filesystem::path& path) {
  return ParseCatalog(ReadFile(path));
}

std::string FormatCatalog(const TemplateCatalog& catalog) {
  std::string out;
  for (const Template& t : catalog.templates) {
    out += "template: " + t.id + "\ntext: ";
    for (const TemplatePart& p : t.parts) out += p.is_slot ? "{" + p.text + "}" : p.text;
    out += "\n\n";
  }
  for (const auto& [slot, fillers] : catalog.fillers.slots) {
    out += "slot: " + slot + "\n";
    for (const Filler& f : fillers) out += (f.added ? "added: " : "base: ") + f.text + "\n";
    out += "\n";
  }
  return out;
}

TemplateCatalog DefaultCookingTemplates() { return ParseCatalog(DefaultCookingCatalogText()); }

AnnotatedPassage Render(const Template& tmpl, const FillerCatalog& fillers,
                        const std::vector<std::size_t>& choices, std::string id) {
  std::string text;
  int length = 0;  // code points so far
  std::vector<AnswerSpan> spans;
  std::size_t slot_index = 0;
  for (const TemplatePart& p : tmpl.parts) {
    if (!p.is_slot) {
      text += p.text;
      length += static_cast<int>(utf8::Length(p.text));
      continue;
    }
    const auto it = fillers.slots.find(p.text);
    if (it == fillers.slots.end() || it->second.empty()) {
      throw Error(ErrorCategory::kData, "slot " + p.text + " missing from catalog");
    }
    const Filler& f = it->second.at(choices.at(slot_index++));
    const int n = static_cast<int>(utf8::Length(f.text));
    spans.push_back({{length, length + n}, f.text});
    text += f.text;
    length += n;
  }
  return {MakePassage(std::move(id), std::move(text)), std::move(spans)};
}

std::vector<AnnotatedPassage> Generate(const std::vector<Template>& templates,
                                       const FillerCatalog& fillers, int n,
                                       std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCategory::kUsage, "generate needs n >= 1");
  if (templates.empty()) throw Error(ErrorCategory::kData, "no templates");
  ValidateCatalog(templates, fillers, 1);
  Rng rng(DeriveSeed(seed, "synth"));
  std::vector<AnnotatedPassage> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Template& t = templates[rng.Below(templates.size())];
    std::vector<std::size_t> choices;
    for (const std::string& slot : t.slot_names()) {
      choices.push_back(rng.Below(fillers.slots.at(slot).size()));
    }
    char id[32];
    std::snprintf(id, sizeof(id), "synth-%06d", i);
    out.push_back(Render(t, fillers, choices, id));
  }
  return out;
}

}  // namespace dmr
