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

#ifndef DMR_SYNTH_HPP_
#define DMR_SYNTH_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dmr/corpus.hpp"

namespace dmr {

// A piece of a template: literal backbone text or a slot reference.
struct TemplatePart {
  bool is_slot = false;
  std::string text;  // literal text, or the slot name
};

struct Template {
  std::string id;
  std::vector<TemplatePart> parts;

  std::vector<std::string> slot_names() const;
};

struct Filler {
  std::string text;
  bool added = false;  // true for fillers beyond the transcribed base set
};

struct FillerCatalog {
  std::map<std::string, std::vector<Filler>> slots;
};

struct TemplateCatalog {
  std::vector<Template> templates;
  FillerCatalog fillers;
};

// Parses "Add {AMOUNT} of olive oil" into parts. Throws kData when the
// template has no slot or two slots are adjacent.
Template ParseTemplate(std::string id, std::string_view text);

// Checks that every referenced slot has at least `min_fillers` entries.
void ValidateCatalog(const std::vector<Template>& templates,
                     const FillerCatalog& fillers, std::size_t min_fillers = 2);

TemplateCatalog ParseCatalog(std::string_view text);
TemplateCatalog LoadCatalog(const std::filesystem::path& path);
std::string FormatCatalog(const TemplateCatalog& catalog);

// Built-in cooking catalog (data/cooking_catalog.txt, embedded at build time).
TemplateCatalog DefaultCookingTemplates();
std::string_view DefaultCookingCatalogText();

// Samples n passages. Templates are drawn uniformly; each slot occurrence
// draws its filler independently. Gold spans are the filler ranges.
std::vector<AnnotatedPassage> Generate(const std::vector<Template>& templates,
                                       const FillerCatalog& fillers, int n,
                                       std::uint64_t seed);

// Renders one passage with fixed filler choices (index per slot occurrence).
AnnotatedPassage Render(const Template& tmpl, const FillerCatalog& fillers,
                        const std::vector<std::size_t>& choices, std::string id);

}  // namespace dmr

#endif  // DMR_SYNTH_HPP_
