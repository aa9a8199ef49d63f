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

#include "dmr/model/vocab.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace dmr {

using json = nlohmann::json;

void EncoderConfig::Validate() const {
  if (vocab_size <= SubwordVocab::kNumSpecial) {
    throw Error(ErrorCategory::kConfig, "vocab_size too small");
  }
  if (num_layers < 1 || hidden_size < 1 || num_heads < 1 || ff_size < 1) {
    throw Error(ErrorCategory::kConfig, "encoder dimensions must be positive");
  }
  if (hidden_size % num_heads != 0) {
    throw Error(ErrorCategory::kConfig, "hidden_size must be divisible by num_heads");
  }
  if (max_input_length < 8) {
    throw Error(ErrorCategory::kConfig, "max_input_length must be at least 8");
  }
}

json EncoderConfig::ToJson() const {
  json j{{"vocab_size", vocab_size},   {"num_layers", num_layers},
         {"hidden_size", hidden_size}, {"num_heads", num_heads},
         {"ff_size", ff_size},         {"max_input_length", max_input_length}};
  j["pretrained_source"] = pretrained_source ? json(*pretrained_source) : json(nullptr);
  return j;
}

EncoderConfig EncoderConfig::FromJson(const json& j) {
  EncoderConfig c;
  c.vocab_size = j.at("vocab_size").get<int>();
  c.num_layers = j.at("num_layers").get<int>();
  c.hidden_size = j.at("hidden_size").get<int>();
  c.num_heads = j.at("num_heads").get<int>();
  c.ff_size = j.at("ff_size").get<int>();
  c.max_input_length = j.at("max_input_length").get<int>();
  if (j.contains("pretrained_source") && !j["pretrained_source"].is_null()) {
    c.pretrained_source = j["pretrained_source"].get<std::string>();
  }
  return c;
}

EncoderConfig EncoderConfig::Tiny(int vocab_size) {
  EncoderConfig c;
  c.vocab_size = vocab_size;
  return c;
}

EncoderConfig EncoderConfig::FullScale(int vocab_size) {
  EncoderConfig c;
  c.vocab_size = vocab_size;
  c.num_layers = 12;
  c.hidden_size = 768;
  c.num_heads = 12;
  c.ff_size = 3072;
  c.max_input_length = 512;
  return c;
}

SubwordVocab::SubwordVocab()
    : SubwordVocab(std::vector<std::string>{"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"}) {}

SubwordVocab::SubwordVocab(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  if (tokens_.size() < kNumSpecial || tokens_[kMask] != "[MASK]") {
    throw Error(ErrorCategory::kModel, "vocabulary lacks the special tokens");
  }
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<int>(i)).second) {
      throw Error(ErrorCategory::kModel, "duplicate vocabulary entry: " + tokens_[i]);
    }
  }
}

SubwordVocab SubwordVocab::Build(std::span<const Passage> passages, int min_count,
                                 int max_words) {
  std::map<std::string, int> counts;
  std::set<std::string> chars;
  for (const Passage& p : passages) {
    for (const std::string& w : p.word_tokens) {
      ++counts[w];
      for (char32_t cp : utf8::Decode(w)) chars.insert(utf8::Encode(cp));
    }
  }
  std::vector<std::pair<std::string, int>> frequent;
  for (const auto& [w, c] : counts) {
    if (c >= min_count) frequent.emplace_back(w, c);
  }
  std::stable_sort(frequent.begin(), frequent.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (static_cast<int>(frequent.size()) > max_words) frequent.resize(static_cast<std::size_t>(max_words));

  std::vector<std::string> tokens = SubwordVocab().tokens();
  std::set<std::string> seen(tokens.begin(), tokens.end());
  auto add = [&](const std::string& t) {
    if (seen.insert(t).second) tokens.push_back(t);
  };
  for (const auto& [w, c] : frequent) add(w);
  for (const std::string& ch : chars) add(ch);
  for (const std::string& ch : chars) add("##" + ch);
  return SubwordVocab(std::move(tokens));
}

std::optional<int> SubwordVocab::Find(std::string_view piece) const {
  auto it = index_.find(std::string(piece));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<int> SubwordVocab::EncodeWord(std::string_view word) const {
  if (auto id = Find(word)) return {*id};
  const std::vector<std::size_t> offsets = utf8::CodePointOffsets(word);
  const std::size_t n = offsets.size() - 1;
  std::vector<int> out;
  std::size_t start = 0;
  while (start < n) {
    std::optional<int> match;
    std::size_t end = n;
    for (; end > start; --end) {
      std::string piece(word.substr(offsets[start], offsets[end] - offsets[start]));
      if (start > 0) piece = "##" + piece;
      if ((match = Find(piece))) break;
    }
    if (!match) return {kUnk};
    out.push_back(*match);
    start = end;
  }
  return out;
}

int SubwordEncoding::content_size() const {
  int n = 0;
  for (int w : subword_to_word) n += w >= 0 ? 1 : 0;
  return n;
}

SubwordEncoding EncodeSubwords(const Passage& passage, const SubwordVocab& vocab,
                               int max_input_length) {
  if (passage.word_tokens.empty()) {
    throw Error(ErrorCategory::kData, "passage " + passage.id + " has no tokens");
  }
  if (max_input_length < 3) throw Error(ErrorCategory::kConfig, "max_input_length too small");
  SubwordEncoding enc;
  enc.passage_id = passage.id;
  enc.word_count = passage.size();
  enc.ids.push_back(SubwordVocab::kCls);
  enc.subword_to_word.push_back(-1);
  const std::size_t budget = static_cast<std::size_t>(max_input_length - 1);
  for (int w = 0; w < passage.size(); ++w) {
    const std::vector<int> pieces = vocab.EncodeWord(passage.word_tokens[static_cast<std::size_t>(w)]);
    if (enc.ids.size() + pieces.size() > budget) {
      enc.truncated = true;
      break;
    }
    for (int id : pieces) {
      if (id == SubwordVocab::kUnk) ++enc.unknown_count;
      enc.ids.push_back(id);
      enc.subword_to_word.push_back(w);
    }
  }
  enc.ids.push_back(SubwordVocab::kSep);
  enc.subword_to_word.push_back(-1);
  enc.valid.assign(enc.ids.size(), 1);
  return enc;
}

}  // namespace dmr
