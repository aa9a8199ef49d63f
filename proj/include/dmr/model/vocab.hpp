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

#ifndef DMR_MODEL_VOCAB_HPP_
#define DMR_MODEL_VOCAB_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dmr/corpus.hpp"
#include "json.hpp"

namespace dmr {

struct EncoderConfig {
  int vocab_size = 0;
  int num_layers = 2;
  int hidden_size = 64;
  int num_heads = 4;
  int ff_size = 128;
  int max_input_length = 512;
  std::optional<std::string> pretrained_source;

  // Throws kConfig when the invariants do not hold.
  void Validate() const;

  nlohmann::json ToJson() const;
  static EncoderConfig FromJson(const nlohmann::json& j);

  // Desk-scale default: 2 layers, hidden 64, 4 heads.
  static EncoderConfig Tiny(int vocab_size);
  // 12 layers, hidden 768, 12 heads; meaningful only with pretrained weights.
  static EncoderConfig FullScale(int vocab_size);
};

// Word-piece style vocabulary built from a corpus: frequent whole words plus
// single-character pieces as a fallback. Continuation pieces carry a "##"
// prefix.
class SubwordVocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kCls = 2;
  static constexpr int kSep = 3;
  static constexpr int kMask = 4;
  static constexpr int kNumSpecial = 5;

  SubwordVocab();
  explicit SubwordVocab(std::vector<std::string> tokens);

  static SubwordVocab Build(std::span<const Passage> passages, int min_count = 2,
                            int max_words = 8000);

  int size() const { return static_cast<int>(tokens_.size()); }
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::optional<int> Find(std::string_view piece) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

  static bool IsSpecial(int id) { return id >= 0 && id < kNumSpecial; }

  // Greedy longest-match segmentation; an unsegmentable word becomes [UNK].
  std::vector<int> EncodeWord(std::string_view word) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

struct SubwordEncoding {
  std::string passage_id;
  std::vector<int> ids;
  // Word index per position; -1 for [CLS]/[SEP].
  std::vector<int> subword_to_word;
  // No padding is used, so every position is attendable.
  std::vector<std::uint8_t> valid;
  int word_count = 0;
  // Words that did not fit entirely are dropped.
  bool truncated = false;
  int unknown_count = 0;

  int size() const { return static_cast<int>(ids.size()); }
  bool is_special(int i) const { return subword_to_word[static_cast<std::size_t>(i)] < 0; }
  // Number of non-special positions.
  int content_size() const;
};

// [CLS] pieces... [SEP], truncated to max_input_length positions.
SubwordEncoding EncodeSubwords(const Passage& passage, const SubwordVocab& vocab,
                               int max_input_length);

}  // namespace dmr

#endif  // DMR_MODEL_VOCAB_HPP_
