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

#ifndef DMR_TESTS_TEST_UTIL_HPP_
#define DMR_TESTS_TEST_UTIL_HPP_

#include <filesystem>
#include <string>

#include <unistd.h>

#include "dmr/model/vocab.hpp"

namespace dmr::testing {

// [CLS] w0 w1 w2 w3 [SEP] over an 8-token vocabulary.
inline SubwordEncoding ToyEncoding() {
  SubwordEncoding enc;
  enc.passage_id = "toy";
  enc.ids = {SubwordVocab::kCls, 5, 6, 7, 5, SubwordVocab::kSep};
  enc.subword_to_word = {-1, 0, 1, 2, 3, -1};
  enc.valid.assign(enc.ids.size(), 1);
  enc.word_count = 4;
  return enc;
}

inline EncoderConfig ToyConfig(int layers = 1) {
  EncoderConfig c;
  c.vocab_size = 8;
  c.num_layers = layers;
  c.hidden_size = 8;
  c.num_heads = 2;
  c.ff_size = 16;
  c.max_input_length = 8;
  return c;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("dmr-test-" + tag + "-" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace dmr::testing

#endif  // DMR_TESTS_TEST_UTIL_HPP_
