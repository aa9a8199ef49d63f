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


#ifndef DMR_BASELINES_LLM_HPP_
#define DMR_BASELINES_LLM_HPP_

#include <chrono>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "dmr/corpus.hpp"
#include "dmr/extraction.hpp"
#include "json.hpp"

namespace dmr {

// Instruction sent ahead of every passage. Must not change between runs.
extern const char* const kCandidatePrompt;

std::string BuildPrompt(std::string_view passage_text);

struct LlmClientConfig {
  std::string base_url = "https://api.openai.com";
  std::string endpoint = "/v1/chat/completions";
  std::string model = "gpt-3.5-turbo-0301";
  std::string api_key_env = "OPENAI_API_KEY";
  double temperature = 0.0;
  double min_interval_seconds = 1.0;
  int max_retries = 3;
  double backoff_seconds = 2.0;
  double timeout_seconds = 60.0;
  // Empty disables the response cache.
  std::filesystem::path cache_dir;

  static LlmClientConfig FromJson(const nlohmann::json& j);
  nlohmann::json ToJson() const;
};

// Strips list markers ("1.", "2)", "-", "*") and surrounding quotes; blank
// lines are skipped.
std::vector<std::string> ParseListItems(std::string_view response);

struct LocatedItems {
  std::vector<CandidateSpan> spans;
  int dropped = 0;
};

// Leftmost exact match of each item in the passage. Items that do not occur
// verbatim are counted in `dropped`.
LocatedItems LocateItems(const Passage& passage, const std::vector<std::string>& items);

struct LlmExtraction {
  ExtractionResult result;
  int items = 0;
  int dropped = 0;
  std::string cache_key;
  bool cache_hit = false;
  std::vector<std::string> warnings;
};

// Chat-completion client. Calls are serialized with a minimum interval,
// retried with exponential backoff on transport errors and 429/5xx, and
// cached on disk by (passage hash, prompt, model).
class LlmClient {
 public:
  explicit LlmClient(LlmClientConfig config);
  ~LlmClient();

  const LlmClientConfig& config() const { return config_; }
  std::string CacheKey(const Passage& passage) const;
  LlmExtraction Extract(const Passage& passage);

 private:
  std::string Complete(const std::string& prompt);

  LlmClientConfig config_;
  std::chrono::steady_clock::time_point last_request_{};
  bool has_requested_ = false;
};

}  // namespace dmr

#endif  // DMR_BASELINES_LLM_HPP_
