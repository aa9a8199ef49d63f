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


#include "dmr/baselines/llm.hpp"

#include <algorithm>
#include <cstdlib>
#include <regex>
#include <thread>

#include "httplib.h"

namespace dmr {

const char* const kCandidatePrompt =
    "Extracting qualified candidate answers from context passages is a critical step for most "
    "question generation systems. Please extract an exhaustive list of candidate answers "
    "(substrings from the following context passage): ";

std::string BuildPrompt(std::string_view passage_text) {
  return std::string(kCandidatePrompt) + std::string(passage_text);
}

LlmClientConfig LlmClientConfig::FromJson(const nlohmann::json& j) {
  LlmClientConfig c;
  c.base_url = j.value("base_url", c.base_url);
  c.endpoint = j.value("endpoint", c.endpoint);
  c.model = j.value("model", c.model);
  c.api_key_env = j.value("api_key_env", c.api_key_env);
  c.temperature = j.value("temperature", c.temperature);
  c.min_interval_seconds = j.value("min_interval_seconds", c.min_interval_seconds);
  c.max_retries = j.value("max_retries", c.max_retries);
  c.backoff_seconds = j.value("backoff_seconds", c.backoff_seconds);
  c.timeout_seconds = j.value("timeout_seconds", c.timeout_seconds);
  c.cache_dir = j.value("cache_dir", c.cache_dir.string());
  return c;
}

nlohmann::json LlmClientConfig::ToJson() const {
  return {{"base_url", base_url},
          {"endpoint", endpoint},
          {"model", model},
          {"api_key_env", api_key_env},
          {"temperature", temperature},
          {"min_interval_seconds", min_interval_seconds},
          {"max_retries", max_retries},
          {"backoff_seconds", backoff_seconds},
          {"timeout_seconds", timeout_seconds},
          {"cache_dir", cache_dir.string()}};
}

namespace {

std::string Trim(std::string_view s) {
  const std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const std::size_t e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string StripQuotes(std::string s) {
  static const std::vector<std::pair<std::string, std::string>> kPairs = {
      {"\"", "\""}, {"'", "'"}, {"\xE2\x80\x9C", "\xE2\x80\x9D"}, {"`", "`"}};
  for (const auto& [open, close] : kPairs) {
    if (s.size() >= open.size() + close.size() && s.starts_with(open) && s.ends_with(close)) {
      return Trim(s.substr(open.size(), s.size() - open.size() - close.size()));
    }
  }
  return s;
}

}  // namespace

std::vector<std::string> ParseListItems(std::string_view response) {
  static const std::regex kMarker(R"(^(?:\d+\s*[.):]|[-*+]|\xE2\x80\xA2)\s*)");
  std::vector<std::string> items;
  std::size_t pos = 0;
  while (pos <= response.size()) {
    std::size_t nl = response.find('\n', pos);
    if (nl == std::string_view::npos) nl = response.size();
    std::string line = Trim(response.substr(pos, nl - pos));
    pos = nl + 1;
    line = std::regex_replace(line, kMarker, "", std::regex_constants::format_first_only);
    line = StripQuotes(Trim(line));
    if (!line.empty()) items.push_back(std::move(line));
  }
  return items;
}

LocatedItems LocateItems(const Passage& passage, const std::vector<std::string>& items) {
  LocatedItems out;
  const std::vector<std::size_t> bytes = utf8::CodePointOffsets(passage.text);
  for (const std::string& item : items) {
    const std::size_t at = passage.text.find(item);
    if (item.empty() || at == std::string::npos) {
      ++out.dropped;
      continue;
    }
    const auto start = std::lower_bound(bytes.begin(), bytes.end(), at) - bytes.begin();
    const auto end = std::lower_bound(bytes.begin(), bytes.end(), at + item.size()) - bytes.begin();
    CandidateSpan span;
    span.range = {static_cast<int>(start), static_cast<int>(end)};
    span.text = item;
    span.score = 1.0;
    span.sources = {"llm"};
    out.spans.push_back(std::move(span));
  }
  return out;
}

LlmClient::LlmClient(LlmClientConfig config) : config_(std::move(config)) {
  if (config_.temperature != 0.0) {
    throw Error(ErrorCategory::kConfig, "the prompt baseline runs at temperature 0");
  }
}

LlmClient::~LlmClient() = default;

std::string LlmClient::CacheKey(const Passage& passage) const {
  return Sha256Hex(Sha256Hex(passage.text) + '\x1f' + kCandidatePrompt + '\x1f' + config_.model);
}

std::string LlmClient::Complete(const std::string& prompt) {
  const char* key = std::getenv(config_.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw Error(ErrorCategory::kConfig, "environment variable " + config_.api_key_env + " is not set");
  }
  const nlohmann::json body = {
      {"model", config_.model},
      {"temperature", config_.temperature},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})}};
  const httplib::Headers headers = {{"Authorization", std::string("Bearer ") + key}};

  httplib::Client client(config_.base_url);
  const auto timeout = std::chrono::duration<double>(config_.timeout_seconds);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));

  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(
          std::chrono::duration<double>(config_.backoff_seconds * std::pow(2.0, attempt - 1)));
    }
    if (has_requested_) {
      std::this_thread::sleep_until(
          last_request_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                              std::chrono::duration<double>(config_.min_interval_seconds)));
    }
    last_request_ = std::chrono::steady_clock::now();
    has_requested_ = true;
    auto res = client.Post(config_.endpoint, headers, body.dump(), "application/json");
    if (!res) {
      last_error = "request failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw Error(ErrorCategory::kTransport,
                  "HTTP " + std::to_string(res->status) + " from " + config_.base_url);
    }
    try {
      return nlohmann::json::parse(res->body).at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCategory::kTransport, std::string("malformed completion: ") + e.what());
    }
  }
  throw Error(ErrorCategory::kTransport, last_error + " (after " +
                                             std::to_string(config_.max_retries + 1) + " attempts)");
}

LlmExtraction LlmClient::Extract(const Passage& passage) {
  LlmExtraction out;
  out.cache_key = CacheKey(passage);
  std::string response;
  const std::filesystem::path cached =
      config_.cache_dir.empty() ? std::filesystem::path() : config_.cache_dir / (out.cache_key + ".json");
  if (!cached.empty() && std::filesystem::exists(cached)) {
    response = nlohmann::json::parse(ReadFile(cached)).at("response").get<std::string>();
    out.cache_hit = true;
  } else {
    response = Complete(BuildPrompt(passage.text));
    if (!cached.empty()) {
      const nlohmann::json record = {{"key", out.cache_key}, {"model", config_.model}, {"response", response}};
      WriteFileAtomic(cached, record.dump());
    }
  }
  const std::vector<std::string> items = ParseListItems(response);
  LocatedItems located = LocateItems(passage, items);
  out.items = static_cast<int>(items.size());
  out.dropped = located.dropped;
  if (located.spans.empty()) out.warnings.push_back("no locatable items for passage " + passage.id);
  out.result.passage_id = passage.id;
  out.result.spans = MergeSpans(passage, std::move(located.spans));
  return out;
}

}  // namespace dmr
