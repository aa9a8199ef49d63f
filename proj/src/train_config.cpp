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

#include "dmr/training/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "dmr/training/losses.hpp"

namespace dmr {

namespace {

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\"");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\"");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void BadValue(std::string_view key, std::string_view value) {
  throw Error(ErrorCategory::kConfig,
              "bad value '" + std::string(value) + "' for " + std::string(key));
}

double ParseDouble(std::string_view key, std::string_view value) {
  try {
    std::size_t used = 0;
    const std::string s(value);
    const double v = std::stod(s, &used);
    if (used != s.size()) BadValue(key, value);
    return v;
  } catch (const std::logic_error&) {
    BadValue(key, value);
  }
}

std::int64_t ParseInt(std::string_view key, std::string_view value) {
  std::int64_t v = 0;
  const auto* end = value.data() + value.size();
  const auto res = std::from_chars(value.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) BadValue(key, value);
  return v;
}

std::string FormatDouble(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

void TrainConfig::Validate() const {
  if (!(learning_rate > 0)) throw Error(ErrorCategory::kConfig, "learning_rate must be > 0");
  if (effective_batch_size < 1) throw Error(ErrorCategory::kConfig, "effective_batch_size must be >= 1");
  if (epochs < 1) throw Error(ErrorCategory::kConfig, "epochs must be >= 1");
  if (!(lambda_start >= 0 && lambda_start <= lambda_end)) {
    throw Error(ErrorCategory::kConfig, "need 0 <= lambda_start <= lambda_end");
  }
  if (!(temperature > 0 && temperature_end > 0)) {
    throw Error(ErrorCategory::kConfig, "temperature must be > 0");
  }
  if (max_input_length < 8) throw Error(ErrorCategory::kConfig, "max_input_length must be >= 8");
  if (!(warmup_min_mask_rate >= 0 && warmup_min_mask_rate <= warmup_max_mask_rate &&
        warmup_max_mask_rate <= 1)) {
    throw Error(ErrorCategory::kConfig, "warmup mask rates must satisfy 0 <= min <= max <= 1");
  }
}

void TrainConfig::Set(std::string_view key, std::string_view raw) {
  const std::string value = Trim(raw);
  using Setter = std::function<void(const std::string&)>;
  const std::map<std::string_view, Setter> setters = {
      {"learning_rate", [&](const std::string& v) { learning_rate = ParseDouble(key, v); }},
      {"effective_batch_size", [&](const std::string& v) { effective_batch_size = static_cast<int>(ParseInt(key, v)); }},
      {"weight_decay", [&](const std::string& v) { weight_decay = ParseDouble(key, v); }},
      {"adam_beta1", [&](const std::string& v) { adam_beta1 = ParseDouble(key, v); }},
      {"adam_beta2", [&](const std::string& v) { adam_beta2 = ParseDouble(key, v); }},
      {"adam_epsilon", [&](const std::string& v) { adam_epsilon = ParseDouble(key, v); }},
      {"warmup_ratio", [&](const std::string& v) { warmup_ratio = ParseDouble(key, v); }},
      {"max_grad_norm", [&](const std::string& v) { max_grad_norm = ParseDouble(key, v); }},
      {"max_input_length", [&](const std::string& v) { max_input_length = static_cast<int>(ParseInt(key, v)); }},
      {"epochs", [&](const std::string& v) { epochs = static_cast<int>(ParseInt(key, v)); }},
      {"convergence_tolerance", [&](const std::string& v) { convergence_tolerance = ParseDouble(key, v); }},
      {"convergence_patience", [&](const std::string& v) { convergence_patience = static_cast<int>(ParseInt(key, v)); }},
      {"lambda_start", [&](const std::string& v) { lambda_start = ParseDouble(key, v); }},
      {"lambda_end", [&](const std::string& v) { lambda_end = ParseDouble(key, v); }},
      {"temperature", [&](const std::string& v) { temperature = ParseDouble(key, v); }},
      {"temperature_end", [&](const std::string& v) { temperature_end = ParseDouble(key, v); }},
      {"gate_mode", [&](const std::string& v) {
         if (v == "straight_through") gate_mode = GateMode::kStraightThrough;
         else if (v == "soft") gate_mode = GateMode::kSoft;
         else BadValue(key, v);
       }},
      {"schedule", [&](const std::string& v) {
         if (v == "joint") schedule = UpdateSchedule::kJoint;
         else if (v == "alternating") schedule = UpdateSchedule::kAlternating;
         else BadValue(key, v);
       }},
      {"reconstructor_warmup_epochs", [&](const std::string& v) { reconstructor_warmup_epochs = static_cast<int>(ParseInt(key, v)); }},
      {"warmup_min_mask_rate", [&](const std::string& v) { warmup_min_mask_rate = ParseDouble(key, v); }},
      {"warmup_max_mask_rate", [&](const std::string& v) { warmup_max_mask_rate = ParseDouble(key, v); }},
      {"masker_init_keep_bias", [&](const std::string& v) { masker_init_keep_bias = ParseDouble(key, v); }},
      {"seed", [&](const std::string& v) { seed = static_cast<std::uint64_t>(ParseInt(key, v)); }},
      {"num_layers", [&](const std::string& v) { num_layers = static_cast<int>(ParseInt(key, v)); }},
      {"hidden_size", [&](const std::string& v) { hidden_size = static_cast<int>(ParseInt(key, v)); }},
      {"num_heads", [&](const std::string& v) { num_heads = static_cast<int>(ParseInt(key, v)); }},
      {"ff_size", [&](const std::string& v) { ff_size = static_cast<int>(ParseInt(key, v)); }},
      {"vocab_min_count", [&](const std::string& v) { vocab_min_count = static_cast<int>(ParseInt(key, v)); }},
      {"vocab_max_words", [&](const std::string& v) { vocab_max_words = static_cast<int>(ParseInt(key, v)); }},
  };
  const auto it = setters.find(key);
  if (it == setters.end()) {
    throw Error(ErrorCategory::kConfig, "unknown training option: " + std::string(key));
  }
  it->second(value);
}

std::map<std::string, std::string> TrainConfig::ToMap() const {
  return {
      {"learning_rate", FormatDouble(learning_rate)},
      {"effective_batch_size", std::to_string(effective_batch_size)},
      {"weight_decay", FormatDouble(weight_decay)},
      {"adam_beta1", FormatDouble(adam_beta1)},
      {"adam_beta2", FormatDouble(adam_beta2)},
      {"adam_epsilon", FormatDouble(adam_epsilon)},
      {"warmup_ratio", FormatDouble(warmup_ratio)},
      {"max_grad_norm", FormatDouble(max_grad_norm)},
      {"max_input_length", std::to_string(max_input_length)},
      {"epochs", std::to_string(epochs)},
      {"convergence_tolerance", FormatDouble(convergence_tolerance)},
      {"convergence_patience", std::to_string(convergence_patience)},
      {"lambda_start", FormatDouble(lambda_start)},
      {"lambda_end", FormatDouble(lambda_end)},
      {"temperature", FormatDouble(temperature)},
      {"temperature_end", FormatDouble(temperature_end)},
      {"gate_mode", gate_mode == GateMode::kSoft ? "soft" : "straight_through"},
      {"schedule", schedule == UpdateSchedule::kAlternating ? "alternating" : "joint"},
      {"reconstructor_warmup_epochs", std::to_string(reconstructor_warmup_epochs)},
      {"warmup_min_mask_rate", FormatDouble(warmup_min_mask_rate)},
      {"warmup_max_mask_rate", FormatDouble(warmup_max_mask_rate)},
      {"masker_init_keep_bias", FormatDouble(masker_init_keep_bias)},
      {"seed", std::to_string(seed)},
      {"num_layers", std::to_string(num_layers)},
      {"hidden_size", std::to_string(hidden_size)},
      {"num_heads", std::to_string(num_heads)},
      {"ff_size", std::to_string(ff_size)},
      {"vocab_min_count", std::to_string(vocab_min_count)},
      {"vocab_max_words", std::to_string(vocab_max_words)},
  };
}

std::string TrainConfig::ToKeyValue() const {
  std::string out;
  for (const auto& [k, v] : ToMap()) out += k + " = " + v + "\n";
  return out;
}

std::map<std::string, std::string> ReadKeyValueFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::kConfig, "cannot open config " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = Trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';' || t[0] == '[') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCategory::kConfig,
                  path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    }
    out[Trim(t.substr(0, eq))] = Trim(t.substr(eq + 1));
  }
  return out;
}

TrainConfig TrainConfig::FromFile(const std::filesystem::path& path, TrainConfig base) {
  for (const auto& [k, v] : ReadKeyValueFile(path)) base.Set(k, v);
  return base;
}

TrainConfig TrainConfig::FromFile(const std::filesystem::path& path) {
  return FromFile(path, TrainConfig{});
}

double LambdaSchedule(int epoch, int total_epochs, const TrainConfig& cfg) {
  if (total_epochs < 1 || epoch < 0 || epoch >= total_epochs) {
    throw Error(ErrorCategory::kConfig, "epoch " + std::to_string(epoch) + " outside [0, " +
                                            std::to_string(total_epochs) + ")");
  }
  if (total_epochs == 1 || epoch == 0) return cfg.lambda_start;
  if (epoch == total_epochs - 1) return cfg.lambda_end;
  const double t = static_cast<double>(epoch) / (total_epochs - 1);
  return cfg.lambda_start + t * (cfg.lambda_end - cfg.lambda_start);
}

double TemperatureSchedule(int epoch, int total_epochs, const TrainConfig& cfg) {
  if (total_epochs <= 1) return cfg.temperature;
  const double t = static_cast<double>(epoch) / (total_epochs - 1);
  return cfg.temperature * std::pow(cfg.temperature_end / cfg.temperature, t);
}

double TotalMaskerLoss(double recon_loss, double length_loss, double lambda) {
  if (lambda < 0) throw Error(ErrorCategory::kConfig, "lambda must be >= 0");
  return recon_loss + lambda * length_loss;
}

}  // namespace dmr
