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

#ifndef DMR_COMMON_HPP_
#define DMR_COMMON_HPP_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dmr {

// Broad failure classes. The CLI maps these onto exit codes and messages.
enum class ErrorCategory {
  kUsage,
  kConfig,
  kIo,
  kParse,
  kData,
  kModel,
  kDivergence,
  kTransport,
};

const char* CategoryName(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

// Half-open [start, end) range of Unicode code points.
struct CharRange {
  int start = 0;
  int end = 0;

  int size() const { return end - start; }
  bool overlaps(const CharRange& other) const {
    return start < other.end && other.start < end;
  }
  bool contains(const CharRange& other) const {
    return start <= other.start && other.end <= end;
  }
  friend bool operator==(const CharRange&, const CharRange&) = default;
  friend auto operator<=>(const CharRange&, const CharRange&) = default;
};

namespace utf8 {

// Decodes UTF-8; invalid bytes are mapped to U+FFFD one byte at a time.
std::u32string Decode(std::string_view text);
std::string Encode(std::u32string_view text);
std::string Encode(char32_t cp);

// Byte offset of every code point plus a trailing entry for the end.
std::vector<std::size_t> CodePointOffsets(std::string_view text);

std::size_t Length(std::string_view text);

// Substring by code-point range.
std::string Substr(std::string_view text, const std::vector<std::size_t>& offsets,
                   CharRange range);
std::string Substr(std::string_view text, CharRange range);

}  // namespace utf8

// Labeled seed derivation: every random stream in a run comes from one
// top-level seed combined with a label and an optional index.
std::uint64_t DeriveSeed(std::uint64_t seed, std::string_view label,
                         std::uint64_t index = 0);

std::uint64_t SplitMix64(std::uint64_t x);

// Uniform double in the open interval (0, 1) from 64 random bits.
inline double OpenUnitInterval(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

std::string Sha256Hex(std::string_view data);
std::string Sha256File(const std::filesystem::path& path);

std::string ReadFile(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it into place.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view content);

}  // namespace dmr

#endif  // DMR_COMMON_HPP_
