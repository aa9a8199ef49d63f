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

#ifndef DMR_EVAL_HPP_
#define DMR_EVAL_HPP_

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dmr/corpus.hpp"

namespace dmr {

struct PassageCounts {
  std::string passage_id;
  long tp = 0;
  long fp = 0;
  long fn = 0;
};

struct MetricsReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long tp = 0;
  long fp = 0;
  long fn = 0;
  std::vector<PassageCounts> per_passage;
};

enum class Averaging { kMicro, kMacro };

// P, R and F1 from counts, with 0 for empty denominators.
MetricsReport MetricsFromCounts(long tp, long fp, long fn);

// Token-level metrics. Passages are matched by id; the id sets must agree and
// each pair must have the same length. Macro mode averages per-passage
// precision, recall and F1; counts are always summed.
MetricsReport TokenPrf(std::span<const TokenLabelSeq> gold, std::span<const TokenLabelSeq> pred,
                       Averaging averaging = Averaging::kMicro);

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;
};

struct AggregateReport {
  MetricSummary precision;
  MetricSummary recall;
  MetricSummary f1;
  int runs = 0;
};

// Sample mean and sample standard deviation (n - 1), 0 for a single run.
MetricSummary Summarize(std::span<const double> values);
AggregateReport AggregateRuns(std::span<const MetricsReport> reports);

nlohmann::json MetricsToJson(const MetricsReport& report, bool include_per_passage = false);
nlohmann::json AggregateToJson(const AggregateReport& report);
std::string MetricsToText(const MetricsReport& report);

struct MethodRow {
  std::string name;
  bool supervised = false;
  AggregateReport report;
};

enum class CellMark { kNone, kBold, kUnderline };

struct ComparisonTable {
  std::vector<MethodRow> rows;
  // marks[row][column] for columns precision, recall, f1.
  std::vector<std::array<CellMark, 3>> marks;

  std::string ToText() const;
  nlohmann::json ToJson() const;
  std::string ToTsv() const;
};

// Bolds every row tied for the maximum of each column within its group
// (supervised, unsupervised) and underlines the second-highest distinct
// value among unsupervised methods. Values are compared at the displayed
// precision (two decimals in percent).
ComparisonTable MakeComparisonTable(std::vector<MethodRow> rows);

}  // namespace dmr

#endif  // DMR_EVAL_HPP_
