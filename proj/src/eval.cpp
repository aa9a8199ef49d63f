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

#include "dmr/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <unordered_map>

namespace dmr {

using json = nlohmann::json;

MetricsReport MetricsFromCounts(long tp, long fp, long fn) {
  MetricsReport r;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  r.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  r.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  r.f1 = r.precision + r.recall == 0.0 ? 0.0
                                       : 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

MetricsReport TokenPrf(std::span<const TokenLabelSeq> gold, std::span<const TokenLabelSeq> pred,
                       Averaging averaging) {
  std::unordered_map<std::string, const TokenLabelSeq*> by_id;
  for (const TokenLabelSeq& p : pred) {
    if (!by_id.emplace(p.passage_id, &p).second) {
      throw Error(ErrorCategory::kData, "duplicate prediction for passage " + p.passage_id);
    }
  }
  if (by_id.size() != gold.size()) {
    for (const TokenLabelSeq& g : gold) {
      if (!by_id.contains(g.passage_id)) {
        throw Error(ErrorCategory::kData, "no prediction for passage " + g.passage_id);
      }
    }
    std::set<std::string> gold_ids;
    for (const TokenLabelSeq& g : gold) gold_ids.insert(g.passage_id);
    for (const TokenLabelSeq& p : pred) {
      if (!gold_ids.contains(p.passage_id)) {
        throw Error(ErrorCategory::kData, "prediction for unknown passage " + p.passage_id);
      }
    }
    throw Error(ErrorCategory::kData, "duplicate gold passage ids");
  }
  long tp = 0, fp = 0, fn = 0;
  double p_sum = 0.0, r_sum = 0.0, f_sum = 0.0;
  std::vector<PassageCounts> per_passage;
  per_passage.reserve(gold.size());
  for (const TokenLabelSeq& g : gold) {
    const auto it = by_id.find(g.passage_id);
    if (it == by_id.end()) throw Error(ErrorCategory::kData, "no prediction for passage " + g.passage_id);
    const TokenLabelSeq& p = *it->second;
    if (p.labels.size() != g.labels.size()) {
      throw Error(ErrorCategory::kData, "label length mismatch for passage " + g.passage_id);
    }
    PassageCounts c{g.passage_id, 0, 0, 0};
    for (std::size_t i = 0; i < g.labels.size(); ++i) {
      if (g.labels[i] && p.labels[i]) ++c.tp;
      else if (p.labels[i]) ++c.fp;
      else if (g.labels[i]) ++c.fn;
    }
    tp += c.tp;
    fp += c.fp;
    fn += c.fn;
    const MetricsReport m = MetricsFromCounts(c.tp, c.fp, c.fn);
    p_sum += m.precision;
    r_sum += m.recall;
    f_sum += m.f1;
    per_passage.push_back(std::move(c));
  }
  MetricsReport out = MetricsFromCounts(tp, fp, fn);
  if (averaging == Averaging::kMacro && !gold.empty()) {
    const auto n = static_cast<double>(gold.size());
    out.precision = p_sum / n;
    out.recall = r_sum / n;
    out.f1 = f_sum / n;
  }
  out.per_passage = std::move(per_passage);
  return out;
}

MetricSummary Summarize(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCategory::kData, "cannot summarize zero runs");
  MetricSummary s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

AggregateReport AggregateRuns(std::span<const MetricsReport> reports) {
  if (reports.empty()) throw Error(ErrorCategory::kData, "cannot aggregate zero runs");
  std::vector<double> p, r, f;
  for (const MetricsReport& m : reports) {
    p.push_back(m.precision);
    r.push_back(m.recall);
    f.push_back(m.f1);
  }
  return {Summarize(p), Summarize(r), Summarize(f), static_cast<int>(reports.size())};
}

json MetricsToJson(const MetricsReport& report, bool include_per_passage) {
  json j{{"precision", report.precision}, {"recall", report.recall}, {"f1", report.f1},
         {"tp", report.tp}, {"fp", report.fp}, {"fn", report.fn}};
  if (include_per_passage) {
    json rows = json::array();
    for (const PassageCounts& c : report.per_passage) {
      rows.push_back({{"passage_id", c.passage_id}, {"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}});
    }
    j["per_passage"] = std::move(rows);
  }
  return j;
}

json AggregateToJson(const AggregateReport& report) {
  const auto summary = [](const MetricSummary& s) { return json{{"mean", s.mean}, {"std", s.std}}; };
  return {{"precision", summary(report.precision)},
          {"recall", summary(report.recall)},
          {"f1", summary(report.f1)},
          {"runs", report.runs}};
}

std::string MetricsToText(const MetricsReport& report) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "precision = %.6f\nrecall = %.6f\nf1 = %.6f\ntp = %ld\nfp = %ld\nfn = %ld\n",
                report.precision, report.recall, report.f1, report.tp, report.fp, report.fn);
  return buf;
}

namespace {

// Percent value at display precision, as an integer for exact comparison.
long DisplayKey(double v) { return std::lround(v * 10000.0); }

const MetricSummary& Column(const AggregateReport& r, int c) {
  return c == 0 ? r.precision : c == 1 ? r.recall : r.f1;
}

std::string Cell(const MetricSummary& s) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f (%.2f)", s.mean * 100.0, s.std * 100.0);
  return buf;
}

const char* MarkName(CellMark m) {
  return m == CellMark::kBold ? "bold" : m == CellMark::kUnderline ? "underline" : "none";
}

constexpr const char* kColumns[3] = {"precision", "recall", "f1"};

}  // namespace

ComparisonTable MakeComparisonTable(std::vector<MethodRow> rows) {
  ComparisonTable t;
  t.rows = std::move(rows);
  t.marks.assign(t.rows.size(), {CellMark::kNone, CellMark::kNone, CellMark::kNone});
  for (int c = 0; c < 3; ++c) {
    for (bool supervised : {true, false}) {
      std::set<long, std::greater<>> values;
      for (const MethodRow& r : t.rows) {
        if (r.supervised == supervised) values.insert(DisplayKey(Column(r.report, c).mean));
      }
      if (values.empty()) continue;
      const long best = *values.begin();
      const bool has_second = values.size() > 1;
      const long second = has_second ? *std::next(values.begin()) : best;
      for (std::size_t i = 0; i < t.rows.size(); ++i) {
        if (t.rows[i].supervised != supervised) continue;
        const long v = DisplayKey(Column(t.rows[i].report, c).mean);
        if (v == best) {
          t.marks[i][c] = CellMark::kBold;
        } else if (!supervised && has_second && v == second) {
          t.marks[i][c] = CellMark::kUnderline;
        }
      }
    }
  }
  return t;
}

std::string ComparisonTable::ToText() const {
  std::size_t name_width = 6;
  for (const MethodRow& r : rows) name_width = std::max(name_width, r.name.size());
  const auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.append(w - s.size(), ' ');
    return s;
  };
  std::string out = pad("method", name_width) + "  " + pad("group", 12);
  for (const char* c : kColumns) out += "  " + pad(c, 18);
  out += "  runs\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out += pad(rows[i].name, name_width) + "  " +
           pad(rows[i].supervised ? "supervised" : "unsupervised", 12);
    for (int c = 0; c < 3; ++c) {
      std::string cell = Cell(Column(rows[i].report, c));
      if (marks[i][c] == CellMark::kBold) cell = "**" + cell + "**";
      if (marks[i][c] == CellMark::kUnderline) cell = "_" + cell + "_";
      out += "  " + pad(cell, 18);
    }
    out += "  " + std::to_string(rows[i].report.runs) + "\n";
  }
  return out;
}

json ComparisonTable::ToJson() const {
  json out = json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    json row{{"method", rows[i].name}, {"supervised", rows[i].supervised}, {"runs", rows[i].report.runs}};
    for (int c = 0; c < 3; ++c) {
      const MetricSummary& s = Column(rows[i].report, c);
      row[kColumns[c]] = {{"mean", s.mean}, {"std", s.std}, {"mark", MarkName(marks[i][c])}};
    }
    out.push_back(std::move(row));
  }
  return out;
}

std::string ComparisonTable::ToTsv() const {
  std::string out = "method\tgroup\truns";
  for (const char* c : kColumns) out += std::string("\t") + c + "_mean\t" + c + "_std\t" + c + "_mark";
  out += "\n";
  char buf[64];
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out += rows[i].name + "\t" + (rows[i].supervised ? "supervised" : "unsupervised") + "\t" +
           std::to_string(rows[i].report.runs);
    for (int c = 0; c < 3; ++c) {
      const MetricSummary& s = Column(rows[i].report, c);
      std::snprintf(buf, sizeof(buf), "\t%.6f\t%.6f\t", s.mean, s.std);
      out += buf;
      out += MarkName(marks[i][c]);
    }
    out += "\n";
  }
  return out;
}

}  // namespace dmr
