#pragma once

// Structural-quality axis: class-level CK-style metrics are rolled up per file
// (sums, except DIT which takes the maximum), paired across the repair and
// tested per metric.

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "repairlens/csv.hpp"
#include "repairlens/error.hpp"
#include "repairlens/io.hpp"
#include "repairlens/stattests.hpp"

namespace repairlens {

enum class Metric { NOC, NPA, DIT, LCOM1, WMC, CBO, RFC, LOC };

inline constexpr std::array<Metric, 8> kMetrics{Metric::NOC, Metric::NPA, Metric::DIT, Metric::LCOM1,
                                                Metric::WMC, Metric::CBO, Metric::RFC, Metric::LOC};

constexpr std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::NOC: return "NOC";
    case Metric::NPA: return "NPA";
    case Metric::DIT: return "DIT";
    case Metric::LCOM1: return "LCOM1";
    case Metric::WMC: return "WMC";
    case Metric::CBO: return "CBO";
    case Metric::RFC: return "RFC";
    case Metric::LOC: return "LOC";
  }
  return "";
}

// CSV column name, e.g. "lcom1"
inline std::string column_name(Metric m) {
  std::string s(to_string(m));
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

using MetricValues = std::array<std::uint64_t, kMetrics.size()>;

struct ClassMetricsRow {
  std::string file_id;
  std::string class_name;
  MetricValues values{};

  std::uint64_t operator[](Metric m) const { return values[static_cast<std::size_t>(m)]; }
  std::uint64_t& operator[](Metric m) { return values[static_cast<std::size_t>(m)]; }
};

struct FileMetrics {
  std::string file_id;
  MetricValues values{};

  std::uint64_t operator[](Metric m) const { return values[static_cast<std::size_t>(m)]; }

  friend bool operator==(const FileMetrics&, const FileMetrics&) = default;
};

// CK-style CSV: file,class,noc,npa,dit,lcom1,wmc,cbo,rfc,loc
inline std::vector<ClassMetricsRow> parse_class_metrics(std::string_view text) {
  auto table = csv::parse(text);
  std::vector<ClassMetricsRow> rows;
  if (table.header.empty()) return rows;
  auto file = table.column("file");
  auto cls = table.column("class");
  if (!file || !cls) throw Error(ErrorKind::MissingRequiredField, "columns 'file' and 'class'");
  std::array<std::size_t, kMetrics.size()> cols{};
  for (auto m : kMetrics) {
    auto c = table.column(column_name(m));
    if (!c) throw Error(ErrorKind::MissingRequiredField, "column '" + column_name(m) + "'");
    cols[static_cast<std::size_t>(m)] = *c;
  }
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    ClassMetricsRow out;
    out.file_id = row[*file];
    out.class_name = row[*cls];
    for (auto m : kMetrics) {
      const auto text_value = io::trim(row[cols[static_cast<std::size_t>(m)]]);
      if (text_value.empty() || !std::all_of(text_value.begin(), text_value.end(), ::isdigit))
        throw Error(ErrorKind::MalformedInput, "line " + std::to_string(table.row_lines[r]) + ": " + column_name(m) +
                                                   " must be a non-negative integer, got '" + text_value + "'");
      out[m] = std::stoull(text_value);
    }
    rows.push_back(std::move(out));
  }
  return rows;
}

inline std::string class_metrics_to_csv(const std::vector<ClassMetricsRow>& rows) {
  csv::Row header{"file", "class"};
  for (auto m : kMetrics) header.push_back(column_name(m));
  std::vector<csv::Row> out;
  for (const auto& r : rows) {
    csv::Row row{r.file_id, r.class_name};
    for (auto m : kMetrics) row.push_back(std::to_string(r[m]));
    out.push_back(std::move(row));
  }
  return csv::write(header, out);
}

// One record per file, in file order. Inner classes count like any other.
inline std::vector<FileMetrics> aggregate_file_metrics(const std::vector<ClassMetricsRow>& rows) {
  std::map<std::string, FileMetrics> files;
  for (const auto& r : rows) {
    auto [it, inserted] = files.try_emplace(r.file_id, FileMetrics{r.file_id, {}});
    auto& f = it->second;
    for (auto m : kMetrics) {
      auto& slot = f.values[static_cast<std::size_t>(m)];
      slot = m == Metric::DIT ? std::max(slot, r[m]) : slot + r[m];
    }
  }
  std::vector<FileMetrics> out;
  out.reserve(files.size());
  for (auto& [_, f] : files) out.push_back(std::move(f));
  return out;
}

struct MetricPair {
  std::string file_id;
  FileMetrics pre;
  FileMetrics post;
};

enum class ExclusionReason { PreAbsent, PostAbsent };

constexpr std::string_view to_string(ExclusionReason r) {
  return r == ExclusionReason::PreAbsent ? "PreAbsent" : "PostAbsent";
}

struct PairingResult {
  std::vector<MetricPair> pairs;  // file order
  std::vector<std::pair<std::string, ExclusionReason>> excluded;
};

inline PairingResult pair_pre_post(const std::vector<FileMetrics>& pre, const std::vector<FileMetrics>& post) {
  std::map<std::string, const FileMetrics*> a, b;
  for (const auto& f : pre) a[f.file_id] = &f;
  for (const auto& f : post) b[f.file_id] = &f;
  PairingResult out;
  for (const auto& [id, f] : a) {
    auto it = b.find(id);
    if (it == b.end())
      out.excluded.emplace_back(id, ExclusionReason::PostAbsent);
    else
      out.pairs.push_back({id, *f, *it->second});
  }
  for (const auto& [id, _] : b)
    if (!a.count(id)) out.excluded.emplace_back(id, ExclusionReason::PreAbsent);
  std::sort(out.excluded.begin(), out.excluded.end());
  return out;
}

struct MetricStatRow {
  Metric metric;
  std::size_t n = 0;
  std::optional<stats::StatResult> normality;  // on pre-state values; empty below 20 pairs or if degenerate
  std::string normality_note;
  stats::StatResult wilcoxon;
  stats::DirectionSummary direction;
  double pre_median = 0;
  double post_median = 0;

  bool significant(double alpha = 0.05) const { return wilcoxon.p_value && *wilcoxon.p_value < alpha; }
};

struct StructuralReport {
  std::vector<MetricStatRow> rows;  // kMetrics order

  std::vector<Metric> significant_metrics(double alpha = 0.05) const {
    std::vector<Metric> out;
    for (const auto& r : rows)
      if (r.significant(alpha)) out.push_back(r.metric);
    return out;
  }

  const MetricStatRow& row(Metric m) const {
    for (const auto& r : rows)
      if (r.metric == m) return r;
    throw Error(ErrorKind::InvalidParameter, "metric not in report");
  }
};

inline StructuralReport structural_report(const std::vector<MetricPair>& pairs) {
  StructuralReport report;
  for (auto m : kMetrics) {
    MetricStatRow row;
    row.metric = m;
    row.n = pairs.size();
    stats::PairedSeries series{std::string(to_string(m)), {}};
    std::vector<double> pre_values, post_values;
    for (const auto& p : pairs) {
      const double a = static_cast<double>(p.pre[m]);
      const double b = static_cast<double>(p.post[m]);
      pre_values.push_back(a);
      post_values.push_back(b);
      series.deltas.push_back(b - a);
    }
    if (pairs.size() < stats::kNormalityMinSample) {
      row.normality_note = "skipped: fewer than 20 pairs";
    } else {
      try {
        row.normality = stats::dagostino_pearson(pre_values);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::DegenerateSample) throw;
        row.normality_note = "skipped: constant pre-repair values";
      }
    }
    row.wilcoxon = stats::wilcoxon_signed_rank(series);
    row.direction = stats::signed_rank_direction(series);
    row.pre_median = stats::median(pre_values);
    row.post_median = stats::median(post_values);
    report.rows.push_back(std::move(row));
  }
  return report;
}

namespace detail {

inline std::string number_or_na(const std::optional<double>& v) {
  return v ? nlohmann::json(*v).dump() : std::string("NA");
}

}  // namespace detail

// metric,n,test,statistic,p_value,median_delta,mean_signed_rank,direction
inline std::string structural_stats_csv(const StructuralReport& report) {
  std::vector<csv::Row> rows;
  for (const auto& r : report.rows) {
    if (r.normality) {
      rows.push_back({std::string(to_string(r.metric)), std::to_string(r.normality->n_effective), r.normality->test_name,
                      detail::number_or_na(r.normality->statistic), detail::number_or_na(r.normality->p_value), "NA",
                      "NA", "NA"});
    }
    rows.push_back({std::string(to_string(r.metric)), std::to_string(r.wilcoxon.n_effective), r.wilcoxon.test_name,
                    detail::number_or_na(r.wilcoxon.statistic), detail::number_or_na(r.wilcoxon.p_value),
                    nlohmann::json(r.direction.median_delta).dump(), detail::number_or_na(r.direction.mean_signed_rank),
                    std::string(to_string(r.wilcoxon.p_value ? r.direction.direction : stats::Direction::Undefined))});
  }
  return csv::write({"metric", "n", "test", "statistic", "p_value", "median_delta", "mean_signed_rank", "direction"},
                    rows);
}

inline std::string metric_medians_csv(const StructuralReport& report) {
  std::vector<csv::Row> rows;
  for (const auto& r : report.rows)
    rows.push_back({std::string(to_string(r.metric)), nlohmann::json(r.pre_median).dump(),
                    nlohmann::json(r.post_median).dump()});
  return csv::write({"metric", "pre_median", "post_median"}, rows);
}

inline std::string signed_ranks_csv(const StructuralReport& report) {
  std::vector<csv::Row> rows;
  for (const auto& r : report.rows)
    rows.push_back({std::string(to_string(r.metric)), std::to_string(r.wilcoxon.n_effective),
                    detail::number_or_na(r.direction.mean_signed_rank), std::string(to_string(r.direction.direction))});
  return csv::write({"metric", "n_nonzero", "mean_signed_rank", "direction"}, rows);
}

// Reads back structural_stats.csv, keeping the Wilcoxon rows.
struct StructuralStatLine {
  std::string metric;
  std::optional<double> p_value;
  std::string direction;
};

inline std::vector<StructuralStatLine> parse_structural_stats(std::string_view text) {
  auto table = csv::parse(text);
  std::vector<StructuralStatLine> out;
  auto metric = table.column("metric"), test = table.column("test"), p = table.column("p_value"),
       dir = table.column("direction");
  if (!metric || !test || !p || !dir) throw Error(ErrorKind::MalformedInput, "structural_stats.csv header");
  for (const auto& row : table.rows) {
    if (row[*test] != "wilcoxon_signed_rank") continue;
    StructuralStatLine line{row[*metric], std::nullopt, row[*dir]};
    if (row[*p] != "NA") line.p_value = std::stod(row[*p]);
    out.push_back(std::move(line));
  }
  return out;
}

}  // namespace repairlens
