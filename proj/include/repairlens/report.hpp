#pragma once

// Unified report: merges the four axis outputs of a workspace into
// summary.json and copies the per-axis and plot-data CSVs next to it.
// A section whose stage directory is absent, or whose manifest says skipped,
// is marked skipped.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "repairlens/error.hpp"
#include "repairlens/io.hpp"
#include "repairlens/metrics.hpp"

namespace repairlens {

struct ReportBundle {
  nlohmann::json summary;
  std::vector<std::string> files;  // written into the output dir, sorted
};

namespace detail {

inline bool stage_present(const fs::path& stage_dir) {
  if (!fs::is_directory(stage_dir)) return false;
  const auto manifest = stage_dir / "manifest.json";
  if (!fs::exists(manifest)) return true;
  const auto j = nlohmann::json::parse(io::read_file(manifest), nullptr, false);
  return !j.is_discarded() && j.value("status", "") == "ok";
}

inline fs::path require(const fs::path& stage_dir, const std::string& name) {
  const auto p = stage_dir / name;
  if (!fs::exists(p))
    throw Error(ErrorKind::MissingStageOutput, stage_dir.filename().string() + "/" + name + " is missing");
  return p;
}

inline nlohmann::json read_json(const fs::path& p) {
  try {
    return nlohmann::json::parse(io::read_file(p));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedInput, p.string() + ": " + e.what());
  }
}

inline const nlohmann::json kSkipped = {{"status", "skipped"}};

}  // namespace detail

inline ReportBundle emit_reports(const fs::path& workspace, const fs::path& out_dir) {
  ReportBundle bundle;
  auto& s = bundle.summary;
  std::vector<std::pair<fs::path, std::string>> copies;  // source, target name

  const auto fixrate = workspace / "fixrate";
  if (detail::stage_present(fixrate)) {
    auto j = detail::read_json(detail::require(fixrate, "fixrate.json"));
    s["fix_rate"] = {{"status", "ok"},
                     {"profile", j.value("profile", "")},
                     {"pre_total", j.at("pre_total")},
                     {"fixed_total", j.at("fixed_total")},
                     {"fix_rate", j.at("fix_rate")},
                     {"fixed_percentage", j.at("fixed_percentage")},
                     {"rules", j.at("rules")}};
    copies.emplace_back(detail::require(fixrate, "fixrate.csv"), "fix_rates.csv");
  } else {
    s["fix_rate"] = detail::kSkipped;
  }

  const auto newviol = workspace / "newviol";
  if (detail::stage_present(newviol)) {
    auto j = detail::read_json(detail::require(newviol, "new_summary.json"));
    nlohmann::json sec{{"status", "ok"},
                       {"post_total", j.value("post_total", 0)},
                       {"new_total", j.at("new_total")},
                       {"by_type", j.at("by_type")},
                       {"matrix", j.at("matrix")}};
    const auto sample = workspace / "sample";
    if (detail::stage_present(sample)) {
      auto plan = detail::read_json(detail::require(sample, "sample.json"));
      sec["sample"] = {{"population", plan.at("population")}, {"target_n", plan.at("target_n")},
                       {"seed", plan.at("seed")}};
      if (plan.contains("allocation")) sec["sample"]["allocation"] = plan.at("allocation");
      const auto precision = sample / "precision.json";
      sec["precision"] = fs::exists(precision) ? detail::read_json(precision) : nlohmann::json(nullptr);
    } else {
      sec["sample"] = "skipped";
      sec["precision"] = nullptr;
    }
    s["new_violations"] = sec;
    copies.emplace_back(detail::require(newviol, "new_matrix.csv"), "new_by_type_severity.csv");
    copies.emplace_back(detail::require(newviol, "new_frequency.csv"), "new_by_rule.csv");
  } else {
    s["new_violations"] = detail::kSkipped;
  }

  const auto semantic = workspace / "semantic";
  if (detail::stage_present(semantic)) {
    auto j = detail::read_json(detail::require(semantic, "semantic_summary.json"));
    j["status"] = "ok";
    s["semantic"] = j;
    copies.emplace_back(detail::require(semantic, "failure_histogram.csv"), "failure_classes.csv");
    copies.emplace_back(detail::require(semantic, "compile_errors.csv"), "compile_error_classes.csv");
  } else {
    s["semantic"] = detail::kSkipped;
  }

  const auto metrics = workspace / "metrics";
  if (detail::stage_present(metrics)) {
    const auto lines = parse_structural_stats(io::read_file(detail::require(metrics, "structural_stats.csv")));
    nlohmann::json per = nlohmann::json::object(), significant = nlohmann::json::array();
    for (const auto& l : lines) {
      per[l.metric] = {{"p_value", l.p_value ? nlohmann::json(*l.p_value) : nlohmann::json(nullptr)},
                       {"direction", l.direction}};
      if (l.p_value && *l.p_value < 0.05) significant.push_back(l.metric);
    }
    s["structural"] = {{"status", "ok"}, {"alpha", 0.05}, {"significant_metrics", significant}, {"metrics", per}};
    copies.emplace_back(detail::require(metrics, "structural_stats.csv"), "structural_tests.csv");
    copies.emplace_back(detail::require(metrics, "metric_medians.csv"), "metric_medians.csv");
    copies.emplace_back(detail::require(metrics, "signed_ranks.csv"), "metric_signed_ranks.csv");
  } else {
    s["structural"] = detail::kSkipped;
  }

  fs::create_directories(out_dir);
  for (const auto& [src, name] : copies) {
    io::write_file(out_dir / name, io::read_file(src));
    bundle.files.push_back(name);
  }
  io::write_file(out_dir / "summary.json", s.dump(2) + "\n");
  bundle.files.push_back("summary.json");
  std::sort(bundle.files.begin(), bundle.files.end());
  return bundle;
}

}  // namespace repairlens
