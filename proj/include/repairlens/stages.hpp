#pragma once

// Per-axis output writers shared by the standalone subcommands and the
// pipeline stages. Each takes parsed inputs and writes the axis' files into
// `out`; every file is a deterministic function of the inputs.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "repairlens/fixrate.hpp"
#include "repairlens/io.hpp"
#include "repairlens/metrics.hpp"
#include "repairlens/newviol.hpp"
#include "repairlens/sampling.hpp"
#include "repairlens/semantic.hpp"
#include "repairlens/violation.hpp"

namespace repairlens {

namespace fs = std::filesystem;

inline std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

// --- fix rate --------------------------------------------------------------

struct FixrateArtifacts {
  MatchOutcome outcome;
  FixRateSummary summary;
};

inline FixrateArtifacts write_fixrate_outputs(const ViolationReport& pre, const ViolationReport& post,
                                              const RuleProfile& profile, const fs::path& out) {
  const auto pre_p = restrict_to_profile(pre, profile);
  const auto post_p = restrict_to_profile(post, profile);
  FixrateArtifacts a;
  a.outcome = match_violations(pre_p, post_p);
  a.summary = summarize_fix_rate(compute_fix_rates(a.outcome, profile));

  auto json = a.summary.to_json();
  json["profile"] = profile.name;
  json["unparsable_files"] = a.outcome.unparsable_files;
  io::write_file(out / "fixrate.csv", a.summary.to_csv());
  io::write_file(out / "fixrate.json", dump_json(json));
  ViolationReport fixed{ReportState::PreRepair, a.outcome.fixed, profile.name};
  io::write_file(out / "fixed_violations.csv", serialize_report(fixed));
  return a;
}

// --- new violations -----------------------------------------------------------

struct NewviolArtifacts {
  DetectionResult detection;
  NewViolationCategories categories;
};

inline nlohmann::json categories_json(const NewViolationCategories& c) {
  nlohmann::json by_type = nlohmann::json::object(), matrix = nlohmann::json::object();
  for (auto t : kViolationTypes) {
    by_type[std::string(to_string(t))] = c.count(t);
    for (auto s : kSeverities) matrix[std::string(to_string(t))][std::string(to_string(s))] = c.count(t, s);
  }
  nlohmann::json freq = nlohmann::json::array();
  for (const auto& [rule, n] : c.frequency) freq.push_back({{"rule", rule.str()}, {"count", n}});
  return {{"new_total", c.total}, {"by_type", by_type}, {"matrix", matrix}, {"frequency", freq}};
}

inline NewviolArtifacts write_newviol_outputs(const ViolationReport& pre, const ViolationReport& post,
                                              const SourceMap& sources, LineNormalization policy, const fs::path& out) {
  NewviolArtifacts a;
  a.detection = detect_new_violations(pre, post, sources, policy);
  a.categories = categorize_new(a.detection.verdicts);

  std::map<std::string, std::size_t> verdict_counts{
      {"NEW", 0}, {"NOT_NEW_FRAGMENT_FOUND", 0}, {"NOT_NEW_KEY_MATCH", 0}};
  for (const auto& v : a.detection.verdicts) ++verdict_counts[std::string(to_string(v.verdict))];

  auto json = categories_json(a.categories);
  json["post_total"] = a.detection.verdicts.size();
  json["verdicts"] = verdict_counts;
  json["deleted_files"] = a.detection.deleted_files;
  json["normalization"] = policy == LineNormalization::Exact ? "exact" : "loose";
  io::write_file(out / "new_violations.csv", verdicts_to_csv(a.detection.verdicts));
  io::write_file(out / "new_matrix.csv", categories_matrix_csv(a.categories));
  io::write_file(out / "new_frequency.csv", categories_frequency_csv(a.categories));
  io::write_file(out / "new_summary.json", dump_json(json));
  return a;
}

// --- sampling and precision -----------------------------------------------------

struct SampleArtifacts {
  std::size_t population = 0;
  std::size_t target_n = 0;
  std::optional<StratifiedSample<Violation>> sample;
};

inline SampleArtifacts write_sample_outputs(const std::vector<NewViolationVerdict>& verdicts, const SourceMap& sources,
                                            const SamplePlan& params, std::uint64_t seed, const fs::path& sheet_path,
                                            const fs::path& plan_path) {
  std::vector<Violation> population;
  for (const auto& v : verdicts)
    if (v.verdict == Verdict::New) population.push_back(v.violation);

  SampleArtifacts a;
  a.population = population.size();
  nlohmann::json plan{{"population", a.population}, {"confidence", params.confidence}, {"margin", params.margin},
                      {"proportion", params.proportion}, {"seed", seed}};
  if (population.empty()) {
    plan["target_n"] = 0;
    io::write_file(sheet_path, export_labeling_sheet(StratifiedSample<Violation>{}, sources));
  } else {
    SamplePlan p = params;
    p.population = population.size();
    const auto strata = group_by_rule(population, [](const Violation& v) { return v.rule; });
    // the one-per-rule floor can exceed the Cochran size for tiny populations
    a.target_n = std::max(cochran_sample_size(p), strata.size());
    a.sample = stratified_sample(strata, a.target_n, seed);
    nlohmann::json initial = nlohmann::json::object(), final_alloc = nlohmann::json::object();
    for (const auto& [rule, n] : a.sample->allocation.initial) initial[rule.str()] = n;
    for (const auto& [rule, n] : a.sample->allocation.final) final_alloc[rule.str()] = n;
    plan["target_n"] = a.target_n;
    plan["initial_allocation_total"] = Allocation::total(a.sample->allocation.initial);
    plan["initial_allocation"] = initial;
    plan["allocation"] = final_alloc;
    io::write_file(sheet_path, export_labeling_sheet(*a.sample, sources));
  }
  io::write_file(plan_path, dump_json(plan));
  return a;
}

inline nlohmann::json precision_json(const LabelIngest& labels, double threshold) {
  const std::size_t n = labels.true_positives + labels.false_positives;
  nlohmann::json j{{"true_positives", labels.true_positives}, {"false_positives", labels.false_positives},
                   {"threshold", threshold}};
  if (n == 0) {
    j["p_value"] = nullptr;
    return j;
  }
  auto r = exact_binomial_test(labels.true_positives, n, threshold);
  j["precision"] = r.observed_proportion;
  j["p_value"] = r.p_value;
  j["alpha"] = r.alpha;
  j["precision_exceeds_threshold"] = r.significant;
  return j;
}

// --- semantic --------------------------------------------------------------------

// Compile logs: one file per uncompilable source, named "<file_id>.log". Lines
// containing "error:" are diagnostics; a log without such lines counts whole.
inline std::vector<CompileDiagnostic> read_compile_logs(const fs::path& dir) {
  std::vector<CompileDiagnostic> out;
  for (const auto& rel : io::list_files(dir)) {
    std::string file_id = rel;
    if (file_id.size() > 4 && file_id.ends_with(".log")) file_id.resize(file_id.size() - 4);
    const auto text = io::read_file(dir / rel);
    bool any = false;
    for (const auto& line : io::split_lines(text))
      if (line.find("error:") != std::string::npos) {
        out.push_back({file_id, line});
        any = true;
      }
    if (!any && !io::trim(text).empty()) out.push_back({file_id, io::trim(text)});
  }
  return out;
}

struct SemanticArtifacts {
  std::set<std::string> baseline;
  std::vector<Regression> regressions;
  SemanticSummary summary;
};

inline SemanticArtifacts write_semantic_outputs(const std::vector<TestOutcome>& original_run,
                                                const std::vector<TestOutcome>& repaired_run,
                                                const std::vector<CompileDiagnostic>& diagnostics,
                                                const PatternTables& tables, const fs::path& out) {
  SemanticArtifacts a;
  a.baseline = filter_baseline(original_run);
  a.regressions = diff_test_outcomes(a.baseline, repaired_run);
  a.summary = summarize_semantic(a.baseline.size(), a.regressions, diagnostics, tables);

  auto json = a.summary.to_json();
  json["generated"] = original_run.size();
  json["baseline"] = a.baseline.size();
  io::write_file(out / "regressions.csv", regressions_to_csv(a.regressions, tables));
  io::write_file(out / "failure_histogram.csv", failure_histogram_csv(a.summary));
  io::write_file(out / "compile_errors.csv", compile_errors_csv(diagnostics, tables));
  io::write_file(out / "semantic_summary.json", dump_json(json));
  return a;
}

// --- structural metrics ----------------------------------------------------------

struct MetricsArtifacts {
  PairingResult pairing;
  StructuralReport report;
};

inline MetricsArtifacts write_metrics_outputs(const std::vector<ClassMetricsRow>& pre_rows,
                                              const std::vector<ClassMetricsRow>& post_rows, const fs::path& out) {
  MetricsArtifacts a;
  a.pairing = pair_pre_post(aggregate_file_metrics(pre_rows), aggregate_file_metrics(post_rows));
  a.report = structural_report(a.pairing.pairs);

  std::vector<csv::Row> excl;
  for (const auto& [file, reason] : a.pairing.excluded) excl.push_back({file, std::string(to_string(reason))});
  io::write_file(out / "structural_stats.csv", structural_stats_csv(a.report));
  io::write_file(out / "metric_medians.csv", metric_medians_csv(a.report));
  io::write_file(out / "signed_ranks.csv", signed_ranks_csv(a.report));
  io::write_file(out / "excluded_files.csv", csv::write({"file", "reason"}, excl));
  return a;
}

}  // namespace repairlens
