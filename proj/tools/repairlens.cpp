// repairlens command-line front end.
//
// Exit codes: 0 success, 1 usage or config error, 2 stage failure,
// 3 adapter failure.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "repairlens/config.hpp"
#include "repairlens/pipeline.hpp"
#include "repairlens/report.hpp"
#include "repairlens/stages.hpp"
#include "stubs.hpp"

namespace rl = repairlens;
namespace fs = std::filesystem;

namespace {

struct PipelineFlags {
  std::string config;
  std::string workspace;
  bool force = false;
  std::string stages;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> jobs;
};

void add_pipeline_flags(CLI::App* cmd, PipelineFlags& f, bool with_seed = true) {
  cmd->add_option("--config", f.config, "pipeline config (JSON)");
  cmd->add_option("--workspace", f.workspace, "workspace directory (overrides the config)");
  cmd->add_flag("--force", f.force, "rerun stages even if their inputs are unchanged");
  if (with_seed) cmd->add_option("--seed", f.seed, "sampling seed (overrides the config)");
  cmd->add_option("--jobs", f.jobs, "parallel per-file adapter invocations");
}

int run_stages(const PipelineFlags& f, const std::string& stages) {
  if (f.config.empty()) throw rl::Error(rl::ErrorKind::ConfigError, "--config is required");
  auto config = rl::load_config(f.config);
  if (!f.workspace.empty()) config.workspace_dir = fs::absolute(f.workspace);
  if (f.seed) config.seed = *f.seed;
  if (f.jobs) {
    if (*f.jobs == 0) throw rl::Error(rl::ErrorKind::ConfigError, "--jobs must be >= 1");
    config.jobs = *f.jobs;
  }
  rl::RunOptions opts;
  opts.force = f.force;
  opts.stages = rl::parse_stage_filter(stages);
  opts.log = &std::cerr;
  const auto summary = rl::run_pipeline(config, opts);
  for (const auto& r : summary.stages)
    if (r.status != rl::StageStatus::NotSelected) std::cout << r.stage << "\t" << rl::to_string(r.status) << "\n";
  const auto report = config.workspace_dir / "report" / "summary.json";
  if (opts.stages.empty() || opts.stages.count("report")) std::cout << "summary: " << report.string() << "\n";
  return 0;
}

rl::ViolationReport read_report(const std::string& path, rl::ReportState state, const std::string& format,
                                bool fallback) {
  return rl::parse_report(rl::io::read_file(path), format, state, {fallback});
}

int exit_code_for(const rl::Error& e) {
  if (auto* s = dynamic_cast<const rl::StageError*>(&e)) return rl::is_adapter_error(s->cause()) ? 3 : 2;
  if (rl::is_adapter_error(e.kind())) return 3;
  if (e.kind() == rl::ErrorKind::ConfigError || e.kind() == rl::ErrorKind::InvalidParameter ||
      e.kind() == rl::ErrorKind::UnknownAdapter)
    return 1;
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evaluate an automated repair tool on static-analysis violations"};
  app.require_subcommand(1);

  // run
  PipelineFlags run_flags;
  auto* run = app.add_subcommand("run", "run the pipeline stages in order");
  add_pipeline_flags(run, run_flags);
  run->add_option("--stages", run_flags.stages, "comma-separated subset of stages");

  // fixrate
  PipelineFlags fx_flags;
  std::string pre, post, format = "csv", profile = "sorald-30", out;
  bool fallback = false;
  auto* fixrate = app.add_subcommand("fixrate", "fix rate per rule and overall");
  add_pipeline_flags(fixrate, fx_flags);
  fixrate->add_option("--pre", pre, "pre-repair report");
  fixrate->add_option("--post", post, "post-repair report");
  fixrate->add_option("--format", format, "report format (csv, sonarqube-json)");
  fixrate->add_option("--profile", profile, "rule profile (sorald-30, all)");
  fixrate->add_flag("--end-line-fallback", fallback, "use start line when end line is missing");
  fixrate->add_option("--out", out, "directory for fixrate.csv / fixrate.json");

  // newviol
  PipelineFlags nv_flags;
  std::string original, repaired, normalization = "exact";
  auto* newviol = app.add_subcommand("newviol", "classify post-repair violations as new or carried over");
  add_pipeline_flags(newviol, nv_flags);
  newviol->add_option("--pre", pre, "pre-repair report (all rules)");
  newviol->add_option("--post", post, "post-repair report (all rules)");
  newviol->add_option("--original", original, "original source tree");
  newviol->add_option("--repaired", repaired, "repaired source tree");
  newviol->add_option("--format", format, "report format (csv, sonarqube-json)");
  newviol->add_option("--normalize,--normalization", normalization, "line comparison (exact, loose)");
  newviol->add_flag("--end-line-fallback", fallback, "use start line when end line is missing");
  newviol->add_option("--out", out, "output directory");

  // sample
  PipelineFlags sm_flags;
  std::string new_violations;
  std::optional<std::size_t> population;
  double confidence = 0.95, margin = 0.05, proportion = 0.5;
  std::uint64_t seed = 42;
  auto* sample = app.add_subcommand("sample", "Cochran sample size and stratified labeling sheet");
  add_pipeline_flags(sample, sm_flags, false);
  sample->add_option("--new-violations", new_violations, "new_violations.csv from newviol");
  sample->add_option("--original", original, "original source tree");
  sample->add_option("--repaired", repaired, "repaired source tree");
  sample->add_option("--population", population, "only print the sample size for this population");
  sample->add_option("--confidence", confidence, "confidence level (0.90, 0.95, 0.99)");
  sample->add_option("--margin", margin, "margin of error");
  sample->add_option("--proportion", proportion, "expected proportion");
  sample->add_option("--seed", sm_flags.seed, "seed for the stratified draw");
  sample->add_option("--out", out, "labeling sheet path (*.csv) or output directory");

  // precision
  std::string labels;
  double threshold = 0.70;
  auto* precision = app.add_subcommand("precision", "exact one-sided binomial test on a labeled sheet");
  precision->add_option("--labels", labels, "filled labeling sheet")->required();
  precision->add_option("--threshold", threshold, "null precision");
  precision->add_option("--out", out, "write precision.json here");

  // semantic
  PipelineFlags se_flags;
  std::string original_results, repaired_results, compile_log, patterns;
  auto* semantic = app.add_subcommand("semantic", "test regressions and compile-error classes");
  add_pipeline_flags(semantic, se_flags);
  semantic->add_option("--baseline,--original-results", original_results, "test results on the original code");
  semantic->add_option("--repaired,--repaired-results", repaired_results, "test results on the repaired code");
  semantic->add_option("--compile-log", compile_log, "directory of <file>.log compile diagnostics");
  semantic->add_option("--patterns", patterns, "failure/compile-error pattern table (JSON)");
  semantic->add_option("--out", out, "output directory");

  // metrics
  PipelineFlags me_flags;
  auto* metrics = app.add_subcommand("metrics", "paired structural-metric tests");
  add_pipeline_flags(metrics, me_flags);
  metrics->add_option("--pre", pre, "class metrics before repair");
  metrics->add_option("--post", post, "class metrics after repair");
  metrics->add_option("--out", out, "output directory");

  // report
  PipelineFlags re_flags;
  auto* report = app.add_subcommand("report", "merge axis outputs into summary.json");
  add_pipeline_flags(report, re_flags);
  report->add_option("--out", out, "output directory (default: <workspace>/report)");

  // stub tools
  std::string stub_in, stub_out, stub_rule;
  auto* stub = app.add_subcommand("stub", "built-in stand-ins for the external tools");
  stub->require_subcommand(1);
  auto* stub_analyze = stub->add_subcommand("analyze", "regex analyzer; writes report.csv");
  auto* stub_repair = stub->add_subcommand("repair", "rule-by-rule rewriter");
  auto* stub_test = stub->add_subcommand("test", "comment-declared tests; writes results.csv");
  auto* stub_metrics = stub->add_subcommand("metrics", "class metrics; writes class_metrics.csv");
  for (auto* c : {stub_analyze, stub_repair, stub_test, stub_metrics}) {
    c->add_option("input", stub_in)->required();
    c->add_option("output", stub_out)->required();
  }
  stub_repair->add_option("--rule", stub_rule, "apply only this rule");
  auto* stub_compile = stub->add_subcommand("compile", "fake compiler; exit 1 with diagnostics on rejection");
  stub_compile->add_option("file", stub_in)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*run) return run_stages(run_flags, run_flags.stages);

    if (*fixrate) {
      if (pre.empty() && post.empty()) return run_stages(fx_flags, "fixrate");
      if (pre.empty() || post.empty()) throw rl::Error(rl::ErrorKind::ConfigError, "--pre and --post are required");
      const auto prof = rl::profile_by_name(profile);
      const auto a = rl::write_fixrate_outputs(read_report(pre, rl::ReportState::PreRepair, format, fallback),
                                               read_report(post, rl::ReportState::PostRepair, format, fallback), prof,
                                               out.empty() ? fs::path(".") : fs::path(out));
      std::cout << a.summary.to_text();
      return 0;
    }

    if (*newviol) {
      if (pre.empty() && post.empty() && original.empty()) return run_stages(nv_flags, "newviol");
      if (pre.empty() || post.empty() || original.empty() || repaired.empty())
        throw rl::Error(rl::ErrorKind::ConfigError, "--pre, --post, --original and --repaired are required");
      const auto a = rl::write_newviol_outputs(read_report(pre, rl::ReportState::PreRepair, format, fallback),
                                               read_report(post, rl::ReportState::PostRepair, format, fallback),
                                               rl::load_sources(original, repaired),
                                               rl::parse_normalization(normalization),
                                               out.empty() ? fs::path(".") : fs::path(out));
      std::cout << rl::dump_json(rl::categories_json(a.categories));
      return 0;
    }

    if (*sample) {
      rl::SamplePlan plan;
      plan.confidence = confidence;
      plan.margin = margin;
      plan.proportion = proportion;
      if (population) {
        plan.population = *population;
        std::cout << rl::cochran_sample_size(plan) << "\n";
        return 0;
      }
      if (new_violations.empty()) return run_stages(sm_flags, "sample");
      if (original.empty() || repaired.empty())
        throw rl::Error(rl::ErrorKind::ConfigError, "--original and --repaired are required");
      fs::path sheet = out.empty() ? fs::path("sheet.csv") : fs::path(out);
      if (sheet.extension() != ".csv") sheet /= "sheet.csv";
      const auto a = rl::write_sample_outputs(rl::verdicts_from_csv(rl::io::read_file(new_violations)),
                                              rl::load_sources(original, repaired), plan, sm_flags.seed.value_or(seed),
                                              sheet, sheet.parent_path() / "sample.json");
      std::cout << "population " << a.population << ", sample " << a.target_n << "\n";
      return 0;
    }

    if (*precision) {
      const auto j = rl::precision_json(rl::ingest_labels(rl::io::read_file(labels)), threshold);
      if (!out.empty()) rl::io::write_file(fs::path(out) / "precision.json", rl::dump_json(j));
      std::cout << rl::dump_json(j);
      return 0;
    }

    if (*semantic) {
      if (original_results.empty() && repaired_results.empty()) return run_stages(se_flags, "semantic");
      if (original_results.empty() || repaired_results.empty())
        throw rl::Error(rl::ErrorKind::ConfigError, "--baseline and --repaired are required");
      const auto tables = patterns.empty()
                              ? rl::default_patterns()
                              : rl::PatternTables::from_json(nlohmann::json::parse(rl::io::read_file(patterns)));
      const auto a = rl::write_semantic_outputs(
          rl::ingest_test_results(rl::io::read_file(original_results)),
          rl::ingest_test_results(rl::io::read_file(repaired_results)),
          compile_log.empty() ? std::vector<rl::CompileDiagnostic>{} : rl::read_compile_logs(compile_log), tables,
          out.empty() ? fs::path(".") : fs::path(out));
      std::cout << rl::dump_json(a.summary.to_json());
      return 0;
    }

    if (*metrics) {
      if (pre.empty() && post.empty()) return run_stages(me_flags, "metrics");
      if (pre.empty() || post.empty()) throw rl::Error(rl::ErrorKind::ConfigError, "--pre and --post are required");
      const auto a = rl::write_metrics_outputs(rl::parse_class_metrics(rl::io::read_file(pre)),
                                               rl::parse_class_metrics(rl::io::read_file(post)),
                                               out.empty() ? fs::path(".") : fs::path(out));
      std::cout << rl::structural_stats_csv(a.report);
      return 0;
    }

    if (*report) {
      fs::path workspace = re_flags.workspace;
      if (workspace.empty()) {
        if (re_flags.config.empty()) throw rl::Error(rl::ErrorKind::ConfigError, "--workspace or --config is required");
        workspace = rl::load_config(re_flags.config).workspace_dir;
      }
      const auto bundle = rl::emit_reports(workspace, out.empty() ? workspace / "report" : fs::path(out));
      std::cout << bundle.summary.dump(2) << "\n";
      return 0;
    }

    if (*stub_analyze) rl::stubs::analyze(stub_in, stub_out);
    if (*stub_repair) rl::stubs::repair(stub_in, stub_out, stub_rule);
    if (*stub_test) rl::stubs::run_tests(stub_in, stub_out);
    if (*stub_metrics) rl::stubs::extract_metrics(stub_in, stub_out);
    if (*stub_compile) {
      const auto errors = rl::stubs::compile_errors(fs::path(stub_in).filename().string(),
                                                    rl::io::split_lines(rl::io::read_file(stub_in)));
      for (const auto& e : errors) std::cerr << e << "\n";
      return errors.empty() ? 0 : 1;
    }
    return 0;
  } catch (const rl::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
