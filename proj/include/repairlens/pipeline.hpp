#pragma once

// End-to-end orchestration. Stages run in a fixed order; each one writes into
// workspace/<stage>/ together with a manifest.json, and is skipped when the
// digest of its declared inputs matches the last successful run.
//
// Adapter contracts (all paths absolute, shell-quoted):
//   compiler          {input} = one source file; exit 0 accepts, exit 1 rejects
//                     with diagnostics on stderr, anything else is a failure
//   analyzer          {input} = source tree; writes <analyzer_report> into {output}
//   repairer          {input} = source tree; writes the full repaired tree into
//                     {output}; with {rule} in the template it runs once per rule
//   test_runner       {input} = source tree; writes results.csv into {output}
//   metric_extractor  {input} = source tree; writes class_metrics.csv into {output}

#include <fcntl.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <ctime>
#include <exception>
#include <functional>
#include <mutex>
#include <ostream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "repairlens/config.hpp"
#include "repairlens/digest.hpp"
#include "repairlens/error.hpp"
#include "repairlens/io.hpp"
#include "repairlens/process.hpp"
#include "repairlens/report.hpp"
#include "repairlens/stages.hpp"

namespace repairlens {

inline constexpr std::array<std::string_view, 10> kStages{"prepare", "analyze_pre", "repair",   "analyze_post",
                                                          "fixrate", "newviol",     "sample",   "semantic",
                                                          "metrics", "report"};

// A failure inside a stage. kind() is StageFailure; cause() keeps the original.
class StageError : public Error {
 public:
  StageError(std::string stage, ErrorKind cause, const std::string& what)
      : Error(ErrorKind::StageFailure, "stage '" + stage + "': " + what), stage_(std::move(stage)), cause_(cause) {}

  const std::string& stage() const noexcept { return stage_; }
  ErrorKind cause() const noexcept { return cause_; }

 private:
  std::string stage_;
  ErrorKind cause_;
};

inline bool is_adapter_error(ErrorKind k) {
  return k == ErrorKind::AdapterFailure || k == ErrorKind::Timeout || k == ErrorKind::NonZeroExit ||
         k == ErrorKind::MissingArtifact;
}

enum class StageStatus { Ran, Cached, Skipped, Failed, NotSelected };

constexpr std::string_view to_string(StageStatus s) {
  switch (s) {
    case StageStatus::Ran: return "ran";
    case StageStatus::Cached: return "cached";
    case StageStatus::Skipped: return "skipped";
    case StageStatus::Failed: return "failed";
    case StageStatus::NotSelected: return "not-selected";
  }
  return "";
}

struct StageRecord {
  std::string stage;
  std::string input_digest;
  std::string output_digest;
  StageStatus status = StageStatus::NotSelected;
  std::string started_at;
  std::string finished_at;
  std::string message;
};

struct RunSummary {
  std::vector<StageRecord> stages;

  const StageRecord& at(std::string_view stage) const {
    for (const auto& r : stages)
      if (r.stage == stage) return r;
    throw Error(ErrorKind::InvalidParameter, "no stage " + std::string(stage));
  }
};

struct RunOptions {
  bool force = false;
  std::set<std::string> stages;  // empty = all
  std::ostream* log = nullptr;
};

inline std::set<std::string> parse_stage_filter(std::string_view list) {
  std::set<std::string> out;
  for (auto& s : io::split(list, ',')) {
    auto name = io::trim(s);
    if (name.empty()) continue;
    if (std::find(kStages.begin(), kStages.end(), name) == kStages.end())
      throw Error(ErrorKind::ConfigError, "--stages: unknown stage '" + name + "'");
    out.insert(name);
  }
  return out;
}

// --- helpers ------------------------------------------------------------------

namespace detail {

inline std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void copy_files(const fs::path& from, const fs::path& to, const std::vector<std::string>& rels) {
  for (const auto& rel : rels) {
    fs::create_directories((to / rel).parent_path());
    fs::copy_file(from / rel, to / rel, fs::copy_options::overwrite_existing);
  }
}

inline void copy_tree(const fs::path& from, const fs::path& to) { copy_files(from, to, io::list_files(from)); }

// Stage outputs minus the manifest itself.
inline std::string stage_output_digest(const fs::path& dir) {
  Sha256 h;
  for (const auto& rel : io::list_files(dir))
    if (rel != "manifest.json") h.field(rel).field(io::read_file(dir / rel));
  return h.hex();
}

class WorkspaceLock {
 public:
  explicit WorkspaceLock(const fs::path& workspace) : path_(workspace / ".lock") {
    fs::create_directories(workspace);
    fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_EXCL, 0644);
    if (fd_ < 0)
      throw Error(ErrorKind::IoError, "workspace " + workspace.string() + " is locked (" + path_.string() +
                                          "); remove it if no run is active");
    const auto pid = std::to_string(::getpid()) + "\n";
    if (::write(fd_, pid.data(), pid.size()) < 0) { /* best effort */ }
  }
  ~WorkspaceLock() {
    ::close(fd_);
    std::error_code ec;
    fs::remove(path_, ec);
  }
  WorkspaceLock(const WorkspaceLock&) = delete;
  WorkspaceLock& operator=(const WorkspaceLock&) = delete;

 private:
  fs::path path_;
  int fd_ = -1;
};

// Runs fn(i) for i in [0, n) on up to `jobs` threads; rethrows the first
// failure in index order.
inline void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace detail

// --- corpus preparation -----------------------------------------------------

struct CompileResult {
  std::vector<std::string> compilable;
  std::vector<CompileDiagnostic> rejected;  // one entry per rejected file, full diagnostics text
};

// nullopt = accepted, otherwise the diagnostics.
inline std::optional<std::string> compile_file(const ToolAdapter& compiler, const fs::path& file,
                                               const fs::path& scratch) {
  fs::create_directories(scratch);
  const std::string cmd = expand_template(compiler.command_template, {{"input", fs::absolute(file).string()},
                                                                      {"output", fs::absolute(scratch).string()},
                                                                      {"workdir", fs::absolute(scratch).string()},
                                                                      {"self", self_executable()}});
  auto r = run_shell(cmd, compiler.timeout_seconds, scratch / "stdout.log", scratch / "stderr.log");
  if (r.timed_out) throw Error(ErrorKind::Timeout, "compiler exceeded timeout on " + file.string());
  if (r.exit_code == 0) return std::nullopt;
  if (r.exit_code == 1) return r.stderr_text.empty() ? r.stdout_text : r.stderr_text;
  throw Error(ErrorKind::AdapterFailure,
              "compiler exited with " + std::to_string(r.exit_code) + " on " + file.string() + ": " + r.stderr_text);
}

// Every file is attempted once. A null compiler accepts everything.
inline CompileResult prepare_corpus_compile(const fs::path& root, const std::vector<std::string>& files,
                                            const ToolAdapter* compiler, const fs::path& scratch, unsigned jobs = 1) {
  CompileResult out;
  if (!compiler) {
    out.compilable = files;
    return out;
  }
  std::vector<std::optional<std::string>> verdicts(files.size());
  detail::parallel_for(files.size(), jobs, [&](std::size_t i) {
    verdicts[i] = compile_file(*compiler, root / files[i], scratch / std::to_string(i));
  });
  std::error_code ec;
  fs::remove_all(scratch, ec);
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (verdicts[i])
      out.rejected.push_back({files[i], *verdicts[i]});
    else
      out.compilable.push_back(files[i]);
  }
  return out;
}

// Files carrying at least one in-profile violation, in input order.
inline std::vector<std::string> prepare_corpus_violating(const std::vector<std::string>& compilable,
                                                         const ViolationReport& pre, const RuleProfile& profile) {
  std::set<std::string> hit;
  for (const auto& v : pre.entries)
    if (in_scope(profile, v.rule)) hit.insert(v.file_id);
  std::vector<std::string> out;
  for (const auto& f : compilable)
    if (hit.count(f)) out.push_back(f);
  return out;
}

// Rules the repairer is run for, one pass each, in profile order. Rules with
// no pre-repair violation are left out since their pass has nothing to do.
inline std::vector<RuleId> repair_passes(const ViolationReport& pre, const RuleProfile& profile) {
  std::set<RuleId> present;
  for (const auto& v : pre.entries)
    if (in_scope(profile, v.rule)) present.insert(v.rule);
  if (profile.rules.empty()) return {present.begin(), present.end()};
  std::vector<RuleId> out;
  for (const auto& r : profile.rules)
    if (present.count(r)) out.push_back(r);
  return out;
}

// --- the pipeline ----------------------------------------------------------------

class Pipeline {
 public:
  Pipeline(PipelineConfig config, RunOptions options) : c_(std::move(config)), opt_(std::move(options)) {
    w_ = fs::absolute(c_.workspace_dir);
    profile_ = profile_by_name(c_.profile);
  }

  RunSummary run() {
    if (!fs::is_directory(c_.corpus_dir))
      throw Error(ErrorKind::ConfigError, "corpus_dir: " + c_.corpus_dir.string() + " is not a directory");
    detail::WorkspaceLock lock(w_);
    RunSummary summary;
    for (auto name : kStages) summary.stages.push_back(run_stage(std::string(name)));
    return summary;
  }

 private:
  using Inputs = std::vector<std::pair<std::string, fs::path>>;

  struct StageDef {
    nlohmann::json config;
    Inputs inputs;
    bool skip = false;  // an unbound adapter role
    std::function<void(const fs::path&)> body;
  };

  fs::path dir(std::string_view stage) const { return w_ / std::string(stage); }

  AdapterOptions adapter_options() const { return {c_.end_line_fallback}; }

  nlohmann::json analyzer_config() const {
    return {{"analyzer", adapter_json(c_, "analyzer")},
            {"format", c_.analyzer_format},
            {"report", c_.analyzer_report},
            {"end_line_fallback", c_.end_line_fallback}};
  }

  ViolationReport run_analyzer(const fs::path& input, const fs::path& raw, ReportState state) const {
    auto adapter = *c_.adapter("analyzer");
    adapter.expected_artifacts.push_back(c_.analyzer_report);
    run_tool_adapter(adapter, input, raw);
    return parse_report(io::read_file(raw / c_.analyzer_report), c_.analyzer_format, state, adapter_options());
  }

  StageDef define(const std::string& name) {
    const fs::path original = dir("analyze_pre") / "original";
    const fs::path repaired = dir("repair") / "repaired";
    const fs::path pre_report = dir("analyze_pre") / "report.csv";
    const fs::path post_report = dir("analyze_post") / "report.csv";
    StageDef d;

    if (name == "prepare") {
      d.config = {{"compiler", adapter_json(c_, "compiler")}};
      d.inputs = {{"corpus", c_.corpus_dir}};
      d.body = [this](const fs::path& out) {
        const auto files = io::list_files(c_.corpus_dir);
        auto result = prepare_corpus_compile(c_.corpus_dir, files, c_.adapter("compiler"), out / ".scratch", c_.jobs);
        detail::copy_files(c_.corpus_dir, out / "compilable", result.compilable);
        std::vector<csv::Row> rows;
        for (const auto& r : result.rejected) {
          auto lines = io::split_lines(r.diagnostic);
          rows.push_back({r.file_id, lines.empty() ? std::string{} : lines.front()});
          io::write_file(out / "rejected_logs" / (r.file_id + ".log"), r.diagnostic);
        }
        io::write_file(out / "rejected.csv", csv::write({"file", "diagnostic"}, rows));
      };
    } else if (name == "analyze_pre") {
      d.config = analyzer_config();
      d.config["profile"] = c_.profile;
      d.inputs = {{"compilable", dir("prepare") / "compilable"}};
      d.body = [this](const fs::path& out) {
        const auto input = dir("prepare") / "compilable";
        const auto files = io::list_files(input);
        const auto all = run_analyzer(input, out / "raw", ReportState::PreRepair);
        const auto violating = prepare_corpus_violating(files, all, profile_);
        const std::set<std::string> keep(violating.begin(), violating.end());
        ViolationReport report = all;
        std::erase_if(report.entries, [&](const Violation& v) { return !keep.count(v.file_id); });
        detail::copy_files(input, out / "original", violating);
        io::write_file(out / "report.csv", serialize_report(report));
        std::string list;
        for (const auto& f : violating) list += f + "\n";
        io::write_file(out / "violating.txt", list);
      };
    } else if (name == "repair") {
      d.config = {{"repairer", adapter_json(c_, "repairer")}, {"profile", c_.profile}};
      d.inputs = {{"original", original}, {"pre_report", pre_report}};
      d.body = [this, original, pre_report](const fs::path& out) {
        const auto& repairer = *c_.adapter("repairer");
        const fs::path final_dir = out / "repaired";
        if (repairer.command_template.find("{rule}") == std::string::npos) {
          run_tool_adapter(repairer, original, final_dir);
          return;
        }
        const auto pre = load_report(pre_report, ReportState::PreRepair);
        fs::path current = original;
        std::size_t i = 0;
        for (const auto& rule : repair_passes(pre, profile_)) {
          char prefix[8];
          std::snprintf(prefix, sizeof prefix, "%02zu_", ++i);
          const fs::path pass = out / ".passes" / (prefix + rule.str());
          run_tool_adapter(repairer, current, pass, {{{"rule", rule.str()}}, out / ".logs", prefix + rule.str()});
          current = pass;
        }
        detail::copy_tree(current, final_dir);
        fs::create_directories(final_dir);
      };
    } else if (name == "analyze_post") {
      d.config = analyzer_config();
      d.inputs = {{"repaired", repaired}};
      d.body = [this, repaired](const fs::path& out) {
        const auto report = run_analyzer(repaired, out / "raw", ReportState::PostRepair);
        io::write_file(out / "report.csv", serialize_report(report));
      };
    } else if (name == "fixrate") {
      d.config = {{"profile", c_.profile}};
      d.inputs = {{"pre_report", pre_report}, {"post_report", post_report}};
      d.body = [this, pre_report, post_report](const fs::path& out) {
        write_fixrate_outputs(load_report(pre_report, ReportState::PreRepair),
                              load_report(post_report, ReportState::PostRepair), profile_, out);
      };
    } else if (name == "newviol") {
      d.config = {{"normalization", c_.normalization == LineNormalization::Exact ? "exact" : "loose"}};
      d.inputs = {{"pre_report", pre_report}, {"post_report", post_report}, {"original", original}, {"repaired", repaired}};
      d.body = [this, pre_report, post_report, original, repaired](const fs::path& out) {
        write_newviol_outputs(load_report(pre_report, ReportState::PreRepair),
                              load_report(post_report, ReportState::PostRepair), load_sources(original, repaired),
                              c_.normalization, out);
      };
    } else if (name == "sample") {
      d.config = {{"confidence", c_.sampling.confidence},
                  {"margin", c_.sampling.margin},
                  {"proportion", c_.sampling.proportion},
                  {"precision_threshold", c_.sampling.precision_threshold},
                  {"seed", c_.seed}};
      d.inputs = {{"new_violations", dir("newviol") / "new_violations.csv"}, {"original", original}, {"repaired", repaired}};
      if (c_.sampling.labels) d.inputs.emplace_back("labels", *c_.sampling.labels);
      d.body = [this, original, repaired](const fs::path& out) {
        SamplePlan plan;
        plan.confidence = c_.sampling.confidence;
        plan.margin = c_.sampling.margin;
        plan.proportion = c_.sampling.proportion;
        write_sample_outputs(verdicts_from_csv(io::read_file(dir("newviol") / "new_violations.csv")),
                             load_sources(original, repaired), plan, c_.seed, out / "sheet.csv", out / "sample.json");
        if (c_.sampling.labels) {
          const auto labels = ingest_labels(io::read_file(*c_.sampling.labels));
          io::write_file(out / "precision.json", dump_json(precision_json(labels, c_.sampling.precision_threshold)));
        }
      };
    } else if (name == "semantic") {
      d.skip = !c_.adapter("test_runner");
      d.config = {{"test_runner", adapter_json(c_, "test_runner")}, {"compiler", adapter_json(c_, "compiler")}};
      d.inputs = {{"original", original}, {"repaired", repaired}};
      if (c_.patterns) d.inputs.emplace_back("patterns", *c_.patterns);
      d.body = [this, original, repaired](const fs::path& out) {
        const auto tables = load_patterns(c_);
        auto runner = *c_.adapter("test_runner");
        runner.expected_artifacts.push_back("results.csv");
        run_tool_adapter(runner, original, out / "runs" / "original");
        run_tool_adapter(runner, repaired, out / "runs" / "repaired");
        const auto compiled = prepare_corpus_compile(repaired, io::list_files(repaired), c_.adapter("compiler"),
                                                     out / ".scratch", c_.jobs);
        for (const auto& r : compiled.rejected) io::write_file(out / "compile_log" / (r.file_id + ".log"), r.diagnostic);
        write_semantic_outputs(ingest_test_results(io::read_file(out / "runs" / "original" / "results.csv")),
                               ingest_test_results(io::read_file(out / "runs" / "repaired" / "results.csv")),
                               read_compile_logs(out / "compile_log"), tables, out);
      };
    } else if (name == "metrics") {
      d.skip = !c_.adapter("metric_extractor");
      d.config = {{"metric_extractor", adapter_json(c_, "metric_extractor")}};
      d.inputs = {{"original", original}, {"repaired", repaired}};
      d.body = [this, original, repaired](const fs::path& out) {
        auto extractor = *c_.adapter("metric_extractor");
        extractor.expected_artifacts.push_back("class_metrics.csv");
        run_tool_adapter(extractor, original, out / "pre");
        run_tool_adapter(extractor, repaired, out / "post");
        write_metrics_outputs(parse_class_metrics(io::read_file(out / "pre" / "class_metrics.csv")),
                              parse_class_metrics(io::read_file(out / "post" / "class_metrics.csv")), out);
      };
    } else if (name == "report") {
      d.config = nlohmann::json::object();
      for (auto s : {"fixrate", "newviol", "sample", "semantic", "metrics"}) d.inputs.emplace_back(s, dir(s));
      d.body = [this](const fs::path& out) { emit_reports(w_, out); };
    }
    return d;
  }

  std::string input_digest(const std::string& name, const StageDef& d) const {
    Sha256 h;
    h.field(name).field(d.config.dump());
    for (const auto& [label, path] : d.inputs) {
      h.field(label);
      // whole upstream stage dirs carry a manifest with timestamps
      const bool stage_dir = path.parent_path() == w_;
      h.field(stage_dir ? detail::stage_output_digest(path) : tree_digest(path));
      if (stage_dir) h.field(fs::exists(path / "manifest.json") ? read_status(path) : "absent");
    }
    return h.hex();
  }

  static std::string read_status(const fs::path& stage_dir) {
    auto j = nlohmann::json::parse(io::read_file(stage_dir / "manifest.json"), nullptr, false);
    return j.is_discarded() ? "" : j.value("status", "");
  }

  void check_inputs(const std::string& name, const StageDef& d) const {
    for (const auto& [label, path] : d.inputs) {
      if (path.parent_path() == w_) continue;  // report: absent sections become "skipped"
      if (!fs::exists(path))
        throw StageError(name, ErrorKind::MissingStageOutput,
                         label + " (" + path.string() + ") is missing; run the upstream stages first");
    }
  }

  void write_manifest(const fs::path& d, const StageRecord& r) const {
    nlohmann::json j{{"stage", r.stage},
                     {"status", r.status == StageStatus::Failed    ? "failed"
                                : r.status == StageStatus::Skipped ? "skipped"
                                                                   : "ok"},
                     {"input_digest", r.input_digest},
                     {"output_digest", r.output_digest},
                     {"started_at", r.started_at},
                     {"finished_at", r.finished_at}};
    if (!r.message.empty()) j["message"] = r.message;
    io::write_file(d / "manifest.json", dump_json(j));
  }

  void say(const StageRecord& r) const {
    if (opt_.log) *opt_.log << r.stage << ": " << to_string(r.status) << (r.message.empty() ? "" : " (" + r.message + ")")
                            << "\n";
  }

  StageRecord run_stage(const std::string& name) {
    StageRecord rec;
    rec.stage = name;
    if (!opt_.stages.empty() && !opt_.stages.count(name)) {
      rec.status = StageStatus::NotSelected;
      return rec;
    }
    const auto d = define(name);
    const fs::path out = dir(name);
    check_inputs(name, d);
    rec.input_digest = input_digest(name, d);

    if (!opt_.force && fs::exists(out / "manifest.json")) {
      auto prev = nlohmann::json::parse(io::read_file(out / "manifest.json"), nullptr, false);
      if (!prev.is_discarded() && prev.value("input_digest", "") == rec.input_digest &&
          (prev.value("status", "") == "ok" || prev.value("status", "") == "skipped")) {
        rec.status = StageStatus::Cached;
        rec.output_digest = prev.value("output_digest", "");
        rec.started_at = prev.value("started_at", "");
        rec.finished_at = prev.value("finished_at", "");
        say(rec);
        return rec;
      }
    }

    std::error_code ec;
    fs::remove_all(out, ec);
    fs::create_directories(out);
    rec.started_at = detail::utc_now();
    if (d.skip) {
      rec.status = StageStatus::Skipped;
      rec.message = "adapter role is skipped";
    } else {
      try {
        d.body(out);
        rec.status = StageStatus::Ran;
      } catch (const Error& e) {
        rec.status = StageStatus::Failed;
        rec.message = e.what();
        rec.finished_at = detail::utc_now();
        write_manifest(out, rec);
        say(rec);
        throw StageError(name, e.kind(), e.what());
      } catch (const std::exception& e) {
        rec.status = StageStatus::Failed;
        rec.message = e.what();
        rec.finished_at = detail::utc_now();
        write_manifest(out, rec);
        say(rec);
        throw StageError(name, ErrorKind::IoError, e.what());
      }
    }
    rec.output_digest = detail::stage_output_digest(out);
    rec.finished_at = detail::utc_now();
    write_manifest(out, rec);
    say(rec);
    return rec;
  }

  PipelineConfig c_;
  RunOptions opt_;
  fs::path w_;
  RuleProfile profile_;
};

inline RunSummary run_pipeline(const PipelineConfig& config, const RunOptions& options = {}) {
  return Pipeline(config, options).run();
}

}  // namespace repairlens
