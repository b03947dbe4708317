// One PASS/FAIL line per acceptance criterion. Exit status is nonzero if any fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "edit_corpus.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "reference_data.hpp"
#include "repairlens/fixrate.hpp"
#include "repairlens/metrics.hpp"
#include "repairlens/newviol.hpp"
#include "repairlens/process.hpp"
#include "repairlens/sampling.hpp"
#include "repairlens/semantic.hpp"
#include "repairlens/stattests.hpp"

using namespace repairlens;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

void ac1(Outcome& o) {
  const auto n = cochran_sample_size(2120, 0.95, 0.05, 0.5);
  constexpr int reps = 1000;
  const auto t = Clock::now();
  volatile std::size_t population = 2120;
  std::size_t sink = 0;
  for (int i = 0; i < reps; ++i) sink += cochran_sample_size(population);
  const double per_call_ms = seconds_since(t) * 1000 / reps;
  o.check(n == 326, "n == 326");
  o.check(sink == 326u * reps, "repeat calls stable");
  o.check(per_call_ms < 1.0, "runtime < 1 ms");
  o.detail << "n=" << n << " per_call_ms=" << per_call_ms;
}

void ac2(Outcome& o) {
  auto r = exact_binomial_test(250, 326, 0.70);
  constexpr double arbitrary_precision = 0.00431015147049214127307;
  o.check(std::abs(r.p_value - 0.0043) <= 0.0005, "p within 0.0005 of 0.0043");
  o.check(std::abs(r.p_value - arbitrary_precision) < 1e-12, "matches arbitrary-precision value");
  double worst = 0;
  for (unsigned n = 1; n <= 20; ++n)
    for (double p0 : {0.05, 0.3, 0.5, 0.7, 0.93})
      for (unsigned k = 0; k <= n; ++k)
        worst = std::max(worst, std::abs(binomial_upper_tail(k, n, p0) - oracle::binomial_tail_enumerated(k, n, p0)));
  o.check(worst <= 1e-12, "enumeration agreement n<=20");
  o.detail << std::setprecision(12) << "p=" << r.p_value << " max_enum_err=" << worst;
}

void ac3(Outcome& o) {
  auto reports = fixtures::fix_rate_reports();
  const auto& profile = sorald30_profile();
  auto out = match_violations(restrict_to_profile(reports.pre, profile), restrict_to_profile(reports.post, profile));
  auto s = summarize_fix_rate(compute_fix_rates(out, profile));
  auto pct = [&](const char* rule) {
    for (const auto& r : s.rows)
      if (r.rule.str() == rule) return render_percent(r.fixed_count, r.pre_count);
    return std::string("missing");
  };
  o.check(s.fixed_total == 3423 && s.pre_total == 3529, "3423/3529");
  o.check(std::abs(s.rate * 100 - 97.0) <= 0.05, "97.0%");
  for (auto r : {"S1481", "S1132", "S1444", "S2184", "S2142"}) o.check(pct(r) == "100.0%", std::string(r) + " 100%");
  o.check(pct("S2164") == "36.3%", "S2164 36.3%");
  o.check(pct("S1948") == "45.3%", "S1948 45.3%");
  o.detail << s.fixed_total << "/" << s.pre_total << "=" << render_percent(s.fixed_total, s.pre_total)
           << " S2164=" << pct("S2164") << " S1948=" << pct("S1948");
}

void ac4(Outcome& o) {
  std::mt19937_64 rng(4);
  static const char* rules[] = {"S1118", "S1481", "S1068", "S2164", "S1132"};
  auto one = [&] {
    Violation v{"F" + std::to_string(rng() % 12) + ".java", RuleId::parse(rules[rng() % 5]), ViolationType::CodeSmell,
                Severity::Medium, 1 + rng() % 20, 0, ""};
    v.end_line = v.start_line + rng() % 3;
    return v;
  };
  double library_seconds = 0;
  int mismatches = 0;
  const auto total = Clock::now();
  for (int round = 0; round < 1000; ++round) {
    ViolationReport pre{ReportState::PreRepair, {}, ""}, post{ReportState::PostRepair, {}, ""};
    const auto a = rng() % 501, b = rng() % 501;
    for (std::size_t i = 0; i < a; ++i) pre.entries.push_back(one());
    for (std::size_t i = 0; i < b; ++i) post.entries.push_back(one());
    // duplicate keys on purpose
    if (a > 1) pre.entries.push_back(pre.entries[rng() % a]);
    if (b > 1 && pre.entries.size() > 0) post.entries.push_back(pre.entries[rng() % pre.entries.size()]);
    pre = normalize_report(pre);
    post = normalize_report(post);
    const auto t = Clock::now();
    auto got = match_violations(pre, post);
    library_seconds += seconds_since(t);
    auto want = oracle::multiset_difference(pre.entries, post.entries);
    mismatches += !(got.fixed == want.fixed && got.surviving == want.surviving);
  }
  o.check(mismatches == 0, "equal to nested-loop oracle");
  o.check(library_seconds < 10, "library runtime < 10 s");
  o.detail << "pairs=1000 mismatches=" << mismatches << " library_s=" << library_seconds
           << " with_oracle_s=" << seconds_since(total);
}

void ac5(Outcome& o) {
  auto corpus = edit_corpus::make_corpus(250, 4242);
  std::size_t verdicts = 0, disagree = 0;
  for (const auto& c : corpus) {
    SourceMap src{{c.pair.file_id, c.pair}};
    auto r = detect_new_violations(c.pre, c.post, src, c.policy);
    if (r.verdicts.size() != c.post.entries.size()) {
      ++disagree;
      continue;
    }
    for (std::size_t i = 0; i < r.verdicts.size(); ++i) {
      const bool got = r.verdicts[i].verdict == Verdict::New;
      ++verdicts;
      disagree += got != oracle::is_new(c.post.entries[i], c.pre.entries, c.pair.original_lines,
                                        c.pair.repaired_lines, c.policy == LineNormalization::Loose);
    }
  }
  o.check(corpus.size() >= 200, ">= 200 cases");
  o.check(disagree == 0, "100% agreement");
  o.detail << "cases=" << corpus.size() << " verdicts=" << verdicts << " disagreements=" << disagree;
}

void ac6(Outcome& o) {
  auto f = fixtures::semantic_fixture();
  auto base = filter_baseline(f.original);
  auto s = summarize_semantic(base.size(), diff_test_outcomes(base, f.repaired), f.diagnostics);
  std::map<FailureClass, std::size_t> want{
      {FailureClass::IllegalAccess, 1694}, {FailureClass::NoClassDef, 189}, {FailureClass::Assertion, 78}};
  std::size_t misses = 0;
  for (const auto& [text, cls] : fixtures::quoted_diagnostics()) misses += classify_compile_error(text) != cls;
  o.check(std::abs(s.pass_rate * 100 - 76.1) <= 0.05, "pass rate 76.1%");
  o.check(s.failure_histogram == want, "failure histogram");
  o.check(s.analyzed_failures() == 1961 && s.excluded_simulation_artifacts == 1, "1961 analyzed, 1 excluded");
  o.check(misses == 0, "quoted diagnostics");
  o.detail << std::fixed << std::setprecision(2) << "pass_rate=" << s.pass_rate * 100 << "% analyzed="
           << s.analyzed_failures() << " excluded=" << s.excluded_simulation_artifacts << " diag_misses=" << misses;
}

void ac7(Outcome& o) {
  auto exact = stats::wilcoxon_signed_rank({"m", {1, 2, 3, 4, 5}});
  auto zero = stats::wilcoxon_signed_rank({"m", {0, 0, 0}});
  o.check(exact.p_value && std::abs(*exact.p_value - 0.0625) <= 1e-12, "[1..5] p = 0.0625");
  o.check(!zero.p_value && !zero.statistic, "all-zero undefined");
  double worst = 0;
  auto rows = refdata::load("wilcoxon_approx_reference.csv");
  for (const auto& row : rows) {
    auto r = stats::wilcoxon_signed_rank({row.id, row.values});
    worst = std::max(worst, r.p_value ? std::abs(*r.p_value - row.b) : 1.0);
  }
  o.check(rows.size() == 20, "20 fixtures");
  o.check(worst <= 1e-3, "approximation within 1e-3");
  o.detail << std::setprecision(6) << "p=" << exact.p_value.value_or(-1) << " fixtures=" << rows.size()
           << " max_err=" << worst;
}

void ac8(Outcome& o) {
  double worst_k2 = 0, worst_p = 0;
  auto rows = refdata::load("normaltest_reference.csv");
  for (const auto& row : rows) {
    auto r = stats::dagostino_pearson(row.values);
    worst_k2 = std::max(worst_k2, std::abs(r.statistic.value_or(1e9) - row.a));
    worst_p = std::max(worst_p, std::abs(r.p_value.value_or(1e9) - row.b));
  }
  auto skewed = refdata::load("normaltest_skewed.csv");
  auto rs = stats::dagostino_pearson(skewed.at(0).values);
  o.check(rows.size() == 10, "10 samples");
  o.check(worst_k2 <= 1e-6 && worst_p <= 1e-6, "K2 and p within 1e-6");
  o.check(rs.p_value && *rs.p_value < 0.05, "skewed p < 0.05");
  o.detail << std::setprecision(3) << "samples=" << rows.size() << " max_k2_err=" << worst_k2
           << " max_p_err=" << worst_p << " skewed_p=" << rs.p_value.value_or(-1);
}

void ac9(Outcome& o) {
  ClassMetricsRow a{"A.java", "A", {}}, b{"A.java", "A.Inner", {}};
  a[Metric::DIT] = 1;
  a[Metric::WMC] = 4;
  b[Metric::DIT] = 3;
  b[Metric::WMC] = 6;
  auto two = aggregate_file_metrics({a, b});
  o.check(two.size() == 1 && two[0][Metric::DIT] == 3 && two[0][Metric::WMC] == 10, "two-class example");

  auto got = aggregate_file_metrics(parse_class_metrics(io::read_file(refdata::path("metrics_classes_5file.csv"))));
  auto t = csv::parse(io::read_file(refdata::path("metrics_files_5file_expected.csv")));
  bool equal = got.size() == t.rows.size() && got.size() == 5;
  for (std::size_t i = 0; equal && i < got.size(); ++i) {
    equal = got[i].file_id == t.rows[i][0];
    for (auto m : kMetrics)
      equal = equal && got[i][m] == std::stoull(t.rows[i][*t.column(column_name(m))]);
  }
  o.check(equal, "5-file fixture");
  o.detail << "DIT=" << (two.empty() ? 0 : two[0][Metric::DIT]) << " WMC=" << (two.empty() ? 0 : two[0][Metric::WMC])
           << " files=" << got.size();
}

void ac10(Outcome& o) {
  const fs::path tmp = fs::temp_directory_path() / "rl_acceptance_ac10";
  fs::remove_all(tmp);
  const fs::path base = fs::path(REPAIRLENS_DATA_DIR) / "minicorpus";
  auto doc = nlohmann::json::parse(io::read_file(base / "config.json"));
  doc["corpus_dir"] = (base / doc["corpus_dir"].get<std::string>()).string();

  auto run = [&](const std::string& name) {
    doc["workspace_dir"] = (tmp / name).string();
    const auto config = tmp / (name + ".json");
    io::write_file(config, doc.dump(2));
    const std::string cmd = shell_quote(REPAIRLENS_CLI) + " run --config " + shell_quote(config.string());
    return run_shell(cmd, 60, tmp / (name + ".out"), tmp / (name + ".err"));
  };
  const auto t = Clock::now();
  auto first = run("ws1");
  const double first_s = seconds_since(t);
  auto second = run("ws2");
  auto again = run("ws1");
  o.check(first.exit_code == 0 && second.exit_code == 0 && again.exit_code == 0, "exit 0");
  o.check(first_s < 30, "first run < 30 s");
  const auto s1 = io::read_file(tmp / "ws1/report/summary.json");
  const auto s2 = io::read_file(tmp / "ws2/report/summary.json");
  o.check(!s1.empty() && s1 == s2, "summary.json identical");
  std::size_t cached = 0;
  for (const auto& line : io::split_lines(again.stdout_text)) cached += line.ends_with("\tcached");
  o.check(cached == 10, "second run all cached");
  o.detail << std::setprecision(3) << "first_run_s=" << first_s << " summary_bytes=" << s1.size()
           << " cached_stages=" << cached;
  if (o.pass) fs::remove_all(tmp);
  else o.detail << " stderr=" << first.stderr_text.substr(0, 200);
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria{
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5},
      {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9}, {"AC10", ac10}};
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      fn(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    failed += !o.pass;
    std::cout << name << " " << (o.pass ? "PASS" : "FAIL") << " " << o.detail.str() << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
