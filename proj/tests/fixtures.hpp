#pragma once

// Corpus-scale fixtures rebuilt from published aggregate counts. Only the
// totals are given, so where a distribution is needed the layout below picks
// one that reproduces them.

#include <cstddef>
#include <string>
#include <tuple>
#include <vector>

#include "repairlens/metrics.hpp"
#include "repairlens/newviol.hpp"
#include "repairlens/semantic.hpp"
#include "repairlens/violation.hpp"

namespace fixtures {

using namespace repairlens;

struct RuleCount {
  const char* rule;
  std::size_t pre;
  std::size_t fixed;
};

// Per-rule pre/fixed counts for the 21 rules that had violations.
inline const std::vector<RuleCount>& fix_rate_counts() {
  static const std::vector<RuleCount> rows{
      {"S1118", 1684, 1683}, {"S1068", 509, 500}, {"S1854", 288, 286}, {"S1481", 281, 281}, {"S1132", 212, 212},
      {"S1444", 101, 101},   {"S2184", 90, 90},   {"S2142", 85, 85},   {"S2164", 80, 29},   {"S1948", 75, 34},
      {"S2095", 46, 44},     {"S4973", 24, 24},   {"S2057", 14, 14},   {"S2111", 11, 11},   {"S1656", 9, 9},
      {"S2755", 7, 7},       {"S1155", 5, 5},     {"S2116", 4, 4},     {"S1217", 2, 2},     {"S1860", 1, 1},
      {"S2272", 1, 1}};
  return rows;
}

struct ReportPair {
  ViolationReport pre, post;
};

// Violations spread over 400 files; surviving ones reappear with the same key,
// plus a few post-only findings (out of profile, and in-profile at new lines).
inline ReportPair fix_rate_reports() {
  ReportPair r;
  r.pre.state = ReportState::PreRepair;
  r.post.state = ReportState::PostRepair;
  std::size_t serial = 0;
  for (const auto& row : fix_rate_counts()) {
    for (std::size_t i = 0; i < row.pre; ++i, ++serial) {
      Violation v;
      v.file_id = "proj" + std::to_string(serial % 17) + "/src/F" + std::to_string(serial % 400) + ".java";
      v.rule = RuleId::parse(row.rule);
      v.vtype = std::string_view(row.rule) == "S2164" ? ViolationType::Bug : ViolationType::CodeSmell;
      v.severity = Severity::Medium;
      v.start_line = 10 + serial;
      v.end_line = v.start_line + serial % 3;
      v.message = "m";
      r.pre.entries.push_back(v);
      if (i >= row.fixed) r.post.entries.push_back(v);
    }
  }
  for (std::size_t i = 0; i < 40; ++i) {
    Violation v;
    v.file_id = "proj1/src/F" + std::to_string(i) + ".java";
    v.rule = RuleId::parse(i % 2 ? "S106" : "S1118");
    v.start_line = 100000 + i;
    v.end_line = v.start_line;
    r.post.entries.push_back(v);
  }
  r.pre = normalize_report(r.pre);
  r.post = normalize_report(r.post);
  return r;
}

struct NewRule {
  const char* rule;
  ViolationType type;
  Severity severity;
  std::size_t count;
};

// The 21 rules seen among introduced violations, most frequent first. Counts
// are a chosen non-increasing spread: 2088 code smells and 32 bugs.
inline const std::vector<NewRule>& new_violation_rules() {
  using T = ViolationType;
  using S = Severity;
  static const std::vector<NewRule> rules{
      {"S1106", T::CodeSmell, S::Low, 731},   {"S1120", T::CodeSmell, S::Low, 420},
      {"S1213", T::CodeSmell, S::Low, 300},   {"S115", T::CodeSmell, S::High, 200},
      {"S139", T::CodeSmell, S::Low, 120},    {"S1132", T::CodeSmell, S::Low, 80},
      {"S103", T::CodeSmell, S::Medium, 60},  {"S4926", T::CodeSmell, S::Low, 45},
      {"S1109", T::CodeSmell, S::Low, 35},    {"S2164", T::Bug, S::Low, 30},
      {"S864", T::CodeSmell, S::Medium, 25},  {"S108", T::CodeSmell, S::Medium, 20},
      {"S2589", T::CodeSmell, S::Medium, 15}, {"S1172", T::CodeSmell, S::Medium, 10},
      {"S1067", T::CodeSmell, S::High, 8},    {"S1186", T::CodeSmell, S::High, 6},
      {"S1130", T::CodeSmell, S::Low, 5},     {"S1124", T::CodeSmell, S::Low, 4},
      {"S2260", T::CodeSmell, S::Medium, 3},  {"S3077", T::Bug, S::Low, 2},
      {"S4165", T::CodeSmell, S::Medium, 1}};
  return rules;
}

// 2120 New verdicts followed by pre-existing ones that must not be counted.
inline std::vector<NewViolationVerdict> new_violation_verdicts() {
  std::vector<NewViolationVerdict> out;
  std::size_t serial = 0;
  for (const auto& r : new_violation_rules())
    for (std::size_t i = 0; i < r.count; ++i, ++serial) {
      Violation v{"F" + std::to_string(serial % 300) + ".java", RuleId::parse(r.rule), r.type, r.severity,
                  serial + 1, serial + 1, ""};
      out.push_back({v, Verdict::New, std::nullopt});
    }
  for (std::size_t i = 0; i < 500; ++i) {
    Violation v{"F" + std::to_string(i % 300) + ".java", RuleId::parse(i % 2 ? "S1106" : "S3077"),
                i % 2 ? ViolationType::CodeSmell : ViolationType::Bug, Severity::Low, 9000 + i, 9000 + i, ""};
    out.push_back({v, i % 3 ? Verdict::NotNewFragmentFound : Verdict::NotNewKeyMatch, 1});
  }
  return out;
}

// --- behavior preservation ------------------------------------------------------

struct SemanticFixture {
  std::vector<TestOutcome> original, repaired;
  std::vector<CompileDiagnostic> diagnostics;
};

inline std::string test_id(std::size_t i) {
  std::string n = std::to_string(i);
  return "T" + std::string(5 - n.size(), '0') + n;
}

// 8274 generated tests, 62 of which fail on the original code. Of the 8212
// baseline tests, 1962 fail after repair: 1694 illegal access, 189 missing
// class (nine of them simply absent from the repaired run), 78 assertion
// failures and one simulation error.
inline SemanticFixture semantic_fixture() {
  SemanticFixture f;
  for (std::size_t i = 0; i < 8274; ++i) {
    TestOutcome t{test_id(i), "pkg/C" + std::to_string(i % 700) + ".java", TestStatus::Pass, std::nullopt};
    if (i < 62) {
      t.status = TestStatus::Fail;
      t.failure_kind_raw = "java.lang.AssertionError: flaky on original";
    }
    f.original.push_back(t);
  }
  std::size_t next = 62;
  auto fail = [&](std::size_t count, const std::string& raw) {
    for (std::size_t k = 0; k < count; ++k, ++next) {
      f.repaired.push_back({test_id(next), "pkg/C" + std::to_string(next % 700) + ".java", TestStatus::Fail, raw});
    }
  };
  fail(1694, "java.lang.IllegalAccessError: tried to access method pkg.Util.<init>()V from class pkg.Util_ESTest");
  fail(180, "java.lang.NoClassDefFoundError: Could not initialize class pkg.Config");
  next += 9;  // absent from the repaired run
  fail(59, "Expecting exception: NullPointerException");
  fail(15, "java.lang.AssertionError: expected:<3> but was:<4>");
  fail(4, "junit.framework.AssertionFailedError");
  fail(1, "org.evosuite.runtime.TooManyResourcesException: Loop has been executed more times than the allowed 10000");
  for (; next < 8274; ++next) f.repaired.push_back({test_id(next), std::nullopt, TestStatus::Pass, std::nullopt});
  // the tests that already failed originally are irrelevant after repair
  for (std::size_t i = 0; i < 62; ++i) f.repaired.push_back({test_id(i), std::nullopt, TestStatus::Pass, std::nullopt});

  // 61 uncompilable files: 24, 17, 11 and 9 spread over the rarer classes.
  auto files = [&](std::size_t count, const std::string& what) {
    for (std::size_t k = 0; k < count; ++k) {
      const std::string file = "broken/B" + std::to_string(f.diagnostics.size()) + ".java";
      f.diagnostics.push_back({file, file + ":" + std::to_string(10 + k) + ": error: " + what});
    }
  };
  files(24, "cannot find symbol\n  symbol:   variable unusedCount");
  files(17, "variable name might not have been initialized");
  files(11, "cannot assign a value to final variable counter");
  files(3, "not a statement");
  files(2, "exception java.io.IOException is never thrown in body of corresponding try statement");
  files(2, "illegal combination of modifiers: final and volatile");
  files(2, "Parent() has private access in Parent");
  // a second, unclassifiable line for one file must not change its bucket
  f.diagnostics.push_back({"broken/B0.java", "broken/B0.java:99: error: compilation aborted"});
  return f;
}

// Diagnostic phrasings quoted in prose, paired with their expected class.
inline const std::vector<std::pair<std::string, CompileErrorClass>>& quoted_diagnostics() {
  using C = CompileErrorClass;
  static const std::vector<std::pair<std::string, C>> q{
      {"cannot find symbol", C::CannotFindSymbol},
      {"error: cannot find symbol", C::CannotFindSymbol},
      {"Cannot find symbol", C::CannotFindSymbol},
      {"variable might not have been initialized", C::NotInitialized},
      {"variable x might not have been initialized", C::NotInitialized},
      {"Variable might not have been initialized", C::NotInitialized},
      {"cannot assign a value to a final variable", C::AssignToFinal},
      {"Cannot assign a value to final variable", C::AssignToFinal},
      {"not a statement", C::NotAStatement},
      {"Not a statement", C::NotAStatement},
      {"particular exception is never thrown in the body of corresponding try statement", C::ExceptionNeverThrown},
      {"Some exceptions are never thrown in body of corresponding try statement", C::ExceptionNeverThrown},
      {"illegal combination of modifiers", C::IllegalModifierCombo},
      {"Illegal combination of modifiers: final and volatile", C::IllegalModifierCombo},
      {"The parent class has private access", C::ParentPrivateAccess},
      {"Parent() has private access in Parent", C::ParentPrivateAccess},
  };
  return q;
}

// --- structural metrics -----------------------------------------------------------

struct MetricsFixture {
  std::vector<ClassMetricsRow> pre, post;
};

// 400 files, two classes each. The repair adds methods and lines to most files
// (LCOM1, WMC, RFC, LOC up), drops a coupling in some (CBO down), never
// touches the hierarchy (NOC constant) and moves DIT/NPA in a handful.
inline MetricsFixture structural_fixture() {
  MetricsFixture f;
  for (std::size_t i = 0; i < 400; ++i) {
    const std::string file = "p" + std::to_string(i % 9) + "/File" + std::to_string(i) + ".java";
    for (std::size_t c = 0; c < 2; ++c) {
      ClassMetricsRow row{file, c ? "Inner" : "Outer", {}};
      const std::size_t s = i * 2 + c;
      row[Metric::NOC] = c ? 0 : i % 3;
      row[Metric::NPA] = s % 7;
      row[Metric::DIT] = 1 + s % 4;
      row[Metric::LCOM1] = (s * 37) % 200;
      row[Metric::WMC] = 5 + (s * 13) % 60;
      row[Metric::CBO] = 2 + (s * 7) % 25;
      row[Metric::RFC] = 10 + (s * 11) % 90;
      row[Metric::LOC] = 20 + (s * s * 31) % 900 + (s % 5) * (s % 11) * 40;
      f.pre.push_back(row);
      if (c == 0) {
        if (i % 10 < 6) {
          row[Metric::LCOM1] += 1 + i % 5;
          row[Metric::WMC] += 1;
          row[Metric::RFC] += 1;
        } else if (i % 10 == 6) {
          row[Metric::LCOM1] -= std::min<std::uint64_t>(row[Metric::LCOM1], 1);
        }
        if (i % 10 < 7) row[Metric::LOC] += 1 + i % 3;
        if (i % 10 == 7) row[Metric::LOC] -= 2;
        if (i % 6 == 0 && row[Metric::CBO] > 0) row[Metric::CBO] -= 1;
        if (i % 50 == 1) row[Metric::CBO] += 1;
        if (i == 3) row[Metric::DIT] += 2;  // clears the inner class max
        if (i % 50 == 5 && i < 300 && row[Metric::NPA] > 0) row[Metric::NPA] -= 1;
        if (i == 301) row[Metric::NPA] += 1;
      }
      f.post.push_back(row);
    }
  }
  return f;
}

}  // namespace fixtures
