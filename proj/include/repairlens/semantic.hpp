#pragma once

// Behavior preservation: tests that pass on the original code are re-run on the
// repaired code, regressions are classified by failure kind, and compile
// diagnostics of files the repair broke are bucketed.

#include <algorithm>
#include <array>
#include <cctype>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "repairlens/csv.hpp"
#include "repairlens/error.hpp"
#include "repairlens/io.hpp"

namespace repairlens {

enum class TestStatus { Pass, Fail, Skip };

constexpr std::string_view to_string(TestStatus s) {
  switch (s) {
    case TestStatus::Pass: return "PASS";
    case TestStatus::Fail: return "FAIL";
    case TestStatus::Skip: return "SKIP";
  }
  return "";
}

struct TestOutcome {
  std::string test_id;
  std::optional<std::string> target_file;
  TestStatus status = TestStatus::Pass;
  std::optional<std::string> failure_kind_raw;  // present iff status is Fail
};

enum class FailureClass { IllegalAccess, NoClassDef, Assertion, SimulationArtifact, Other };

inline constexpr std::array<FailureClass, 5> kFailureClasses{FailureClass::IllegalAccess, FailureClass::NoClassDef,
                                                             FailureClass::Assertion, FailureClass::SimulationArtifact,
                                                             FailureClass::Other};

constexpr std::string_view to_string(FailureClass c) {
  switch (c) {
    case FailureClass::IllegalAccess: return "IllegalAccess";
    case FailureClass::NoClassDef: return "NoClassDef";
    case FailureClass::Assertion: return "Assertion";
    case FailureClass::SimulationArtifact: return "SimulationArtifact";
    case FailureClass::Other: return "Other";
  }
  return "";
}

enum class CompileErrorClass {
  CannotFindSymbol,
  NotInitialized,
  AssignToFinal,
  NotAStatement,
  ExceptionNeverThrown,
  IllegalModifierCombo,
  ParentPrivateAccess,
  Other,
};

inline constexpr std::array<CompileErrorClass, 8> kCompileErrorClasses{
    CompileErrorClass::CannotFindSymbol,     CompileErrorClass::NotInitialized,
    CompileErrorClass::AssignToFinal,        CompileErrorClass::NotAStatement,
    CompileErrorClass::ExceptionNeverThrown, CompileErrorClass::IllegalModifierCombo,
    CompileErrorClass::ParentPrivateAccess,  CompileErrorClass::Other};

constexpr std::string_view to_string(CompileErrorClass c) {
  switch (c) {
    case CompileErrorClass::CannotFindSymbol: return "CannotFindSymbol";
    case CompileErrorClass::NotInitialized: return "NotInitialized";
    case CompileErrorClass::AssignToFinal: return "AssignToFinal";
    case CompileErrorClass::NotAStatement: return "NotAStatement";
    case CompileErrorClass::ExceptionNeverThrown: return "ExceptionNeverThrown";
    case CompileErrorClass::IllegalModifierCombo: return "IllegalModifierCombo";
    case CompileErrorClass::ParentPrivateAccess: return "ParentPrivateAccess";
    case CompileErrorClass::Other: return "Other";
  }
  return "";
}

template <class Class>
struct PatternRule {
  Class cls;
  std::string pattern;  // substring; case-insensitive for compile diagnostics
};

// Substring tables, checked top to bottom. The JSON form (see
// data/failure_patterns.json) can replace either table at runtime.
struct PatternTables {
  std::vector<PatternRule<FailureClass>> failures{
      {FailureClass::IllegalAccess, "IllegalAccessError"},
      {FailureClass::NoClassDef, "NoClassDefFoundError"},
      {FailureClass::Assertion, "AssertionError"},
      {FailureClass::Assertion, "AssertionFailedError"},
      {FailureClass::Assertion, "ComparisonFailure"},
      {FailureClass::Assertion, "Expecting exception"},
      {FailureClass::SimulationArtifact, "TooManyResourcesException"},
      {FailureClass::SimulationArtifact, "simulation error"},
  };
  std::vector<PatternRule<CompileErrorClass>> compile_errors{
      {CompileErrorClass::CannotFindSymbol, "cannot find symbol"},
      {CompileErrorClass::NotInitialized, "might not have been initialized"},
      {CompileErrorClass::AssignToFinal, "cannot assign a value to"},
      {CompileErrorClass::NotAStatement, "not a statement"},
      {CompileErrorClass::ExceptionNeverThrown, "never thrown in"},
      {CompileErrorClass::IllegalModifierCombo, "illegal combination of modifiers"},
      {CompileErrorClass::ParentPrivateAccess, "has private access"},
  };

  static PatternTables from_json(const nlohmann::json& doc) {
    PatternTables t;
    auto lookup = [](std::string_view name, const auto& all) {
      for (auto c : all)
        if (to_string(c) == name) return c;
      throw Error(ErrorKind::ConfigError, "unknown class '" + std::string(name) + "'");
    };
    auto load = [&](const char* key, auto& table, const auto& all) {
      if (!doc.contains(key)) return;
      table.clear();
      for (const auto& entry : doc.at(key)) {
        if (!entry.contains("class") || !entry.contains("pattern"))
          throw Error(ErrorKind::ConfigError, std::string(key) + " entries need 'class' and 'pattern'");
        table.push_back({lookup(entry.at("class").template get<std::string>(), all),
                         entry.at("pattern").template get<std::string>()});
      }
    };
    load("failures", t.failures, kFailureClasses);
    load("compile_errors", t.compile_errors, kCompileErrorClasses);
    return t;
  }
};

inline const PatternTables& default_patterns() {
  static const PatternTables t;
  return t;
}

inline FailureClass classify_failure(const TestOutcome& outcome, const PatternTables& tables = default_patterns()) {
  const std::string raw = outcome.failure_kind_raw.value_or("");
  for (const auto& rule : tables.failures)
    if (raw.find(rule.pattern) != std::string::npos) return rule.cls;
  return FailureClass::Other;
}

inline CompileErrorClass classify_compile_error(std::string_view diagnostic,
                                                const PatternTables& tables = default_patterns()) {
  auto lower = [](std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
  };
  const auto text = lower(diagnostic);
  for (const auto& rule : tables.compile_errors)
    if (text.find(lower(rule.pattern)) != std::string::npos) return rule.cls;
  return CompileErrorClass::Other;
}

// Normalized CSV: test_id,target_file,status,failure_kind
inline std::vector<TestOutcome> ingest_test_results(std::string_view text) {
  auto table = csv::parse(text);
  std::vector<TestOutcome> out;
  if (table.header.empty()) return out;
  auto id = table.column("test_id");
  auto target = table.column("target_file");
  auto status = table.column("status");
  auto kind = table.column("failure_kind");
  if (!id || !status) throw Error(ErrorKind::MalformedInput, "test results need 'test_id' and 'status' columns");

  std::set<std::string> seen;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = "line " + std::to_string(table.row_lines[r]);
    TestOutcome t;
    t.test_id = io::trim(row[*id]);
    if (t.test_id.empty()) throw Error(ErrorKind::MalformedInput, where + ": empty test_id");
    if (!seen.insert(t.test_id).second) throw Error(ErrorKind::MalformedInput, "duplicate test_id '" + t.test_id + "'");
    if (target && !row[*target].empty()) t.target_file = row[*target];

    const auto s = io::upper(io::trim(row[*status]));
    if (s == "PASS" || s == "PASSED") t.status = TestStatus::Pass;
    else if (s == "FAIL" || s == "FAILED" || s == "ERROR") t.status = TestStatus::Fail;
    else if (s == "SKIP" || s == "SKIPPED") t.status = TestStatus::Skip;
    else throw Error(ErrorKind::MalformedInput, where + ": unknown status '" + row[*status] + "'");

    if (t.status == TestStatus::Fail) t.failure_kind_raw = kind ? row[*kind] : std::string{};
    out.push_back(std::move(t));
  }
  std::sort(out.begin(), out.end(), [](const TestOutcome& a, const TestOutcome& b) { return a.test_id < b.test_id; });
  return out;
}

inline std::string test_results_to_csv(const std::vector<TestOutcome>& outcomes) {
  std::vector<csv::Row> rows;
  for (const auto& t : outcomes)
    rows.push_back({t.test_id, t.target_file.value_or(""), std::string(to_string(t.status)),
                    t.failure_kind_raw.value_or("")});
  return csv::write({"test_id", "target_file", "status", "failure_kind"}, rows);
}

inline std::set<std::string> filter_baseline(const std::vector<TestOutcome>& original_run) {
  std::set<std::string> ids;
  for (const auto& t : original_run)
    if (t.status == TestStatus::Pass) ids.insert(t.test_id);
  return ids;
}

struct Regression {
  TestOutcome outcome;  // repaired-run outcome; synthesized when missing
  bool missing_in_repaired_run = false;
};

// Baseline tests whose repaired status is not Pass, in test_id order. A test
// absent from the repaired run is a failure flagged as missing.
inline std::vector<Regression> diff_test_outcomes(const std::set<std::string>& baseline,
                                                  const std::vector<TestOutcome>& repaired_run) {
  std::map<std::string, const TestOutcome*> by_id;
  for (const auto& t : repaired_run) by_id[t.test_id] = &t;
  std::vector<Regression> out;
  for (const auto& id : baseline) {
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      out.push_back({{id, std::nullopt, TestStatus::Fail, std::string("missing from repaired run")}, true});
    } else if (it->second->status != TestStatus::Pass) {
      out.push_back({*it->second, false});
    }
  }
  return out;
}

struct CompileDiagnostic {
  std::string file_id;
  std::string diagnostic;
};

struct SemanticSummary {
  std::size_t executed = 0;
  std::size_t failed = 0;
  double pass_rate = 1.0;
  std::map<FailureClass, std::size_t> failure_histogram;  // simulation artifacts excluded
  std::size_t excluded_simulation_artifacts = 0;
  std::map<CompileErrorClass, std::size_t> compile_error_histogram;  // one per uncompilable file
  std::size_t uncompilable_files = 0;

  std::size_t analyzed_failures() const {
    std::size_t s = 0;
    for (const auto& [_, n] : failure_histogram) s += n;
    return s;
  }

  nlohmann::json to_json() const {
    nlohmann::json fh = nlohmann::json::object(), ch = nlohmann::json::object();
    for (const auto& [c, n] : failure_histogram) fh[std::string(to_string(c))] = n;
    for (const auto& [c, n] : compile_error_histogram) ch[std::string(to_string(c))] = n;
    return {{"executed", executed},
            {"failed", failed},
            {"pass_rate", pass_rate},
            {"analyzed_failures", analyzed_failures()},
            {"excluded_simulation_artifacts", excluded_simulation_artifacts},
            {"failure_histogram", fh},
            {"uncompilable_files", uncompilable_files},
            {"compile_error_histogram", ch}};
  }
};

// Baseline tests skipped in the repaired run count as neither executed nor
// failed.
// Each uncompilable file is bucketed by its first classifiable diagnostic.
inline SemanticSummary summarize_semantic(std::size_t baseline_size, const std::vector<Regression>& regressions,
                                          const std::vector<CompileDiagnostic>& diagnostics,
                                          const PatternTables& tables = default_patterns()) {
  SemanticSummary s;
  std::size_t skipped = 0;
  for (const auto& r : regressions)
    if (!r.missing_in_repaired_run && r.outcome.status == TestStatus::Skip) ++skipped;
  s.executed = baseline_size - skipped;
  s.failed = regressions.size() - skipped;
  s.pass_rate = s.executed ? static_cast<double>(s.executed - s.failed) / static_cast<double>(s.executed) : 1.0;
  for (const auto& r : regressions) {
    if (!r.missing_in_repaired_run && r.outcome.status == TestStatus::Skip) continue;
    // a test whose class vanished cannot load it
    const auto c = r.missing_in_repaired_run ? FailureClass::NoClassDef : classify_failure(r.outcome, tables);
    if (c == FailureClass::SimulationArtifact)
      ++s.excluded_simulation_artifacts;
    else
      ++s.failure_histogram[c];
  }

  std::map<std::string, CompileErrorClass> per_file;
  for (const auto& d : diagnostics) {
    const auto c = classify_compile_error(d.diagnostic, tables);
    auto [it, inserted] = per_file.emplace(d.file_id, c);
    if (!inserted && it->second == CompileErrorClass::Other) it->second = c;
  }
  s.uncompilable_files = per_file.size();
  for (const auto& [_, c] : per_file) ++s.compile_error_histogram[c];
  return s;
}

inline std::string regressions_to_csv(const std::vector<Regression>& regressions, const PatternTables& tables = default_patterns()) {
  std::vector<csv::Row> rows;
  for (const auto& r : regressions) {
    const auto c = r.missing_in_repaired_run ? FailureClass::NoClassDef : classify_failure(r.outcome, tables);
    rows.push_back({r.outcome.test_id, r.outcome.target_file.value_or(""), std::string(to_string(r.outcome.status)),
                    r.outcome.failure_kind_raw.value_or(""), std::string(to_string(c)),
                    r.missing_in_repaired_run ? "true" : "false"});
  }
  return csv::write({"test_id", "target_file", "status", "failure_kind", "failure_class", "missing_in_repaired_run"},
                    rows);
}

inline std::string failure_histogram_csv(const SemanticSummary& s) {
  std::vector<csv::Row> rows;
  for (auto c : kFailureClasses) {
    if (c == FailureClass::SimulationArtifact) {
      rows.push_back({std::string(to_string(c)), std::to_string(s.excluded_simulation_artifacts), "true"});
      continue;
    }
    auto it = s.failure_histogram.find(c);
    rows.push_back({std::string(to_string(c)), std::to_string(it == s.failure_histogram.end() ? 0 : it->second), "false"});
  }
  return csv::write({"failure_class", "count", "excluded"}, rows);
}

inline std::string compile_errors_csv(const std::vector<CompileDiagnostic>& diagnostics,
                                      const PatternTables& tables = default_patterns()) {
  std::vector<csv::Row> rows;
  for (const auto& d : diagnostics)
    rows.push_back({d.file_id, std::string(to_string(classify_compile_error(d.diagnostic, tables))), d.diagnostic});
  return csv::write({"file", "error_class", "diagnostic"}, rows);
}

}  // namespace repairlens
