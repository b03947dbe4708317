#pragma once

// Stand-ins for the external Java tools, so the whole pipeline runs without a
// JDK. They understand just enough of the bundled mini-corpus: a handful of
// line-regex analyzer rules, matching rule-by-rule rewrites, a fake compiler,
// comment-declared tests and rough class metrics.

#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "repairlens/csv.hpp"
#include "repairlens/io.hpp"
#include "repairlens/metrics.hpp"
#include "repairlens/violation.hpp"

namespace repairlens::stubs {

namespace fs = std::filesystem;

inline bool is_comment(const std::string& line) {
  const auto t = io::trim(line);
  return t.rfind("//", 0) == 0 || t.rfind("*", 0) == 0 || t.rfind("/*", 0) == 0;
}

inline bool java_file(const std::string& rel) { return rel.size() > 5 && rel.ends_with(".java"); }

// --- analyzer -----------------------------------------------------------------

struct StubRule {
  const char* code;
  ViolationType type;
  Severity severity;
  std::regex pattern;
  const char* message;
};

inline const std::vector<StubRule>& analyzer_rules() {
  static const std::vector<StubRule> rules{
      {"S1481", ViolationType::CodeSmell, Severity::Low, std::regex(R"(^\s*(int|long|String) unused\w*\s*=.*;)"),
       "Remove this unused local variable."},
      {"S1068", ViolationType::CodeSmell, Severity::Medium, std::regex(R"(^\s*private \w+ unused\w*;)"),
       "Remove this unused private field."},
      {"S1132", ViolationType::CodeSmell, Severity::Low, std::regex(R"(\w\.equals\("[^"]*"\))"),
       "Move the string literal on the left side of this comparison."},
      {"S1444", ViolationType::CodeSmell, Severity::Medium, std::regex(R"(^\s*public static (?!final)\w+ \w+\s*[=;])"),
       "Make this public static field final."},
      {"S2184", ViolationType::Bug, Severity::Medium, std::regex(R"((float|double) \w+ = \d+ / \d+;)"),
       "Cast one of the operands of this division."},
      {"S2164", ViolationType::Bug, Severity::Low, std::regex(R"(float \w+ = \d+f / \d+;)"),
       "Use a double for this arithmetic."},
      {"S1186", ViolationType::CodeSmell, Severity::High, std::regex(R"(\)\s*\{\s*\})"),
       "Add a nested comment explaining why this method is empty."},
      {"S106", ViolationType::CodeSmell, Severity::Medium, std::regex(R"(System\.out\.print)"),
       "Replace this use of System.out by a logger."},
  };
  return rules;
}

inline const std::regex& class_decl() {
  static const std::regex r(R"(^\s*(public\s+)?(final\s+)?class (\w+))");
  return r;
}

inline bool utility_class_name(const std::string& name) {
  return name.rfind("Util", 0) == 0 || name.ends_with("Util") || name.ends_with("Utils");
}

inline std::vector<Violation> analyze_file(const std::string& file_id, const std::vector<std::string>& lines) {
  std::vector<Violation> out;
  const std::string text = [&] {
    std::string t;
    for (const auto& l : lines) t += l + "\n";
    return t;
  }();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& line = lines[i];
    if (is_comment(line)) continue;
    std::smatch m;
    if (std::regex_search(line, m, class_decl()) && utility_class_name(m[3]) &&
        text.find("private " + m[3].str() + "(") == std::string::npos)
      out.push_back({file_id, RuleId::parse("S1118"), ViolationType::CodeSmell, Severity::Medium, i + 1, i + 1,
                     "Add a private constructor to hide the implicit public one."});
    for (const auto& r : analyzer_rules())
      if (std::regex_search(line, r.pattern))
        out.push_back({file_id, RuleId::parse(r.code), r.type, r.severity, i + 1, i + 1, r.message});
  }
  return out;
}

// Writes report.csv in the native format.
inline void analyze(const fs::path& input, const fs::path& output) {
  ViolationReport report;
  for (const auto& rel : io::list_files(input))
    if (java_file(rel)) {
      auto found = analyze_file(rel, io::split_lines(io::read_file(input / rel)));
      report.entries.insert(report.entries.end(), found.begin(), found.end());
    }
  io::write_file(output / "report.csv", serialize_report(normalize_report(std::move(report))));
}

// --- repairer -----------------------------------------------------------------

inline std::vector<std::string> repair_lines(std::vector<std::string> lines, const std::string& rule) {
  std::vector<std::string> out;
  const std::string text = [&] {
    std::string t;
    for (const auto& l : lines) t += l + "\n";
    return t;
  }();
  static const std::regex unused(R"(^\s*(int|long|String) unused\w*\s*=.*;)");
  static const std::regex equals_lit(R"((\w+)\.equals\(("[^"]*")\))");
  static const std::regex pub_static(R"(public static (?!final))");
  static const std::regex int_div(R"(float (\w+) = (\d+) / (\d+);)");
  for (const auto& line : lines) {
    if (is_comment(line)) {
      out.push_back(line);
      continue;
    }
    std::smatch m;
    if (rule == "S1118" && std::regex_search(line, m, class_decl()) && utility_class_name(m[3]) &&
        text.find("private " + m[3].str() + "(") == std::string::npos) {
      out.push_back(line);
      out.push_back("    private " + m[3].str() + "() {}");
    } else if (rule == "S1481" && std::regex_search(line, unused)) {
      continue;
    } else if (rule == "S1132") {
      out.push_back(std::regex_replace(line, equals_lit, "$2.equals($1)"));
    } else if (rule == "S1444") {
      out.push_back(std::regex_replace(line, pub_static, "public static final "));
    } else if (rule == "S2184") {
      out.push_back(std::regex_replace(line, int_div, "float $1 = $2f / $3;"));
    } else {
      out.push_back(line);
    }
  }
  return out;
}

inline const std::vector<std::string>& repair_rules() {
  static const std::vector<std::string> rules{"S1118", "S1481", "S1132", "S1444", "S2184"};
  return rules;
}

// Copies the tree, applying `rule` (or every known rule, in profile order).
inline void repair(const fs::path& input, const fs::path& output, const std::string& rule) {
  for (const auto& rel : io::list_files(input)) {
    const std::string text = io::read_file(input / rel);
    if (!java_file(rel)) {
      io::write_file(output / rel, text);
      continue;
    }
    auto lines = io::split_lines(text);
    if (rule.empty())
      for (const auto& r : repair_rules()) lines = repair_lines(std::move(lines), r);
    else
      lines = repair_lines(std::move(lines), rule);
    std::string out;
    for (const auto& l : lines) out += l + "\n";
    io::write_file(output / rel, out);
  }
}

// --- compiler -----------------------------------------------------------------

// javac-shaped diagnostics; empty when the file "compiles".
inline std::vector<std::string> compile_errors(const std::string& name, const std::vector<std::string>& lines) {
  std::vector<std::string> errors;
  static const std::regex marker(R"(//! error: (.*)$)");
  static const std::regex uninit_final(R"(static final \w+ (\w+);)");
  static const std::regex final_decl(R"(\bfinal \w+ (\w+)\s*[=;])");
  static const std::regex local_decl(R"(^\s*((private|protected|public)\s+)?(static\s+)?(int|long|String) (unused\w*)\s*[=;])");
  static const std::regex unused_ref(R"(\b(unused\w*)\b)");
  auto err = [&](std::size_t i, const std::string& msg) {
    errors.push_back(name + ":" + std::to_string(i + 1) + ": error: " + msg);
  };

  std::set<std::string> finals, locals;
  for (const auto& line : lines) {
    std::smatch m;
    if (is_comment(line)) continue;
    if (std::regex_search(line, m, final_decl)) finals.insert(m[1]);
    if (std::regex_search(line, m, local_decl)) locals.insert(m[5]);
  }
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& line = lines[i];
    std::smatch m;
    if (std::regex_search(line, m, marker)) err(i, m[1]);
    if (is_comment(line)) continue;
    if (std::regex_search(line, m, uninit_final)) err(i, "variable " + m[1].str() + " might not have been initialized");
    for (const auto& f : finals)
      if (std::regex_search(line, std::regex("^\\s*(this\\.)?" + f + "\\s*=[^=]")))
        err(i, "cannot assign a value to final variable " + f);
    for (auto it = std::sregex_iterator(line.begin(), line.end(), unused_ref); it != std::sregex_iterator(); ++it)
      if (!locals.count((*it)[1])) {
        err(i, "cannot find symbol\n  symbol:   variable " + (*it)[1].str());
        break;
      }
  }
  return errors;
}

// --- test runner --------------------------------------------------------------

// Tests are declared in comments:
//   // @test <id> construct <Class>   fails if the class constructor is private
//   // @test <id> expect <token>      fails if no code line contains the token
// A file that does not compile fails all of its tests with NoClassDefFoundError.
inline void run_tests(const fs::path& input, const fs::path& output) {
  static const std::regex decl(R"(//\s*@test\s+(\S+)\s+(construct|expect)\s+(.+)$)");
  std::vector<csv::Row> rows;
  for (const auto& rel : io::list_files(input)) {
    if (!java_file(rel)) continue;
    const auto lines = io::split_lines(io::read_file(input / rel));
    const bool compiles = compile_errors(rel, lines).empty();
    std::string code;
    for (const auto& l : lines)
      if (!is_comment(l)) code += l + "\n";
    for (const auto& line : lines) {
      std::smatch m;
      if (!std::regex_search(line, m, decl)) continue;
      const std::string id = rel + "#" + m[1].str();
      const std::string arg = io::trim(m[3].str());
      std::string failure;
      if (!compiles)
        failure = "java.lang.NoClassDefFoundError: Could not initialize class " + fs::path(rel).stem().string();
      else if (m[2] == "construct" && code.find("private " + arg + "(") != std::string::npos)
        failure = "java.lang.IllegalAccessError: tried to access method " + arg + ".<init>()V";
      else if (m[2] == "expect" && code.find(arg) == std::string::npos)
        failure = "java.lang.AssertionError: expected " + arg;
      rows.push_back({id, rel, failure.empty() ? "PASS" : "FAIL", failure});
    }
  }
  io::write_file(output / "results.csv", csv::write({"test_id", "target_file", "status", "failure_kind"}, rows));
}

// --- metric extractor ---------------------------------------------------------

inline std::vector<ClassMetricsRow> class_metrics(const std::string& file_id, const std::vector<std::string>& lines) {
  static const std::regex cls(R"(\bclass (\w+)(\s+extends (\w+))?)");
  static const std::regex method(R"(^\s*(public|private|protected|static|final|\s)*[\w<>\[\]]+\s+(\w+)\s*\([^;]*\)\s*\{)");
  static const std::regex ctor(R"(^\s*(public|private|protected)\s+(\w+)\s*\([^;]*\)\s*\{)");
  static const std::regex pub_field(R"(^\s*public\s+(static\s+)?(?!final)[\w<>\[\]]+\s+\w+\s*(=[^;]*)?;)");
  static const std::regex type_ref(R"(\b([A-Z]\w+)\b)");
  static const std::regex call(R"(\.(\w+)\()");

  struct Span {
    std::string name, parent;
    std::size_t begin, end;
  };
  std::vector<Span> spans;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::smatch m;
    if (is_comment(lines[i]) || !std::regex_search(lines[i], m, cls)) continue;
    if (!spans.empty()) spans.back().end = i;
    spans.push_back({m[1], m[3], i, lines.size()});
  }
  std::vector<ClassMetricsRow> out;
  for (const auto& s : spans) {
    ClassMetricsRow row{file_id, s.name, {}};
    std::set<std::string> types, calls;
    std::uint64_t methods = 0;
    for (std::size_t i = s.begin; i < s.end; ++i) {
      const auto& line = lines[i];
      if (is_comment(line) || io::trim(line).empty()) continue;
      ++row[Metric::LOC];
      std::smatch m;
      const bool is_method = std::regex_search(line, m, method) && m[2] != "if" && m[2] != "for" && m[2] != "while" &&
                             m[2] != "switch" && m[2] != "catch";
      if (is_method || std::regex_search(line, ctor)) ++methods;
      if (std::regex_search(line, pub_field)) ++row[Metric::NPA];
      for (auto it = std::sregex_iterator(line.begin(), line.end(), type_ref); it != std::sregex_iterator(); ++it)
        if ((*it)[1] != s.name && (*it)[1] != "String" && (*it)[1] != "System") types.insert((*it)[1]);
      for (auto it = std::sregex_iterator(line.begin(), line.end(), call); it != std::sregex_iterator(); ++it)
        calls.insert((*it)[1]);
    }
    for (const auto& other : spans)
      if (other.parent == s.name) ++row[Metric::NOC];
    row[Metric::DIT] = s.parent.empty() ? 1 : 2;
    row[Metric::WMC] = methods;
    row[Metric::LCOM1] = methods * (methods > 0 ? methods - 1 : 0) / 2;
    row[Metric::CBO] = types.size();
    row[Metric::RFC] = methods + calls.size();
    out.push_back(std::move(row));
  }
  return out;
}

inline void extract_metrics(const fs::path& input, const fs::path& output) {
  std::vector<ClassMetricsRow> rows;
  for (const auto& rel : io::list_files(input))
    if (java_file(rel)) {
      auto r = class_metrics(rel, io::split_lines(io::read_file(input / rel)));
      rows.insert(rows.end(), r.begin(), r.end());
    }
  io::write_file(output / "class_metrics.csv", class_metrics_to_csv(rows));
}

}  // namespace repairlens::stubs
