#pragma once

// Normalized static-analysis findings: the record type, the matching key,
// analyzer report adapters and the built-in rule profiles.

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "repairlens/csv.hpp"
#include "repairlens/error.hpp"
#include "repairlens/io.hpp"

namespace repairlens {

class RuleId {
 public:
  RuleId() = default;

  // Accepts "S1118" and analyzer-qualified forms such as "java:S1118".
  static RuleId parse(std::string_view text) {
    auto colon = text.rfind(':');
    if (colon != std::string_view::npos) text.remove_prefix(colon + 1);
    if (!valid(text)) throw Error(ErrorKind::MalformedInput, "invalid rule id '" + std::string(text) + "'");
    RuleId id;
    id.code_ = std::string(text);
    return id;
  }

  static bool valid(std::string_view text) {
    if (text.size() < 2 || text.size() > 6 || text.front() != 'S') return false;
    return std::all_of(text.begin() + 1, text.end(), [](char c) { return c >= '0' && c <= '9'; });
  }

  const std::string& str() const noexcept { return code_; }

  friend auto operator<=>(const RuleId&, const RuleId&) = default;

 private:
  std::string code_;
};

enum class ViolationType { Bug, CodeSmell, Vulnerability };
enum class Severity { High, Medium, Low };

inline constexpr std::array<ViolationType, 3> kViolationTypes{ViolationType::Bug, ViolationType::CodeSmell,
                                                              ViolationType::Vulnerability};
inline constexpr std::array<Severity, 3> kSeverities{Severity::High, Severity::Medium, Severity::Low};

constexpr std::string_view to_string(ViolationType t) {
  switch (t) {
    case ViolationType::Bug: return "BUG";
    case ViolationType::CodeSmell: return "CODE_SMELL";
    case ViolationType::Vulnerability: return "VULNERABILITY";
  }
  return "";
}

constexpr std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::High: return "HIGH";
    case Severity::Medium: return "MEDIUM";
    case Severity::Low: return "LOW";
  }
  return "";
}

inline std::optional<ViolationType> parse_violation_type(std::string_view text) {
  std::string t = io::upper(io::trim(text));
  std::replace(t.begin(), t.end(), ' ', '_');
  if (t == "BUG") return ViolationType::Bug;
  if (t == "CODE_SMELL" || t == "CODESMELL") return ViolationType::CodeSmell;
  if (t == "VULNERABILITY") return ViolationType::Vulnerability;
  return std::nullopt;
}

// Also maps the legacy five-level analyzer severities onto the three levels.
inline std::optional<Severity> parse_severity(std::string_view text) {
  std::string s = io::upper(io::trim(text));
  if (s == "HIGH" || s == "BLOCKER" || s == "CRITICAL") return Severity::High;
  if (s == "MEDIUM" || s == "MAJOR") return Severity::Medium;
  if (s == "LOW" || s == "MINOR" || s == "INFO") return Severity::Low;
  return std::nullopt;
}

struct ViolationKey {
  std::string file_id;
  RuleId rule;
  std::size_t start_line = 0;
  std::size_t end_line = 0;

  friend auto operator<=>(const ViolationKey&, const ViolationKey&) = default;

  friend std::ostream& operator<<(std::ostream& os, const ViolationKey& k) {
    return os << k.file_id << ":" << k.start_line << "-" << k.end_line << " " << k.rule.str();
  }
};

struct Violation {
  std::string file_id;
  RuleId rule;
  ViolationType vtype = ViolationType::CodeSmell;
  Severity severity = Severity::Low;
  std::size_t start_line = 1;
  std::size_t end_line = 1;
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;

  friend std::ostream& operator<<(std::ostream& os, const Violation& v) {
    return os << v.file_id << ":" << v.start_line << "-" << v.end_line << " " << v.rule.str() << " \"" << v.message
              << "\"";
  }
};

inline void check_invariants(const Violation& v) {
  if (v.file_id.empty()) throw Error(ErrorKind::MalformedInput, "violation with empty file");
  if (v.start_line < 1) throw Error(ErrorKind::MalformedInput, v.file_id + ": start_line must be >= 1");
  if (v.end_line < v.start_line)
    throw Error(ErrorKind::MalformedInput, v.file_id + ": end_line " + std::to_string(v.end_line) +
                                               " precedes start_line " + std::to_string(v.start_line));
}

inline ViolationKey key_of(const Violation& v) { return {v.file_id, v.rule, v.start_line, v.end_line}; }

// Total order: the matching key first, remaining fields break ties so that
// sorting is independent of input order.
inline bool violation_less(const Violation& a, const Violation& b) {
  return std::tie(a.file_id, a.rule, a.start_line, a.end_line, a.vtype, a.severity, a.message) <
         std::tie(b.file_id, b.rule, b.start_line, b.end_line, b.vtype, b.severity, b.message);
}

struct RuleProfile {
  std::string name;
  std::vector<RuleId> rules;  // application order

  bool contains(const RuleId& r) const { return std::find(rules.begin(), rules.end(), r) != rules.end(); }

  std::optional<std::size_t> position(const RuleId& r) const {
    auto it = std::find(rules.begin(), rules.end(), r);
    if (it == rules.end()) return std::nullopt;
    return static_cast<std::size_t>(it - rules.begin());
  }
};

inline RuleProfile make_profile(std::string name, const std::vector<std::string_view>& codes) {
  RuleProfile p{std::move(name), {}};
  std::set<std::string_view> seen;
  for (auto c : codes) {
    if (!seen.insert(c).second)
      throw Error(ErrorKind::InvalidParameter, "duplicate rule " + std::string(c) + " in profile " + p.name);
    p.rules.push_back(RuleId::parse(c));
  }
  return p;
}

// The 30 rules the reference repair tool can fix, in its application order.
inline const RuleProfile& sorald30_profile() {
  static const RuleProfile profile = make_profile(
      "sorald-30", {"S1118", "S1068", "S1854", "S1481", "S1132", "S1444", "S2184", "S2142", "S1948", "S2095",
                    "S4973", "S2057", "S2111", "S1656", "S2755", "S1155", "S2116", "S1217", "S2272", "S1860",
                    "S2097", "S3067", "S3984", "S3032", "S4065", "S2167", "S1596", "S2204", "S2225", "S2164"});
  return profile;
}

// Empty rule list: every rule is in scope.
inline const RuleProfile& all_rules_profile() {
  static const RuleProfile profile{"all", {}};
  return profile;
}

inline RuleProfile profile_by_name(std::string_view name) {
  if (name == "sorald-30") return sorald30_profile();
  if (name == "all") return all_rules_profile();
  throw Error(ErrorKind::InvalidParameter, "unknown rule profile '" + std::string(name) + "'");
}

inline bool in_scope(const RuleProfile& profile, const RuleId& rule) {
  return profile.rules.empty() || profile.contains(rule);
}

enum class ReportState { PreRepair, PostRepair };

constexpr std::string_view to_string(ReportState s) {
  return s == ReportState::PreRepair ? "pre-repair" : "post-repair";
}

struct ViolationReport {
  ReportState state = ReportState::PreRepair;
  std::vector<Violation> entries;
  std::string profile_name = "all";

  friend bool operator==(const ViolationReport&, const ViolationReport&) = default;
};

// Forward slashes, no "." segments, ".." resolved, no leading "/" or "./".
inline std::string canonical_path(std::string_view raw) {
  std::string s(raw);
  std::replace(s.begin(), s.end(), '\\', '/');
  std::vector<std::string> parts;
  for (auto& seg : io::split(s, '/')) {
    if (seg.empty() || seg == ".") continue;
    if (seg == ".." && !parts.empty() && parts.back() != "..") {
      parts.pop_back();
      continue;
    }
    parts.push_back(seg);
  }
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.push_back('/');
    out += parts[i];
  }
  return out;
}

inline ViolationReport normalize_report(ViolationReport report) {
  for (auto& v : report.entries) v.file_id = canonical_path(v.file_id);
  std::sort(report.entries.begin(), report.entries.end(), violation_less);
  return report;
}

// ---------------------------------------------------------------------------
// Adapters

struct AdapterOptions {
  // When set, an issue without an end line is treated as a single-line span.
  bool end_line_from_start = false;
};

using ReportAdapter = std::function<std::vector<Violation>(std::string_view, const AdapterOptions&)>;

namespace detail {

inline std::size_t parse_line_number(std::string_view text, std::string_view field, std::size_t row_line) {
  std::string t = io::trim(text);
  std::size_t value = 0;
  if (t.empty() || !std::all_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; }))
    throw Error(ErrorKind::MalformedInput,
                "line " + std::to_string(row_line) + ": " + std::string(field) + " is not a positive integer");
  for (char c : t) value = value * 10 + static_cast<std::size_t>(c - '0');
  return value;
}

inline const std::vector<std::string_view>& native_columns() {
  static const std::vector<std::string_view> cols{"file", "rule", "type", "severity", "start_line", "end_line",
                                                  "message"};
  return cols;
}

inline std::vector<Violation> parse_native_csv(std::string_view text, const AdapterOptions& opts) {
  auto table = csv::parse(text);
  std::vector<Violation> out;
  if (table.header.empty()) return out;

  std::map<std::string_view, std::size_t> idx;
  for (auto col : native_columns()) {
    auto c = table.column(col);
    if (!c && col != "message") throw Error(ErrorKind::MissingRequiredField, "column '" + std::string(col) + "'");
    if (c) idx[col] = *c;
  }

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto line = table.row_lines[r];
    auto cell = [&](std::string_view col) -> std::string {
      auto it = idx.find(col);
      return it == idx.end() ? std::string{} : row[it->second];
    };
    auto require = [&](std::string_view col) {
      std::string v = cell(col);
      if (io::trim(v).empty())
        throw Error(ErrorKind::MissingRequiredField, std::string(col) + " (line " + std::to_string(line) + ")");
      return v;
    };

    Violation v;
    v.file_id = require("file");
    v.rule = RuleId::parse(io::trim(require("rule")));
    auto type = parse_violation_type(require("type"));
    if (!type) throw Error(ErrorKind::MalformedInput, "line " + std::to_string(line) + ": unknown type '" + cell("type") + "'");
    v.vtype = *type;
    auto sev = parse_severity(require("severity"));
    if (!sev)
      throw Error(ErrorKind::MalformedInput, "line " + std::to_string(line) + ": unknown severity '" + cell("severity") + "'");
    v.severity = *sev;
    v.start_line = parse_line_number(require("start_line"), "start_line", line);
    if (io::trim(cell("end_line")).empty()) {
      if (!opts.end_line_from_start)
        throw Error(ErrorKind::MissingRequiredField, "end_line (line " + std::to_string(line) + ")");
      v.end_line = v.start_line;
    } else {
      v.end_line = parse_line_number(cell("end_line"), "end_line", line);
    }
    v.message = cell("message");
    check_invariants(v);
    out.push_back(std::move(v));
  }
  return out;
}

// Analyzer issue-search export: {"issues": [{component, rule, type, severity |
// impacts, textRange{startLine,endLine} | line, message}, ...]}. The field
// mapping is documented in data/adapters/sonarqube-json.md.
inline std::vector<Violation> parse_sonarqube_json(std::string_view text, const AdapterOptions& opts) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::MalformedInput, "JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("issues") || !doc["issues"].is_array())
    throw Error(ErrorKind::MissingRequiredField, "issues");

  std::vector<Violation> out;
  std::size_t index = 0;
  for (const auto& issue : doc["issues"]) {
    const std::string where = "issues[" + std::to_string(index++) + "]";
    auto str_field = [&](const char* name) -> std::string {
      if (!issue.contains(name) || !issue[name].is_string())
        throw Error(ErrorKind::MissingRequiredField, where + "." + name);
      return issue[name].get<std::string>();
    };
    auto line_field = [&](const nlohmann::json& obj, const char* name) -> std::optional<std::size_t> {
      if (!obj.contains(name) || obj[name].is_null()) return std::nullopt;
      if (!obj[name].is_number_integer() || obj[name].get<long long>() < 1)
        throw Error(ErrorKind::MalformedInput, where + "." + name + " is not a positive integer");
      return static_cast<std::size_t>(obj[name].get<long long>());
    };

    Violation v;
    std::string component = str_field("component");
    // "projectKey:path/to/File.java"
    auto colon = component.find(':');
    v.file_id = colon == std::string::npos ? component : component.substr(colon + 1);
    v.rule = RuleId::parse(str_field("rule"));

    auto type = parse_violation_type(str_field("type"));
    if (!type) throw Error(ErrorKind::MalformedInput, where + ".type unrecognized");
    v.vtype = *type;

    std::optional<Severity> sev;
    if (issue.contains("impacts") && issue["impacts"].is_array() && !issue["impacts"].empty()) {
      // multi-quality impacts: keep the highest
      for (const auto& impact : issue["impacts"]) {
        if (!impact.contains("severity") || !impact["severity"].is_string()) continue;
        auto s = parse_severity(impact["severity"].get<std::string>());
        if (s && (!sev || *s < *sev)) sev = s;
      }
    }
    if (!sev) sev = parse_severity(str_field("severity"));
    if (!sev) throw Error(ErrorKind::MalformedInput, where + ".severity unrecognized");
    v.severity = *sev;

    std::optional<std::size_t> start, end;
    if (issue.contains("textRange") && issue["textRange"].is_object()) {
      start = line_field(issue["textRange"], "startLine");
      end = line_field(issue["textRange"], "endLine");
    }
    if (!start) start = line_field(issue, "line");
    if (!start) throw Error(ErrorKind::MissingRequiredField, where + ".textRange.startLine");
    if (!end) {
      if (!opts.end_line_from_start) throw Error(ErrorKind::MissingRequiredField, where + ".textRange.endLine");
      end = start;
    }
    v.start_line = *start;
    v.end_line = *end;
    if (issue.contains("message") && issue["message"].is_string()) v.message = issue["message"].get<std::string>();
    check_invariants(v);
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace detail

class AdapterRegistry {
 public:
  static AdapterRegistry with_builtins() {
    AdapterRegistry r;
    r.add("csv", detail::parse_native_csv);
    r.add("sonarqube-json", detail::parse_sonarqube_json);
    return r;
  }

  void add(std::string name, ReportAdapter adapter) { adapters_[std::move(name)] = std::move(adapter); }

  const ReportAdapter& get(std::string_view name) const {
    auto it = adapters_.find(std::string(name));
    if (it == adapters_.end()) throw Error(ErrorKind::UnknownAdapter, std::string(name));
    return it->second;
  }

  bool contains(std::string_view name) const { return adapters_.count(std::string(name)) != 0; }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& [k, _] : adapters_) out.push_back(k);
    return out;
  }

 private:
  std::map<std::string, ReportAdapter> adapters_;
};

inline const AdapterRegistry& default_adapters() {
  static const AdapterRegistry registry = AdapterRegistry::with_builtins();
  return registry;
}

inline ViolationReport parse_report(std::string_view raw, std::string_view adapter, ReportState state,
                                    const AdapterOptions& opts = {},
                                    const AdapterRegistry& registry = default_adapters()) {
  const auto& fn = registry.get(adapter);
  ViolationReport report;
  report.state = state;
  report.entries = fn(raw, opts);
  return normalize_report(std::move(report));
}

inline std::string serialize_report(const ViolationReport& report) {
  std::vector<csv::Row> rows;
  rows.reserve(report.entries.size());
  for (const auto& v : report.entries)
    rows.push_back({v.file_id, v.rule.str(), std::string(to_string(v.vtype)), std::string(to_string(v.severity)),
                    std::to_string(v.start_line), std::to_string(v.end_line), v.message});
  csv::Row header(detail::native_columns().begin(), detail::native_columns().end());
  return csv::write(header, rows);
}

inline ViolationReport load_report(const std::filesystem::path& path, ReportState state,
                                   std::string_view adapter = "csv", const AdapterOptions& opts = {}) {
  return parse_report(io::read_file(path), adapter, state, opts);
}

// Keeps only entries whose rule is in the profile.
inline ViolationReport restrict_to_profile(ViolationReport report, const RuleProfile& profile) {
  std::erase_if(report.entries, [&](const Violation& v) { return !in_scope(profile, v.rule); });
  report.profile_name = profile.name;
  return report;
}

// ---------------------------------------------------------------------------
// Validation

enum class WarningKind { OutOfProfile, DuplicateEntry, ZeroLengthFile, SpanBeyondFile };

constexpr std::string_view to_string(WarningKind k) {
  switch (k) {
    case WarningKind::OutOfProfile: return "OutOfProfile";
    case WarningKind::DuplicateEntry: return "DuplicateEntry";
    case WarningKind::ZeroLengthFile: return "ZeroLengthFile";
    case WarningKind::SpanBeyondFile: return "SpanBeyondFile";
  }
  return "";
}

struct ReportWarning {
  WarningKind kind;
  std::size_t entry_index;
  std::string detail;
};

// `file_line_counts` is optional: when a file is listed, entries are checked
// against its length.
inline std::vector<ReportWarning> validate_report(const ViolationReport& report, const RuleProfile& profile,
                                                  const std::map<std::string, std::size_t>& file_line_counts = {}) {
  std::vector<ReportWarning> warnings;
  std::map<std::tuple<std::string, std::string, std::size_t, std::size_t, ViolationType, Severity, std::string>,
           std::size_t>
      seen;
  for (std::size_t i = 0; i < report.entries.size(); ++i) {
    const auto& v = report.entries[i];
    if (!in_scope(profile, v.rule))
      warnings.push_back({WarningKind::OutOfProfile, i, v.rule.str() + " not in profile " + profile.name});

    auto tuple = std::make_tuple(v.file_id, v.rule.str(), v.start_line, v.end_line, v.vtype, v.severity, v.message);
    auto [it, inserted] = seen.emplace(tuple, i);
    if (!inserted)
      warnings.push_back({WarningKind::DuplicateEntry, i, "duplicates entry " + std::to_string(it->second)});

    if (auto f = file_line_counts.find(v.file_id); f != file_line_counts.end()) {
      if (f->second == 0)
        warnings.push_back({WarningKind::ZeroLengthFile, i, v.file_id + " is empty"});
      else if (v.end_line > f->second)
        warnings.push_back({WarningKind::SpanBeyondFile, i,
                            v.file_id + " has " + std::to_string(f->second) + " lines, span ends at " +
                                std::to_string(v.end_line)});
    }
  }
  return warnings;
}

}  // namespace repairlens
