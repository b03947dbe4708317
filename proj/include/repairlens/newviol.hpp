#pragma once

// New-violation detection. A post-repair finding is attributed to the repair
// tool only if (1) its code fragment does not occur in the original file and
// (2) no pre-repair entry has the same key.

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "repairlens/csv.hpp"
#include "repairlens/io.hpp"
#include "repairlens/violation.hpp"

namespace repairlens {

struct SourcePair {
  std::string file_id;
  std::vector<std::string> original_lines;
  std::vector<std::string> repaired_lines;
  bool deleted = false;  // repaired file absent or emptied
};

struct Fragment {
  std::string file_id;
  std::vector<std::string> lines;
  std::size_t start_line = 1;
  std::size_t end_line = 1;
};

enum class LineNormalization {
  Exact,  // byte-equal lines
  Loose,  // trailing whitespace trimmed, leading whitespace ignored
};

inline LineNormalization parse_normalization(std::string_view name) {
  if (name == "exact") return LineNormalization::Exact;
  if (name == "loose") return LineNormalization::Loose;
  throw Error(ErrorKind::InvalidParameter, "normalization must be 'exact' or 'loose', got '" + std::string(name) + "'");
}

enum class Verdict { NotNewFragmentFound, NotNewKeyMatch, New };

constexpr std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::NotNewFragmentFound: return "NOT_NEW_FRAGMENT_FOUND";
    case Verdict::NotNewKeyMatch: return "NOT_NEW_KEY_MATCH";
    case Verdict::New: return "NEW";
  }
  return "";
}

struct NewViolationVerdict {
  Violation violation;
  Verdict verdict = Verdict::New;
  // Original-file line where the fragment was found, or the start line of the
  // matching pre-repair entry. Empty iff verdict is New.
  std::optional<std::size_t> evidence_line;
};

inline Fragment extract_fragment(const SourcePair& pair, std::size_t start_line, std::size_t end_line) {
  if (start_line < 1 || end_line < start_line || end_line > pair.repaired_lines.size())
    throw Error(ErrorKind::SpanOutOfBounds, pair.file_id + ": span (" + std::to_string(start_line) + "," +
                                                std::to_string(end_line) + ") outside " +
                                                std::to_string(pair.repaired_lines.size()) + " repaired lines");
  Fragment f{pair.file_id, {}, start_line, end_line};
  f.lines.assign(pair.repaired_lines.begin() + static_cast<std::ptrdiff_t>(start_line - 1),
                 pair.repaired_lines.begin() + static_cast<std::ptrdiff_t>(end_line));
  return f;
}

inline std::string_view normalize_line(std::string_view line, LineNormalization policy) {
  if (policy == LineNormalization::Exact) return line;
  auto b = line.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  auto e = line.find_last_not_of(" \t\r");
  return line.substr(b, e - b + 1);
}

// Lowest 1-based original line at which the fragment occurs contiguously.
inline std::optional<std::size_t> fragment_in_original(const Fragment& fragment, const SourcePair& pair,
                                                       LineNormalization policy = LineNormalization::Exact) {
  const auto& orig = pair.original_lines;
  const auto m = fragment.lines.size();
  if (m == 0 || m > orig.size()) return std::nullopt;
  for (std::size_t start = 0; start + m <= orig.size(); ++start) {
    bool ok = true;
    for (std::size_t j = 0; j < m && ok; ++j)
      ok = normalize_line(orig[start + j], policy) == normalize_line(fragment.lines[j], policy);
    if (ok) return start + 1;
  }
  return std::nullopt;
}

struct DetectionResult {
  std::vector<NewViolationVerdict> verdicts;  // post-report order
  std::vector<std::string> deleted_files;     // noted, carry no verdicts
};

using SourceMap = std::map<std::string, SourcePair>;

inline DetectionResult detect_new_violations(const ViolationReport& pre, const ViolationReport& post,
                                             const SourceMap& sources,
                                             LineNormalization policy = LineNormalization::Exact) {
  std::map<ViolationKey, std::size_t> pre_keys;  // key -> start line
  for (const auto& v : pre.entries) pre_keys.emplace(key_of(v), v.start_line);

  DetectionResult result;
  result.verdicts.reserve(post.entries.size());
  for (const auto& v : post.entries) {
    auto src = sources.find(v.file_id);
    if (src == sources.end()) throw Error(ErrorKind::MissingSource, v.file_id);
    const SourcePair& pair = src->second;

    NewViolationVerdict out{v, Verdict::New, std::nullopt};
    auto fragment = extract_fragment(pair, v.start_line, v.end_line);
    if (auto at = fragment_in_original(fragment, pair, policy)) {
      out.verdict = Verdict::NotNewFragmentFound;
      out.evidence_line = at;
    } else if (auto k = pre_keys.find(key_of(v)); k != pre_keys.end()) {
      out.verdict = Verdict::NotNewKeyMatch;
      out.evidence_line = k->second;
    }
    result.verdicts.push_back(std::move(out));
  }
  for (const auto& [file, pair] : sources)
    if (pair.deleted) result.deleted_files.push_back(file);
  return result;
}

// Pairs every file of `original_dir` with its counterpart in `repaired_dir`.
// A missing or empty repaired file is marked deleted.
inline SourceMap load_sources(const std::filesystem::path& original_dir, const std::filesystem::path& repaired_dir) {
  SourceMap map;
  for (const auto& rel : io::list_files(original_dir)) {
    SourcePair p;
    p.file_id = rel;
    p.original_lines = io::split_lines(io::read_file(original_dir / rel));
    const auto repaired = repaired_dir / rel;
    if (std::filesystem::exists(repaired)) p.repaired_lines = io::split_lines(io::read_file(repaired));
    p.deleted = p.repaired_lines.empty();
    map.emplace(rel, std::move(p));
  }
  // files the repair created from nothing
  for (const auto& rel : io::list_files(repaired_dir)) {
    if (map.count(rel)) continue;
    SourcePair p;
    p.file_id = rel;
    p.repaired_lines = io::split_lines(io::read_file(repaired_dir / rel));
    map.emplace(rel, std::move(p));
  }
  return map;
}

struct NewViolationCategories {
  // [type][severity], indexed in declaration order of the enums
  std::array<std::array<std::size_t, 3>, 3> matrix{};
  std::vector<std::pair<RuleId, std::size_t>> frequency;  // descending count, then rule
  std::map<RuleId, std::pair<ViolationType, Severity>> rule_class;
  std::size_t total = 0;

  std::size_t count(ViolationType t) const {
    const auto& row = matrix[static_cast<std::size_t>(t)];
    return row[0] + row[1] + row[2];
  }
  std::size_t count(ViolationType t, Severity s) const {
    return matrix[static_cast<std::size_t>(t)][static_cast<std::size_t>(s)];
  }
};

inline NewViolationCategories categorize_new(const std::vector<NewViolationVerdict>& verdicts) {
  NewViolationCategories c;
  std::map<RuleId, std::size_t> per_rule;
  for (const auto& v : verdicts) {
    if (v.verdict != Verdict::New) continue;
    const auto& viol = v.violation;
    ++c.matrix[static_cast<std::size_t>(viol.vtype)][static_cast<std::size_t>(viol.severity)];
    ++per_rule[viol.rule];
    c.rule_class.emplace(viol.rule, std::make_pair(viol.vtype, viol.severity));
    ++c.total;
  }
  c.frequency.assign(per_rule.begin(), per_rule.end());
  std::stable_sort(c.frequency.begin(), c.frequency.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return c;
}

inline std::string verdicts_to_csv(const std::vector<NewViolationVerdict>& verdicts) {
  std::vector<csv::Row> rows;
  for (const auto& v : verdicts) {
    const auto& x = v.violation;
    rows.push_back({x.file_id, x.rule.str(), std::string(to_string(x.vtype)), std::string(to_string(x.severity)),
                    std::to_string(x.start_line), std::to_string(x.end_line), x.message,
                    std::string(to_string(v.verdict)), v.evidence_line ? std::to_string(*v.evidence_line) : ""});
  }
  return csv::write(
      {"file", "rule", "type", "severity", "start_line", "end_line", "message", "verdict", "evidence_line"}, rows);
}

// Reads back the verdict CSV; with `only_new`, non-New rows are skipped.
inline std::vector<NewViolationVerdict> verdicts_from_csv(std::string_view text, bool only_new = false) {
  auto table = csv::parse(text);
  std::vector<NewViolationVerdict> out;
  if (table.header.empty()) return out;
  auto verdict_col = table.column("verdict");
  if (!verdict_col) throw Error(ErrorKind::MissingRequiredField, "column 'verdict'");

  // reuse the native report parser for the violation columns
  std::vector<csv::Row> viol_rows;
  std::vector<Verdict> kinds;
  std::vector<std::optional<std::size_t>> evidence;
  auto ev_col = table.column("evidence_line");
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    Verdict k;
    if (row[*verdict_col] == "NEW") k = Verdict::New;
    else if (row[*verdict_col] == "NOT_NEW_FRAGMENT_FOUND") k = Verdict::NotNewFragmentFound;
    else if (row[*verdict_col] == "NOT_NEW_KEY_MATCH") k = Verdict::NotNewKeyMatch;
    else
      throw Error(ErrorKind::MalformedInput,
                  "line " + std::to_string(table.row_lines[r]) + ": unknown verdict '" + row[*verdict_col] + "'");
    if (only_new && k != Verdict::New) continue;
    viol_rows.push_back(row);
    kinds.push_back(k);
    std::optional<std::size_t> ev;
    if (ev_col && !row[*ev_col].empty()) ev = std::stoull(row[*ev_col]);
    evidence.push_back(ev);
  }
  auto entries = detail::parse_native_csv(csv::write(table.header, viol_rows), {});
  for (std::size_t i = 0; i < entries.size(); ++i) out.push_back({std::move(entries[i]), kinds[i], evidence[i]});
  return out;
}

inline std::string categories_matrix_csv(const NewViolationCategories& c) {
  std::vector<csv::Row> rows;
  for (auto t : kViolationTypes) {
    csv::Row r{std::string(to_string(t))};
    for (auto s : kSeverities) r.push_back(std::to_string(c.count(t, s)));
    r.push_back(std::to_string(c.count(t)));
    rows.push_back(std::move(r));
  }
  return csv::write({"type", "HIGH", "MEDIUM", "LOW", "total"}, rows);
}

inline std::string categories_frequency_csv(const NewViolationCategories& c) {
  std::vector<csv::Row> rows;
  for (const auto& [rule, n] : c.frequency) {
    const auto& [t, s] = c.rule_class.at(rule);
    rows.push_back({rule.str(), std::string(to_string(t)), std::string(to_string(s)), std::to_string(n)});
  }
  return csv::write({"rule", "type", "severity", "count"}, rows);
}

}  // namespace repairlens
