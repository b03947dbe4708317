#pragma once

// Fix-rate evaluation: a pre-repair violation counts as fixed when no
// post-repair entry carries the same {file, rule, start line, end line} key.

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "repairlens/csv.hpp"
#include "repairlens/violation.hpp"

namespace repairlens {

// Rule the analyzer reports when it cannot parse a file at all.
inline const RuleId& parse_error_rule() {
  static const RuleId r = RuleId::parse("S2260");
  return r;
}

struct MatchOutcome {
  std::vector<Violation> fixed;
  std::vector<Violation> surviving;
  std::size_t pre_count = 0;
  std::size_t post_matched_count = 0;
  // Files the post-repair analysis could not parse; their pre entries count as
  // fixed but the file is reported here.
  std::vector<std::string> unparsable_files;
};

// Multiset matching: k pre entries sharing a key consume at most k post
// entries with that key.
inline MatchOutcome match_violations(const ViolationReport& pre, const ViolationReport& post) {
  if (pre.state != ReportState::PreRepair)
    throw Error(ErrorKind::StateMismatch, "first report is " + std::string(to_string(pre.state)));
  if (post.state != ReportState::PostRepair)
    throw Error(ErrorKind::StateMismatch, "second report is " + std::string(to_string(post.state)));

  std::map<ViolationKey, std::size_t> available;
  std::set<std::string> unparsable;
  for (const auto& v : post.entries) {
    ++available[key_of(v)];
    if (v.rule == parse_error_rule()) unparsable.insert(v.file_id);
  }

  MatchOutcome out;
  out.pre_count = pre.entries.size();
  for (const auto& v : pre.entries) {
    auto it = available.find(key_of(v));
    if (it != available.end() && it->second > 0) {
      --it->second;
      out.surviving.push_back(v);
    } else {
      out.fixed.push_back(v);
    }
  }
  out.post_matched_count = out.surviving.size();

  std::set<std::string> pre_files;
  for (const auto& v : pre.entries) pre_files.insert(v.file_id);
  for (const auto& f : unparsable)
    if (pre_files.count(f)) out.unparsable_files.push_back(f);
  return out;
}

struct FixRateRow {
  RuleId rule;
  std::size_t pre_count = 0;
  std::size_t fixed_count = 0;
  double fix_rate = 0.0;
};

struct FixRateTable {
  std::vector<FixRateRow> rows;  // profile order
  std::size_t pre_total = 0;
  std::size_t fixed_total = 0;
  double rate = 0.0;
};

// One row per profile rule with at least one pre-repair violation. Entries
// whose rule is outside the profile are not counted.
inline FixRateTable compute_fix_rates(const MatchOutcome& outcome, const RuleProfile& profile) {
  std::map<RuleId, std::pair<std::size_t, std::size_t>> counts;  // pre, fixed
  for (const auto& v : outcome.fixed)
    if (in_scope(profile, v.rule)) {
      ++counts[v.rule].first;
      ++counts[v.rule].second;
    }
  for (const auto& v : outcome.surviving)
    if (in_scope(profile, v.rule)) ++counts[v.rule].first;

  auto rank = [&](const RuleId& r) { return profile.position(r).value_or(profile.rules.size()); };
  FixRateTable table;
  for (const auto& [rule, c] : counts) {
    table.rows.push_back({rule, c.first, c.second, static_cast<double>(c.second) / static_cast<double>(c.first)});
    table.pre_total += c.first;
    table.fixed_total += c.second;
  }
  std::stable_sort(table.rows.begin(), table.rows.end(),
                   [&](const FixRateRow& a, const FixRateRow& b) { return rank(a.rule) < rank(b.rule); });
  table.rate = table.pre_total ? static_cast<double>(table.fixed_total) / static_cast<double>(table.pre_total) : 0.0;
  return table;
}

// Percentage with one decimal, e.g. 0.3625 -> "36.3%". Half-way cases round
// away from zero on the exact ratio.
inline std::string render_percent(std::size_t numerator, std::size_t denominator) {
  if (denominator == 0) return "NA";
  // tenths of a percent, computed in integers to avoid binary rounding drift
  const unsigned long long scaled = 2000ULL * numerator;
  const unsigned long long tenths = (scaled / denominator + 1) / 2;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%llu.%llu%%", tenths / 10, tenths % 10);
  return buf;
}

struct FixRateSummary {
  std::vector<FixRateRow> rows;  // descending pre_count, then rule code
  std::size_t pre_total = 0;
  std::size_t fixed_total = 0;
  double rate = 0.0;

  std::string to_csv() const {
    std::vector<csv::Row> out;
    for (const auto& r : rows)
      out.push_back({r.rule.str(), std::to_string(r.pre_count), std::to_string(r.fixed_count),
                     nlohmann::json(r.fix_rate).dump(), render_percent(r.fixed_count, r.pre_count)});
    return csv::write({"rule", "pre_count", "fixed_count", "fix_rate", "fixed_percentage"}, out);
  }

  nlohmann::json to_json() const {
    nlohmann::json rules = nlohmann::json::array();
    for (const auto& r : rows)
      rules.push_back({{"rule", r.rule.str()},
                       {"pre_count", r.pre_count},
                       {"fixed_count", r.fixed_count},
                       {"fix_rate", r.fix_rate}});
    return {{"pre_total", pre_total},
            {"fixed_total", fixed_total},
            {"fix_rate", rate},
            {"fixed_percentage", render_percent(fixed_total, pre_total)},
            {"rules", rules}};
  }

  std::string to_text() const {
    std::string out = "rule     violations  fixed\n";
    char buf[96];
    for (const auto& r : rows) {
      std::snprintf(buf, sizeof buf, "%-8s %10zu  %s\n", r.rule.str().c_str(), r.pre_count,
                    render_percent(r.fixed_count, r.pre_count).c_str());
      out += buf;
    }
    std::snprintf(buf, sizeof buf, "overall  %10zu  %s (%zu fixed)\n", pre_total,
                  render_percent(fixed_total, pre_total).c_str(), fixed_total);
    out += buf;
    return out;
  }
};

inline FixRateSummary summarize_fix_rate(const FixRateTable& table) {
  FixRateSummary s{table.rows, table.pre_total, table.fixed_total, table.rate};
  std::sort(s.rows.begin(), s.rows.end(), [](const FixRateRow& a, const FixRateRow& b) {
    if (a.pre_count != b.pre_count) return a.pre_count > b.pre_count;
    return a.rule < b.rule;
  });
  return s;
}

}  // namespace repairlens
