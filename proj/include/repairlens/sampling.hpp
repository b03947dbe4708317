#pragma once

// Validation workflow for detected new violations: Cochran sample sizing,
// stratified sampling with a one-per-stratum floor, labeling sheets for
// manual review and the exact one-sided binomial precision test.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "repairlens/csv.hpp"
#include "repairlens/error.hpp"
#include "repairlens/io.hpp"
#include "repairlens/newviol.hpp"
#include "repairlens/violation.hpp"

namespace repairlens {

struct SamplePlan {
  std::size_t population = 0;
  double confidence = 0.95;
  double margin = 0.05;
  double proportion = 0.5;
};

inline double z_for_confidence(double confidence) {
  // fixed two-sided critical values
  if (std::abs(confidence - 0.90) < 1e-9) return 1.645;
  if (std::abs(confidence - 0.95) < 1e-9) return 1.96;
  if (std::abs(confidence - 0.99) < 1e-9) return 2.576;
  throw Error(ErrorKind::InvalidParameter, "confidence must be 0.90, 0.95 or 0.99");
}

// Cochran's n0 = z²p(1-p)/e², finite-population corrected and rounded up.
inline std::size_t cochran_sample_size(const SamplePlan& plan) {
  if (plan.population < 1) throw Error(ErrorKind::InvalidParameter, "population must be >= 1");
  if (!(plan.margin > 0 && plan.margin < 1)) throw Error(ErrorKind::InvalidParameter, "margin must be in (0,1)");
  if (!(plan.proportion > 0 && plan.proportion < 1))
    throw Error(ErrorKind::InvalidParameter, "proportion must be in (0,1)");
  const double z = z_for_confidence(plan.confidence);
  const double n0 = z * z * plan.proportion * (1 - plan.proportion) / (plan.margin * plan.margin);
  const double corrected = n0 / (1 + (n0 - 1) / static_cast<double>(plan.population));
  // guard against ceil() of values like 1.0000000000000002
  auto n = static_cast<std::size_t>(std::ceil(corrected - 1e-9));
  return std::clamp<std::size_t>(n, 1, plan.population);
}

inline std::size_t cochran_sample_size(std::size_t population, double confidence = 0.95, double margin = 0.05,
                                       double proportion = 0.5) {
  return cochran_sample_size(SamplePlan{population, confidence, margin, proportion});
}

// ---------------------------------------------------------------------------
// Stratified allocation

struct Allocation {
  std::map<RuleId, std::size_t> initial;  // max(1, round(target * N_h / N))
  std::map<RuleId, std::size_t> final;    // adjusted to sum to the target

  static std::size_t total(const std::map<RuleId, std::size_t>& a) {
    std::size_t s = 0;
    for (const auto& [_, n] : a) s += n;
    return s;
  }
};

// Proportional allocation with a floor of one per non-empty stratum. While the
// sum exceeds the target, the currently largest allocation loses one (ties go
// to the lexicographically first rule), never dropping below one; while it
// falls short, the largest allocation with spare population gains one.
inline Allocation allocate_strata(const std::map<RuleId, std::size_t>& stratum_sizes, std::size_t target) {
  std::size_t population = 0, nonempty = 0;
  for (const auto& [_, n] : stratum_sizes) {
    population += n;
    if (n) ++nonempty;
  }
  if (target < nonempty)
    throw Error(ErrorKind::InfeasibleTarget, "target " + std::to_string(target) + " is below the " +
                                                 std::to_string(nonempty) + " non-empty strata");
  if (target > population)
    throw Error(ErrorKind::InfeasibleTarget,
                "target " + std::to_string(target) + " exceeds population " + std::to_string(population));

  Allocation a;
  for (const auto& [rule, n] : stratum_sizes) {
    if (!n) continue;
    // round-half-up of target*n/population in integer arithmetic
    const auto scaled = (2 * static_cast<unsigned long long>(target) * n + population) / (2ULL * population);
    a.initial[rule] = std::max<std::size_t>(1, static_cast<std::size_t>(scaled));
  }
  a.final = a.initial;

  auto pick = [&](auto eligible) {
    const RuleId* best = nullptr;
    std::size_t best_n = 0;
    for (const auto& [rule, n] : a.final)
      if (eligible(rule, n) && (!best || n > best_n)) {  // map order gives the lexicographic tie-break
        best = &rule;
        best_n = n;
      }
    return best;
  };

  std::size_t sum = Allocation::total(a.final);
  while (sum > target) {
    auto r = pick([](const RuleId&, std::size_t n) { return n > 1; });
    --a.final[*r];
    --sum;
  }
  while (sum < target) {
    auto r = pick([&](const RuleId& rule, std::size_t n) { return n < stratum_sizes.at(rule); });
    ++a.final[*r];
    ++sum;
  }
  return a;
}

template <class Item>
struct StratifiedSample {
  std::map<RuleId, std::vector<Item>> strata;
  Allocation allocation;
  std::uint64_t seed = 0;

  std::size_t size() const {
    std::size_t s = 0;
    for (const auto& [_, v] : strata) s += v.size();
    return s;
  }
};

namespace detail {

// Unbiased integer in [0, bound) from a standard engine; unlike
// std::uniform_int_distribution the mapping is identical on every platform.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do x = rng();
  while (x >= limit);
  return x % bound;
}

}  // namespace detail

// Strata are visited in rule order; within a stratum `allocation` indices are
// drawn uniformly without replacement (partial Fisher-Yates) and the chosen
// items keep their population order.
template <class Item>
StratifiedSample<Item> stratified_sample(const std::map<RuleId, std::vector<Item>>& population, std::size_t target,
                                         std::uint64_t seed) {
  std::map<RuleId, std::size_t> sizes;
  for (const auto& [rule, items] : population) sizes[rule] = items.size();

  StratifiedSample<Item> out;
  out.seed = seed;
  out.allocation = allocate_strata(sizes, target);

  std::mt19937_64 rng(seed);
  for (const auto& [rule, count] : out.allocation.final) {
    const auto& items = population.at(rule);
    std::vector<std::size_t> idx(items.size());
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < count; ++i) {
      auto j = i + static_cast<std::size_t>(detail::uniform_below(rng, idx.size() - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(count);
    std::sort(idx.begin(), idx.end());
    auto& dst = out.strata[rule];
    for (auto i : idx) dst.push_back(items[i]);
  }
  return out;
}

template <class Item, class RuleOf>
std::map<RuleId, std::vector<Item>> group_by_rule(const std::vector<Item>& items, RuleOf rule_of) {
  std::map<RuleId, std::vector<Item>> groups;
  for (const auto& it : items) groups[rule_of(it)].push_back(it);
  return groups;
}

// ---------------------------------------------------------------------------
// Labeling sheets

inline constexpr std::string_view kDeletedFragment = "<file deleted>";

inline std::string export_labeling_sheet(const StratifiedSample<Violation>& sample, const SourceMap& sources) {
  std::vector<csv::Row> rows;
  std::size_t item = 0;
  for (const auto& [rule, items] : sample.strata) {
    for (const auto& v : items) {
      auto src = sources.find(v.file_id);
      if (src == sources.end()) throw Error(ErrorKind::MissingSource, v.file_id);
      std::string fragment;
      if (src->second.deleted) {
        fragment = kDeletedFragment;
      } else {
        auto f = extract_fragment(src->second, v.start_line, v.end_line);
        for (std::size_t i = 0; i < f.lines.size(); ++i) {
          if (i) fragment.push_back('\n');
          fragment += f.lines[i];
        }
      }
      rows.push_back({std::to_string(++item), v.file_id, rule.str(), std::to_string(v.start_line),
                      std::to_string(v.end_line), fragment, "", "", ""});
    }
  }
  return csv::write({"item", "file", "rule", "start_line", "end_line", "fragment", "evaluator_1", "evaluator_2",
                     "adjudicated"},
                    rows);
}

enum class Label { TP, FP, Unlabeled };

struct LabelRecord {
  std::string item;
  std::string file_id;
  std::string rule;
  Label verdict = Label::Unlabeled;
  std::string evaluator_id;  // "agreed" or "adjudicated"
};

struct LabelIngest {
  std::vector<LabelRecord> records;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
};

inline Label parse_label(std::string_view text) {
  auto t = io::upper(io::trim(text));
  if (t == "TP") return Label::TP;
  if (t == "FP") return Label::FP;
  return Label::Unlabeled;
}

inline LabelIngest ingest_labels(std::string_view sheet) {
  auto table = csv::parse(sheet);
  LabelIngest out;
  if (table.header.empty()) return out;
  auto e1 = table.column("evaluator_1");
  auto e2 = table.column("evaluator_2");
  if (!e1 || !e2) throw Error(ErrorKind::MissingRequiredField, "columns 'evaluator_1' and 'evaluator_2'");
  auto adj = table.column("adjudicated");
  auto col = [&](std::string_view name, const csv::Row& row) -> std::string {
    auto c = table.column(name);
    return c ? row[*c] : std::string{};
  };

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = "line " + std::to_string(table.row_lines[r]);
    const Label a = parse_label(row[*e1]);
    const Label b = parse_label(row[*e2]);
    const Label c = adj ? parse_label(row[*adj]) : Label::Unlabeled;

    LabelRecord rec{col("item", row), col("file", row), col("rule", row), Label::Unlabeled, ""};
    if (c != Label::Unlabeled) {
      rec.verdict = c;
      rec.evaluator_id = "adjudicated";
    } else if (a == Label::Unlabeled || b == Label::Unlabeled) {
      throw Error(ErrorKind::UnlabeledRow, where + " lacks a TP/FP verdict");
    } else if (a != b) {
      throw Error(ErrorKind::ConflictingVerdicts, where + " evaluators disagree and no adjudicated verdict is given");
    } else {
      rec.verdict = a;
      rec.evaluator_id = "agreed";
    }
    (rec.verdict == Label::TP ? out.true_positives : out.false_positives) += 1;
    out.records.push_back(std::move(rec));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exact binomial test

struct BinomialTestResult {
  std::size_t successes = 0;
  std::size_t trials = 0;
  double null_proportion = 0;
  double observed_proportion = 0;
  double p_value = 1;
  double alpha = 0.05;
  bool significant = false;
};

// One-sided P(X >= k) for X ~ Binomial(n, p0), summed in log space.
inline double binomial_upper_tail(std::size_t k, std::size_t n, double p0) {
  if (k > n) throw Error(ErrorKind::InvalidParameter, "successes exceed trials");
  if (!(p0 > 0 && p0 < 1)) throw Error(ErrorKind::InvalidParameter, "null proportion must be in (0,1)");
  if (k == 0) return 1.0;
  const double nd = static_cast<double>(n);
  const double log_p = std::log(p0);
  const double log_q = std::log1p(-p0);
  const double log_n_fact = std::lgamma(nd + 1);
  std::vector<double> terms;
  terms.reserve(n - k + 1);
  for (std::size_t i = k; i <= n; ++i) {
    const double id = static_cast<double>(i);
    terms.push_back(log_n_fact - std::lgamma(id + 1) - std::lgamma(nd - id + 1) + id * log_p + (nd - id) * log_q);
  }
  const double peak = *std::max_element(terms.begin(), terms.end());
  double acc = 0;
  for (double t : terms) acc += std::exp(t - peak);
  return std::min(1.0, std::exp(peak + std::log(acc)));
}

inline BinomialTestResult exact_binomial_test(std::size_t successes, std::size_t trials, double null_proportion,
                                              double alpha = 0.05) {
  if (trials == 0) throw Error(ErrorKind::InvalidParameter, "trials must be >= 1");
  BinomialTestResult r;
  r.successes = successes;
  r.trials = trials;
  r.null_proportion = null_proportion;
  r.p_value = binomial_upper_tail(successes, trials, null_proportion);
  r.observed_proportion = static_cast<double>(successes) / static_cast<double>(trials);
  r.alpha = alpha;
  r.significant = r.p_value < alpha;
  return r;
}

}  // namespace repairlens
