#pragma once

// Nonparametric machinery for paired metric deltas: D'Agostino-Pearson K²
// normality test, two-sided Wilcoxon signed-rank test and signed-rank
// direction summaries.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "repairlens/error.hpp"

namespace repairlens::stats {

enum class Direction { Increase, Decrease, None, Undefined };

constexpr std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::Increase: return "increase";
    case Direction::Decrease: return "decrease";
    case Direction::None: return "none";
    case Direction::Undefined: return "NA";
  }
  return "";
}

struct StatResult {
  std::string test_name;
  std::optional<double> statistic;
  std::optional<double> p_value;
  std::size_t n_effective = 0;
  Direction direction = Direction::Undefined;

  bool defined() const { return statistic.has_value(); }
};

struct PairedSeries {
  std::string metric_name;
  std::vector<double> deltas;  // post - pre, one per file

  std::size_t n() const { return deltas.size(); }
};

inline double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

// ---------------------------------------------------------------------------
// D'Agostino-Pearson

inline constexpr std::size_t kNormalityMinSample = 20;

namespace detail {

struct Moments {
  double mean = 0, m2 = 0, m3 = 0, m4 = 0;
};

inline Moments central_moments(std::span<const double> x) {
  Moments m;
  const double n = static_cast<double>(x.size());
  m.mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  for (double v : x) {
    const double d = v - m.mean;
    const double d2 = d * d;
    m.m2 += d2;
    m.m3 += d2 * d;
    m.m4 += d2 * d2;
  }
  m.m2 /= n;
  m.m3 /= n;
  m.m4 /= n;
  return m;
}

// D'Agostino's transform of sample skewness to an approximately N(0,1) value.
inline double skewness_z(double b1, double n) {
  double y = b1 * std::sqrt(((n + 1) * (n + 3)) / (6.0 * (n - 2)));
  const double beta2 = 3.0 * (n * n + 27 * n - 70) * (n + 1) * (n + 3) / ((n - 2.0) * (n + 5) * (n + 7) * (n + 9));
  const double w2 = -1 + std::sqrt(2 * (beta2 - 1));
  const double delta = 1 / std::sqrt(0.5 * std::log(w2));
  const double alpha = std::sqrt(2.0 / (w2 - 1));
  if (y == 0) y = 1;
  return delta * std::log(y / alpha + std::sqrt((y / alpha) * (y / alpha) + 1));
}

// Anscombe-Glynn transform of sample kurtosis.
inline double kurtosis_z(double b2, double n) {
  const double e = 3.0 * (n - 1) / (n + 1);
  const double var_b2 = 24.0 * n * (n - 2) * (n - 3) / ((n + 1) * (n + 1) * (n + 3) * (n + 5));
  const double x = (b2 - e) / std::sqrt(var_b2);
  const double sqrt_beta1 =
      6.0 * (n * n - 5 * n + 2) / ((n + 7) * (n + 9)) * std::sqrt((6.0 * (n + 3) * (n + 5)) / (n * (n - 2) * (n - 3)));
  const double a = 6.0 + 8.0 / sqrt_beta1 * (2.0 / sqrt_beta1 + std::sqrt(1 + 4.0 / (sqrt_beta1 * sqrt_beta1)));
  const double term1 = 1 - 2 / (9.0 * a);
  const double denom = 1 + x * std::sqrt(2 / (a - 4.0));
  if (denom == 0) return std::numeric_limits<double>::quiet_NaN();
  const double term2 = (denom > 0 ? 1.0 : -1.0) * std::cbrt((1 - 2.0 / a) / std::abs(denom));
  return (term1 - term2) / std::sqrt(2 / (9.0 * a));
}

}  // namespace detail

inline StatResult dagostino_pearson(std::span<const double> sample) {
  if (sample.size() < kNormalityMinSample)
    throw Error(ErrorKind::SampleTooSmall,
                "normality test needs at least 20 values, got " + std::to_string(sample.size()));
  const auto m = detail::central_moments(sample);
  const double scale = std::max(1.0, m.mean * m.mean);
  if (!(m.m2 > scale * 1e-28)) throw Error(ErrorKind::DegenerateSample, "sample has zero variance");

  const double n = static_cast<double>(sample.size());
  const double b1 = m.m3 / std::pow(m.m2, 1.5);
  const double b2 = m.m4 / (m.m2 * m.m2);
  const double zs = detail::skewness_z(b1, n);
  const double zk = detail::kurtosis_z(b2, n);

  StatResult r{"dagostino_pearson", std::nullopt, std::nullopt, sample.size(), Direction::Undefined};
  const double k2 = zs * zs + zk * zk;
  if (std::isfinite(k2)) {
    r.statistic = k2;
    r.p_value = std::exp(-k2 / 2);  // chi-square survival function, 2 dof
  }
  return r;
}

// ---------------------------------------------------------------------------
// Signed ranks

struct SignedRanks {
  std::vector<double> nonzero;       // nonzero deltas in input order
  std::vector<double> signed_ranks;  // parallel to `nonzero`, midranks of |delta|
  std::vector<std::size_t> tie_sizes;
  double w_plus = 0;
  double w_minus = 0;

  std::size_t n() const { return nonzero.size(); }
};

// Zero deltas are discarded; tied magnitudes share their average rank.
inline SignedRanks signed_ranks(std::span<const double> deltas) {
  SignedRanks s;
  for (double d : deltas)
    if (d != 0) s.nonzero.push_back(d);
  const std::size_t n = s.nonzero.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(s.nonzero[a]) < std::abs(s.nonzero[b]); });
  s.signed_ranks.assign(n, 0.0);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && std::abs(s.nonzero[order[j + 1]]) == std::abs(s.nonzero[order[i]])) ++j;
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) {
      const double d = s.nonzero[order[k]];
      s.signed_ranks[order[k]] = d > 0 ? midrank : -midrank;
      (d > 0 ? s.w_plus : s.w_minus) += midrank;
    }
    s.tie_sizes.push_back(j - i + 1);
    i = j + 1;
  }
  return s;
}

inline constexpr std::size_t kWilcoxonExactMax = 25;

namespace detail {

// Null distribution of W+ given the (mid)ranks, over all 2^n sign patterns.
// Ranks are doubled so midranks become integers; counts stay exact in double
// for n <= 52.
inline double wilcoxon_exact_two_sided(const SignedRanks& s) {
  std::vector<std::uint32_t> doubled;
  std::uint32_t total = 0;
  for (double r : s.signed_ranks) {
    auto d = static_cast<std::uint32_t>(std::lround(2 * std::abs(r)));
    doubled.push_back(d);
    total += d;
  }
  std::vector<double> counts(total + 1, 0.0);
  counts[0] = 1;
  std::uint32_t reach = 0;
  for (auto d : doubled) {
    for (std::uint32_t v = reach + 1; v-- > 0;)
      if (counts[v] != 0) counts[v + d] += counts[v];
    reach += d;
  }
  const auto observed = static_cast<std::uint32_t>(std::lround(2 * s.w_plus));
  double lower = 0, upper = 0;
  for (std::uint32_t v = 0; v <= total; ++v) {
    if (v <= observed) lower += counts[v];
    if (v >= observed) upper += counts[v];
  }
  const double patterns = std::ldexp(1.0, static_cast<int>(doubled.size()));
  return std::min(1.0, 2 * std::min(lower, upper) / patterns);
}

// Normal approximation with tie-corrected variance and continuity correction.
inline double wilcoxon_normal_two_sided(const SignedRanks& s) {
  const double n = static_cast<double>(s.n());
  const double mean = n * (n + 1) / 4;
  double var = n * (n + 1) * (2 * n + 1);
  for (auto t : s.tie_sizes) {
    const double td = static_cast<double>(t);
    var -= (td * td * td - td) / 2;
  }
  const double se = std::sqrt(var / 24);
  const double t_stat = std::min(s.w_plus, s.w_minus);
  double z = (t_stat - mean) / se;
  if (z != 0) z -= (z > 0 ? 1.0 : -1.0) * 0.5 / se;
  return std::min(1.0, 2 * normal_sf(std::abs(z)));
}

}  // namespace detail

struct DirectionSummary {
  double median_delta = 0;
  std::optional<double> mean_signed_rank;  // empty when every delta is zero
  Direction direction = Direction::None;
};

inline double median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const auto mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : (v[mid - 1] + v[mid]) / 2;
}

inline DirectionSummary signed_rank_direction(const PairedSeries& series) {
  DirectionSummary out;
  const auto s = signed_ranks(series.deltas);
  // over nonzero deltas, like the ranks, so padding with zeros changes nothing
  out.median_delta = median(s.nonzero);
  if (s.n() == 0) return out;
  const double mean = (s.w_plus - s.w_minus) / static_cast<double>(s.n());
  out.mean_signed_rank = mean;
  out.direction = mean > 0 ? Direction::Increase : mean < 0 ? Direction::Decrease : Direction::None;
  return out;
}

// Two-sided; statistic is min(W+, W-). Exact null distribution up to 25
// nonzero deltas, normal approximation above. Undefined when every delta is
// zero.
inline StatResult wilcoxon_signed_rank(const PairedSeries& series) {
  StatResult r{"wilcoxon_signed_rank", std::nullopt, std::nullopt, 0, Direction::None};
  const auto s = signed_ranks(series.deltas);
  r.n_effective = s.n();
  r.direction = signed_rank_direction(series).direction;
  if (s.n() == 0) return r;
  r.statistic = std::min(s.w_plus, s.w_minus);
  r.p_value = s.n() <= kWilcoxonExactMax ? detail::wilcoxon_exact_two_sided(s) : detail::wilcoxon_normal_two_sided(s);
  return r;
}

}  // namespace repairlens::stats
