#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace logxlate {

// Classic two-row DP; O(|a|*|b|) time, O(min) space.
inline std::size_t levenshtein(std::string_view a, std::string_view b) {
  if (a.size() < b.size()) std::swap(a, b);  // b is the shorter
  if (b.empty()) return a.size();
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];  // dp[i-1][j-1]
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];  // dp[i-1][j]
      const std::size_t sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
      row[j] = std::min({row[j - 1] + 1, up + 1, sub});
      diag = up;
    }
  }
  return row[b.size()];
}

inline double relative_distance(std::size_t d_a, std::size_t reference_length) {
  if (reference_length == 0) {
    throw std::invalid_argument("relative_distance: reference length must be >= 1");
  }
  return static_cast<double>(d_a) / static_cast<double>(reference_length);
}

// Sample quantile with linear interpolation between order statistics at
// rank 1 + p*(n-1) (R's default, "type 7").
inline double quantile_type7(std::vector<double> sorted_ascending, double p) {
  const std::size_t n = sorted_ascending.size();
  if (n == 0) throw std::invalid_argument("quantile of an empty sample");
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("quantile p outside [0,1]");
  const double rank = p * static_cast<double>(n - 1);  // 0-based
  const std::size_t lo = static_cast<std::size_t>(std::floor(rank));
  const double frac = rank - static_cast<double>(lo);
  if (lo + 1 >= n) return sorted_ascending[n - 1];
  return sorted_ascending[lo] +
         frac * (sorted_ascending[lo + 1] - sorted_ascending[lo]);
}

struct StatSummary {
  double min = 0.0;
  double avg = 0.0;
  double q50 = 0.0;
  double q75 = 0.0;
  double q90 = 0.0;
  double q95 = 0.0;
  double q99 = 0.0;
  double max = 0.0;
};

inline StatSummary summarize(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("summarize: empty sample");
  std::sort(values.begin(), values.end());
  StatSummary s;
  s.min = values.front();
  s.max = values.back();
  s.avg = std::accumulate(values.begin(), values.end(), 0.0) /
          static_cast<double>(values.size());
  s.q50 = quantile_type7(values, 0.50);
  s.q75 = quantile_type7(values, 0.75);
  s.q90 = quantile_type7(values, 0.90);
  s.q95 = quantile_type7(values, 0.95);
  s.q99 = quantile_type7(values, 0.99);
  return s;
}

struct HistogramBin {
  double low = 0.0;
  double high = 0.0;
  std::size_t count = 0;
};

// Equal-width bins over [min, max]; the top edge is inclusive so the counts
// partition the sample. A constant sample gets one degenerate full bin.
inline std::vector<HistogramBin> histogram(const std::vector<double>& values,
                                           std::size_t bins = 50) {
  if (values.empty()) throw std::invalid_argument("histogram: empty sample");
  if (bins == 0) throw std::invalid_argument("histogram: need at least one bin");
  const auto [mn_it, mx_it] = std::minmax_element(values.begin(), values.end());
  const double mn = *mn_it, mx = *mx_it;
  std::vector<HistogramBin> out(bins);
  const double width = (mx - mn) / static_cast<double>(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].low = mn + width * static_cast<double>(b);
    out[b].high = b + 1 == bins ? mx : mn + width * static_cast<double>(b + 1);
  }
  if (mx == mn) {
    out[0].count = values.size();
    return out;
  }
  for (double v : values) {
    auto b = static_cast<std::size_t>((v - mn) / (mx - mn) *
                                      static_cast<double>(bins));
    if (b >= bins) b = bins - 1;
    out[b].count += 1;
  }
  return out;
}

}  // namespace logxlate
