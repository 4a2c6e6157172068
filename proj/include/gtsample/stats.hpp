#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "gtsample/error.hpp"

namespace gtsample {

/// Median of `values`; absent for an empty sample.
inline std::optional<double> median(std::span<const double> values) {
  if (values.empty()) return std::nullopt;
  std::vector<double> v(values.begin(), values.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return (lower + upper) / 2.0;
}

enum class PValueMethod { automatic, exact, normal };

struct MannWhitneyResult {
  double u_x = 0;       // pairs (x_i, y_j) with x_i > y_j, ties counted 1/2
  double u_y = 0;       // |x||y| - u_x
  double p_value = 1;   // two-sided
  double z = 0;         // continuity-corrected normal score (0 for exact p-values)
  bool exact = false;
  int smaller = 0;      // -1: x tends smaller, +1: y tends smaller, 0: balanced
};

namespace detail {

// Number of orderings of n x's and m y's with U_x = u, for every u in [0, nm].
inline std::vector<double> mann_whitney_counts(std::size_t n, std::size_t m) {
  // f[i][j] as a polynomial in u, built by whether the largest value is an x or a y.
  std::vector<std::vector<std::vector<double>>> f(n + 1, std::vector<std::vector<double>>(m + 1));
  for (std::size_t i = 0; i <= n; ++i) {
    for (std::size_t j = 0; j <= m; ++j) {
      auto& cur = f[i][j];
      cur.assign(i * j + 1, 0.0);
      if (i == 0 || j == 0) {
        cur[0] = 1.0;
        continue;
      }
      // largest is an x: it beats all j y's
      const auto& a = f[i - 1][j];
      for (std::size_t u = 0; u < a.size(); ++u) cur[u + j] += a[u];
      const auto& b = f[i][j - 1];
      for (std::size_t u = 0; u < b.size(); ++u) cur[u] += b[u];
    }
  }
  return f[n][m];
}

}  // namespace detail

/// Two-sample Mann-Whitney U test with midranks for ties.
///
/// `automatic` uses exact enumeration of the null distribution when
/// |x|+|y| <= 20 and there are no ties, otherwise the normal approximation
/// with tie-corrected variance and a 0.5 continuity correction. If every
/// value is identical the p-value is 1.
inline MannWhitneyResult mann_whitney_u(std::span<const double> x, std::span<const double> y,
                                        PValueMethod method = PValueMethod::automatic) {
  if (x.empty() || y.empty()) throw Error(ErrorCode::invalid_argument, "Mann-Whitney needs two nonempty samples");
  const std::size_t n = x.size();
  const std::size_t m = y.size();
  const double total = static_cast<double>(n + m);

  struct Obs {
    double value;
    bool from_x;
  };
  std::vector<Obs> all;
  all.reserve(n + m);
  for (double v : x) all.push_back({v, true});
  for (double v : y) all.push_back({v, false});
  std::sort(all.begin(), all.end(), [](const Obs& a, const Obs& b) { return a.value < b.value; });

  double rank_sum_x = 0;
  double tie_term = 0;  // sum of t^3 - t over tie groups
  bool ties = false;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j].value == all[i].value) ++j;
    const double t = static_cast<double>(j - i);
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t q = i; q < j; ++q) {
      if (all[q].from_x) rank_sum_x += midrank;
    }
    if (t > 1) {
      ties = true;
      tie_term += t * t * t - t;
    }
    i = j;
  }

  MannWhitneyResult res;
  const double nm = static_cast<double>(n) * static_cast<double>(m);
  res.u_x = rank_sum_x - static_cast<double>(n) * static_cast<double>(n + 1) / 2.0;
  res.u_y = nm - res.u_x;
  const double mean = nm / 2.0;
  res.smaller = res.u_x < mean ? -1 : (res.u_x > mean ? 1 : 0);

  if (method == PValueMethod::automatic) {
    method = (n + m <= 20 && !ties) ? PValueMethod::exact : PValueMethod::normal;
  }
  if (method == PValueMethod::exact) {
    if (ties) throw Error(ErrorCode::invalid_argument, "exact Mann-Whitney p-values require tie-free samples");
    const auto counts = detail::mann_whitney_counts(n, m);
    double all_count = 0;
    for (double c : counts) all_count += c;
    const auto u = static_cast<std::size_t>(std::llround(res.u_x));
    double lower = 0;
    double upper = 0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
      if (k <= u) lower += counts[k];
      if (k >= u) upper += counts[k];
    }
    res.exact = true;
    res.p_value = std::min(1.0, 2.0 * std::min(lower, upper) / all_count);
    return res;
  }

  const double variance = nm / 12.0 * ((total + 1.0) - tie_term / (total * (total - 1.0)));
  if (!(variance > 0.0)) {
    res.p_value = 1.0;
    return res;
  }
  const double deviation = std::max(0.0, std::abs(res.u_x - mean) - 0.5);
  res.z = deviation / std::sqrt(variance);
  res.p_value = std::min(1.0, std::erfc(res.z / std::sqrt(2.0)));
  return res;
}

}  // namespace gtsample
