#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "support.hpp"

using namespace gtsample;

namespace {

// Exact two-sided p by enumerating every split of the pooled ranks.
double brute_exact_p(std::span<const double> x, std::span<const double> y) {
  std::vector<double> pooled(x.begin(), x.end());
  pooled.insert(pooled.end(), y.begin(), y.end());
  std::sort(pooled.begin(), pooled.end());
  const std::size_t n = x.size();
  const std::size_t total = pooled.size();
  double u_obs = 0;
  for (double a : x) {
    for (double b : y) u_obs += a > b ? 1.0 : 0.0;
  }
  double lower = 0, upper = 0, count = 0;
  for (const auto& combo : index_combinations(total, n)) {
    // Rank sum of chosen x positions minus n(n+1)/2 gives U.
    double rank_sum = 0;
    for (std::size_t i : combo) rank_sum += static_cast<double>(i + 1);
    const double u = rank_sum - static_cast<double>(n * (n + 1)) / 2.0;
    count += 1;
    if (u <= u_obs) lower += 1;
    if (u >= u_obs) upper += 1;
  }
  return std::min(1.0, 2.0 * std::min(lower, upper) / count);
}

std::vector<double> range(int lo, int hi) {
  std::vector<double> v;
  for (int i = lo; i <= hi; ++i) v.push_back(i);
  return v;
}

}  // namespace

TEST(Median, Values) {
  EXPECT_EQ(median(std::vector<double>{}), std::nullopt);
  EXPECT_EQ(median(std::vector<double>{3}), 3.0);
  EXPECT_EQ(median(std::vector<double>{4, 1, 3}), 3.0);
  EXPECT_EQ(median(std::vector<double>{4, 1, 3, 2}), 2.5);
}

TEST(MannWhitney, SeparatedPairsGiveOneThird) {
  const std::vector<double> x{1, 2}, y{3, 4};
  const auto r = mann_whitney_u(x, y);
  EXPECT_EQ(r.u_x, 0.0);
  EXPECT_EQ(r.u_y, 4.0);
  EXPECT_TRUE(r.exact);
  EXPECT_DOUBLE_EQ(r.p_value, 1.0 / 3.0);
  EXPECT_EQ(r.smaller, -1);
}

TEST(MannWhitney, IdenticalSamples) {
  const std::vector<double> x{5, 5, 5}, y{5, 5, 5};
  const auto r = mann_whitney_u(x, y);
  EXPECT_EQ(r.u_x, 4.5);
  EXPECT_EQ(r.p_value, 1.0);
  const std::vector<double> a{1, 2, 3, 4}, b{1, 2, 3, 4};
  const auto s = mann_whitney_u(a, b);
  EXPECT_EQ(s.u_x, 8.0);
  EXPECT_EQ(s.p_value, 1.0);
}

TEST(MannWhitney, CompleteSeparationNormal) {
  const auto r = mann_whitney_u(range(1, 30), range(31, 60));
  EXPECT_FALSE(r.exact);
  EXPECT_NEAR(r.z, 6.65, 0.01);
  EXPECT_LT(r.p_value, 0.001);
}

TEST(MannWhitney, EmptySampleIsAnError) {
  EXPECT_THROW(mann_whitney_u(std::vector<double>{}, std::vector<double>{1}), Error);
  EXPECT_THROW(mann_whitney_u(std::vector<double>{1, 1}, std::vector<double>{1, 2}, PValueMethod::exact), Error);
}

TEST(MannWhitney, SymmetricUnderSwap) {
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> x(1 + rng.below(25)), y(1 + rng.below(25));
    for (double& v : x) v = static_cast<double>(rng.below(15));
    for (double& v : y) v = static_cast<double>(rng.below(15));
    const auto a = mann_whitney_u(x, y);
    const auto b = mann_whitney_u(y, x);
    ASSERT_DOUBLE_EQ(a.u_x, b.u_y);
    ASSERT_DOUBLE_EQ(a.u_x + a.u_y, static_cast<double>(x.size() * y.size()));
    ASSERT_NEAR(a.p_value, b.p_value, 1e-12);
    ASSERT_EQ(a.smaller, -b.smaller);
  }
}

TEST(MannWhitney, ExactMatchesBruteEnumeration) {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(8);
    const std::size_t m = 1 + rng.below(8);
    auto values = sample_universe(1000, n + m, rng);
    std::vector<double> x(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(n));
    std::vector<double> y(values.begin() + static_cast<std::ptrdiff_t>(n), values.end());
    const auto r = mann_whitney_u(x, y, PValueMethod::exact);
    ASSERT_NEAR(r.p_value, brute_exact_p(x, y), 1e-12);
  }
}

TEST(MannWhitney, CountDistributionSumsToBinomial) {
  for (std::size_t n = 1; n <= 10; ++n) {
    for (std::size_t m = 1; m <= 10; ++m) {
      const auto counts = detail::mann_whitney_counts(n, m);
      double total = 0;
      for (double c : counts) total += c;
      ASSERT_EQ(total, binomial(n + m, n).value());
      for (std::size_t u = 0; u < counts.size(); ++u) ASSERT_EQ(counts[u], counts[counts.size() - 1 - u]);
    }
  }
}

TEST(MannWhitney, ExactAndNormalAgreeAtTen) {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    auto values = sample_universe(100000, 20, rng);
    std::vector<double> x(values.begin(), values.begin() + 10), y(values.begin() + 10, values.end());
    const double exact = mann_whitney_u(x, y, PValueMethod::exact).p_value;
    const double normal = mann_whitney_u(x, y, PValueMethod::normal).p_value;
    EXPECT_NEAR(exact, normal, 0.02);
  }
}

TEST(MannWhitney, TiesUseNormalApproximation) {
  const std::vector<double> x{1, 2, 2, 3}, y{2, 3, 4, 4};
  const auto r = mann_whitney_u(x, y);
  EXPECT_FALSE(r.exact);
  // Rank sum of x with midranks: 1 + 3 + 3 + 5.5.
  EXPECT_DOUBLE_EQ(r.u_x, 12.5 - 10.0);
}
