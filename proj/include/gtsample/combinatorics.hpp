#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace gtsample {

using BigInt = boost::multiprecision::cpp_int;

/// Exact C(n, k) as an arbitrary-precision integer; zero when k > n.
inline BigInt binomial_big(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  BigInt result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    result *= n - k + i;
    result /= i;
  }
  return result;
}

/// C(n, k) if it fits in 64 bits.
inline std::optional<std::uint64_t> binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    // result * (n-k+i) / i stays integral at every step
    result = result * (n - k + i) / i;
    if (result > UINT64_MAX) return std::nullopt;
  }
  return static_cast<std::uint64_t>(result);
}

/// All k-combinations of {0, ..., n-1} as ascending index vectors, in lexicographic order.
inline std::vector<std::vector<std::size_t>> index_combinations(std::size_t n, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  if (k > n) return out;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    out.push_back(idx);
    std::size_t pos = k;
    while (pos > 0 && idx[pos - 1] == n - k + pos - 1) --pos;
    if (pos == 0) break;
    ++idx[pos - 1];
    for (std::size_t j = pos; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

/// Smallest c with 2^c >= n, for n >= 1.
constexpr std::uint64_t ceil_log2(std::uint64_t n) noexcept {
  std::uint64_t c = 0;
  while ((std::uint64_t{1} << c) < n) ++c;
  return c;
}

}  // namespace gtsample
