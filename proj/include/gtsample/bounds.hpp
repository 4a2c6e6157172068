#pragma once

// Closed-form worst-case test counts for both samplers, and the expected
// number of planted sets inside a uniformly random subset.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "gtsample/combinatorics.hpp"
#include "gtsample/error.hpp"
#include "gtsample/rc.hpp"

namespace gtsample {

using Rational = boost::multiprecision::cpp_rational;

namespace detail {

inline std::uint64_t checked(const BigInt& value, const char* what) {
  if (value > BigInt(UINT64_MAX)) throw Error(ErrorCode::overflow, std::string(what) + " exceeds 64 bits");
  return static_cast<std::uint64_t>(value);
}

inline void require_a0(std::uint64_t a0) {
  if (a0 < 2) throw Error(ErrorCode::invalid_a0, "a0 must be at least 2");
}

inline void require_k_range(std::uint64_t k_min, std::uint64_t k_max) {
  if (k_min > k_max) throw Error(ErrorCode::invalid_k, "k_min must not exceed k_max");
}

}  // namespace detail

/// k_max * ceil(log2 a0) + sum_{j=k_min}^{k_max} C(k_max, j) + 1
inline std::uint64_t sight_max_tests(std::uint64_t a0, std::uint64_t k_min, std::uint64_t k_max) {
  detail::require_a0(a0);
  detail::require_k_range(k_min, k_max);
  BigInt total = BigInt(k_max) * ceil_log2(a0) + 1;
  for (std::uint64_t j = k_min; j <= k_max; ++j) total += binomial_big(k_max, j);
  return detail::checked(total, "sight_max_tests");
}

/// k_max * ceil(log2 a0)
inline std::uint64_t sight_max_positive(std::uint64_t a0, std::uint64_t k_max) {
  detail::require_a0(a0);
  return detail::checked(BigInt(k_max) * ceil_log2(a0), "sight_max_positive");
}

/// 1 + (|A| - 1) t_max + sum_{k=k_min}^{k_max} C(a_final, k)
inline std::uint64_t rc_max_tests(const ReductionSchedule& schedule, std::uint64_t t_max, std::uint64_t k_min,
                                  std::uint64_t k_max) {
  detail::require_k_range(k_min, k_max);
  BigInt total = BigInt(schedule.length() - 1) * t_max + 1;
  for (std::uint64_t k = k_min; k <= k_max; ++k) total += binomial_big(schedule.final_size(), k);
  return detail::checked(total, "rc_max_tests");
}

/// |A| + 1
inline std::uint64_t rc_max_positive(std::uint64_t schedule_length) {
  if (schedule_length < 1) throw Error(ErrorCode::invalid_argument, "schedule length must be at least 1");
  return schedule_length + 1;
}

/// ceil(log2 a0) + 1, the logarithmic form of the RC positive-test bound.
/// The log base is not pinned down, so this is reported, never asserted.
inline std::uint64_t rc_log_positive_reference(std::uint64_t a0) {
  detail::require_a0(a0);
  return ceil_log2(a0) + 1;
}

/// C(M, k) / C(N, k) * omega_k: expected planted k-sets inside a uniform M-subset.
inline Rational expected_planted_count(std::uint64_t n, std::uint64_t m, std::uint64_t k, std::uint64_t omega_k) {
  if (m > n) throw Error(ErrorCode::invalid_argument, "subset size exceeds universe");
  if (k == 0 || k > n) throw Error(ErrorCode::invalid_k, "k must lie in [1, N]");
  return Rational(binomial_big(m, k) * omega_k, binomial_big(n, k));
}

/// Whether the expected (k+1):k planted ratio at subset size M is strictly
/// below the ratio at size M + c. Holds for every valid input.
inline bool ratio_monotone_check(std::uint64_t n, std::uint64_t m, std::uint64_t c, std::uint64_t k,
                                 std::uint64_t omega_k, std::uint64_t omega_k1) {
  if (c == 0 || k == 0 || k + 1 > m || m + c > n) {
    throw Error(ErrorCode::invalid_argument, "need k+1 <= M < M+c <= N");
  }
  if (omega_k == 0 || omega_k1 == 0) throw Error(ErrorCode::invalid_argument, "planted counts must be positive");
  const Rational small = expected_planted_count(n, m, k + 1, omega_k1) / expected_planted_count(n, m, k, omega_k);
  const Rational large =
      expected_planted_count(n, m + c, k + 1, omega_k1) / expected_planted_count(n, m + c, k, omega_k);
  return small < large;
}

}  // namespace gtsample
