#pragma once

// Random Chemistry: stochastic subset reduction down a fixed size schedule,
// then an exhaustive bottom-up search of the final set.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "gtsample/combinatorics.hpp"
#include "gtsample/error.hpp"
#include "gtsample/oracle.hpp"
#include "gtsample/rng.hpp"
#include "gtsample/run_result.hpp"

namespace gtsample {

/// Strictly decreasing set sizes a0 > a1 > ... > a_final > k_max.
class ReductionSchedule {
 public:
  explicit ReductionSchedule(std::vector<std::size_t> sizes) : sizes_(std::move(sizes)) {
    if (sizes_.empty()) throw Error(ErrorCode::invalid_argument, "empty reduction schedule");
    for (std::size_t i = 1; i < sizes_.size(); ++i) {
      if (sizes_[i] >= sizes_[i - 1]) throw Error(ErrorCode::invalid_argument, "schedule must strictly decrease");
    }
  }

  const std::vector<std::size_t>& sizes() const noexcept { return sizes_; }
  std::size_t length() const noexcept { return sizes_.size(); }
  std::size_t a0() const noexcept { return sizes_.front(); }
  std::size_t final_size() const noexcept { return sizes_.back(); }

  friend bool operator==(const ReductionSchedule&, const ReductionSchedule&) = default;

 private:
  std::vector<std::size_t> sizes_;
};

/// Halve (rounding up) while the set is larger than 20, then divide by 1.5;
/// stop before the first size that would not exceed k_max.
inline ReductionSchedule build_schedule(std::size_t a0, std::size_t k_max) {
  if (a0 <= k_max) throw Error(ErrorCode::invalid_a0, "a0 must exceed k_max");
  std::vector<std::size_t> sizes{a0};
  while (true) {
    const std::size_t prev = sizes.back();
    // ceil(prev / 2) or ceil(prev / 1.5) = ceil(2 prev / 3)
    const std::size_t next = prev > 20 ? (prev + 1) / 2 : (2 * prev + 2) / 3;
    if (next <= k_max) break;
    sizes.push_back(next);
  }
  return ReductionSchedule(std::move(sizes));
}

struct RcConfig {
  std::size_t a0 = 0;
  std::size_t k_min = 2;
  std::size_t k_max = 4;
  std::size_t t_max = 20;

  void validate(std::size_t universe_size) const {
    if (k_min < 2) throw Error(ErrorCode::invalid_k, "k_min must be at least 2");
    if (k_max < k_min) throw Error(ErrorCode::invalid_k, "k_max must be >= k_min");
    if (a0 <= k_max) throw Error(ErrorCode::invalid_a0, "a0 must exceed k_max");
    if (a0 >= universe_size) throw Error(ErrorCode::invalid_a0, "a0 must be smaller than the universe");
    if (t_max < 1) throw Error(ErrorCode::invalid_argument, "t_max must be at least 1");
  }
};

/// First defective subset of `s` by ascending size, every subset tested in
/// random order within its size. No verdict is reused.
template <DefectTester Tester>
std::optional<KSet> bottom_up_rc(std::span<const NodeId> s, std::size_t k_min, std::size_t k_max, Tester& tester,
                                 Rng& rng) {
  const std::size_t top = std::min(k_max, s.size());
  std::vector<NodeId> subset;
  for (std::size_t k = k_min; k <= top; ++k) {
    auto combos = index_combinations(s.size(), k);
    shuffle(combos.begin(), combos.end(), rng);
    for (const auto& combo : combos) {
      subset.clear();
      for (std::size_t idx : combo) subset.push_back(s[idx]);
      if (tester.is_defective(subset)) return KSet::from(subset);
    }
  }
  return std::nullopt;
}

struct RcTrace {
  Outcome outcome = Outcome::abort_initial;
  std::optional<KSet> found;
  std::size_t abort_step = 0;  // schedule index that failed
  TestLedger before_bottom_up;
  std::vector<std::vector<NodeId>> accepted;  // sets that passed each completed step, initial sample first
};

/// Random Chemistry on a given initial sample of size schedule.a0().
/// `choice` drives the subset draws and the bottom-up order.
template <DefectTester Tester>
RcTrace rc_from_sample(std::vector<NodeId> initial_sample, const ReductionSchedule& schedule, std::size_t k_min,
                       std::size_t k_max, std::size_t t_max, Tester& tester, Rng& choice) {
  RcTrace trace;
  std::vector<NodeId> s = std::move(initial_sample);
  if (!tester.is_defective(s)) {
    trace.outcome = Outcome::abort_initial;
    trace.before_bottom_up = tester.ledger();
    return trace;
  }
  trace.accepted.push_back(s);
  for (std::size_t step = 1; step < schedule.length(); ++step) {
    bool advanced = false;
    for (std::size_t attempt = 0; attempt < t_max && !advanced; ++attempt) {
      std::vector<NodeId> candidate = sample(s, schedule.sizes()[step], choice);
      if (tester.is_defective(candidate)) {
        s = std::move(candidate);
        advanced = true;
      }
    }
    if (!advanced) {
      trace.outcome = Outcome::abort_at_step;
      trace.abort_step = step;
      trace.before_bottom_up = tester.ledger();
      return trace;
    }
    trace.accepted.push_back(s);
  }
  trace.before_bottom_up = tester.ledger();
  trace.found = bottom_up_rc(s, k_min, k_max, tester, choice);
  trace.outcome = trace.found ? Outcome::found : Outcome::abort_no_minimal;
  return trace;
}

/// One complete RC run against `oracle`.
inline RunResult run_rc(const Oracle& oracle, const RcConfig& config, RunStreams streams) {
  const std::size_t n = oracle.family().universe_size();
  config.validate(n);
  const ReductionSchedule schedule = build_schedule(config.a0, config.k_max);
  std::vector<NodeId> initial = sample_universe(n, config.a0, streams.initial);
  OracleSession session(oracle, streams.initial, streams.noise);
  RcTrace trace =
      rc_from_sample(std::move(initial), schedule, config.k_min, config.k_max, config.t_max, session, streams.choice);
  RunResult result;
  result.algorithm = Algorithm::rc;
  result.outcome = trace.outcome;
  result.found = std::move(trace.found);
  result.abort_step = trace.abort_step;
  result.ledger = session.ledger();
  result.before_bottom_up = trace.before_bottom_up;
  result.a0 = config.a0;
  return result;
}

}  // namespace gtsample
