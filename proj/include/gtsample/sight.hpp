#pragma once

// Deterministic adaptive group testing: binary splitting over a randomly
// ordered sample, followed by a bottom-up minimality check.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gtsample/combinatorics.hpp"
#include "gtsample/error.hpp"
#include "gtsample/oracle.hpp"
#include "gtsample/rng.hpp"
#include "gtsample/run_result.hpp"

namespace gtsample {

struct SightConfig {
  std::size_t a0 = 0;
  std::size_t k_min = 2;
  std::size_t k_max = 4;

  void validate(std::size_t universe_size) const {
    if (k_min < 2) throw Error(ErrorCode::invalid_k, "k_min must be at least 2");
    if (k_max < k_min) throw Error(ErrorCode::invalid_k, "k_max must be >= k_min");
    if (a0 < k_max) throw Error(ErrorCode::invalid_a0, "a0 must be >= k_max");
    if (a0 >= universe_size) throw Error(ErrorCode::invalid_a0, "a0 must be smaller than the universe");
  }
};

/// Results of every test made during one SIGHT run, keyed by node set.
class TestRegistry {
 public:
  std::optional<bool> find(std::span<const NodeId> nodes) const {
    auto it = seen_.find(canonical(nodes));
    if (it == seen_.end()) return std::nullopt;
    return it->second;
  }

  void record(std::span<const NodeId> nodes, bool result) { seen_[canonical(nodes)] = result; }

  std::size_t size() const noexcept { return seen_.size(); }

 private:
  static std::vector<NodeId> canonical(std::span<const NodeId> nodes) {
    std::vector<NodeId> key(nodes.begin(), nodes.end());
    std::sort(key.begin(), key.end());
    return key;
  }

  std::map<std::vector<NodeId>, bool> seen_;
};

namespace detail {

template <DefectTester Tester>
bool charged_test(Tester& tester, TestRegistry* registry, std::span<const NodeId> nodes) {
  const bool result = tester.is_defective(nodes);
  if (registry) registry->record(nodes, result);
  return result;
}

// Reuses a recorded verdict when this exact node set was already tested.
template <DefectTester Tester>
bool registry_test(Tester& tester, TestRegistry& registry, std::span<const NodeId> nodes) {
  if (auto seen = registry.find(nodes)) return *seen;
  return charged_test(tester, &registry, nodes);
}

}  // namespace detail

/// Index m (1-based) of the leftmost element of `s` that completes a
/// defective set in `d` ++ `s`, found by halving on prefixes of `s`.
///
/// Every probe is charged; at most ceil(log2 |s|) probes are made. When the
/// tester can return false negatives the answer may be wrong.
template <DefectTester Tester>
std::size_t bin_search(std::span<const NodeId> s, std::span<const NodeId> d, Tester& tester,
                       TestRegistry* registry = nullptr) {
  if (s.empty()) throw Error(ErrorCode::empty_list, "binary search over an empty list");
  std::vector<NodeId> probe;
  probe.reserve(d.size() + s.size());
  std::size_t l = 1;
  std::size_t r = s.size();
  while (l < r) {
    const std::size_t i = (r - l + 1) / 2;  // ceil((r - l) / 2)
    probe.assign(d.begin(), d.end());
    probe.insert(probe.end(), s.begin(), s.begin() + static_cast<std::ptrdiff_t>(r - i));
    if (detail::charged_test(tester, registry, probe)) {
      r = r - i;
    } else {
      l = r - i + 1;
    }
  }
  return r;
}

/// Smallest defective subset of `d` not already settled by `registry`.
///
/// Subsets are visited by ascending size from k_min up to |d| - 1, in random
/// order within each size. Subsets already in the registry are skipped at no
/// cost. Returns `d` itself when no proper subset tests defective.
template <DefectTester Tester>
KSet bottom_up_sight(std::span<const NodeId> d, std::size_t k_min, std::size_t k_max, TestRegistry& registry,
                     Tester& tester, Rng& rng) {
  const std::size_t top = std::min(k_max + 1, d.size());
  std::vector<NodeId> subset;
  for (std::size_t k = k_min; k < top; ++k) {
    auto combos = index_combinations(d.size(), k);
    shuffle(combos.begin(), combos.end(), rng);
    for (const auto& combo : combos) {
      subset.clear();
      for (std::size_t idx : combo) subset.push_back(d[idx]);
      if (registry.find(subset)) continue;
      if (detail::charged_test(tester, &registry, subset)) return KSet::from(subset);
    }
  }
  return KSet::from(d);
}

struct SightTrace {
  Outcome outcome = Outcome::abort_initial;
  std::optional<KSet> found;
  TestLedger before_bottom_up;
};

/// SIGHT on a given ordered initial sample.
///
/// The first test made is the one on `initial_sample`. `choice` orders the
/// bottom-up candidates. If the working list empties before a defective set
/// is isolated (possible only under false negatives) the run aborts as too large.
template <DefectTester Tester>
SightTrace sight_from_sample(std::vector<NodeId> initial_sample, const SightConfig& config, Tester& tester,
                             Rng& choice) {
  SightTrace trace;
  TestRegistry registry;
  std::vector<NodeId> s = std::move(initial_sample);
  if (!detail::charged_test(tester, &registry, s)) {
    trace.outcome = Outcome::abort_initial;
    trace.before_bottom_up = tester.ledger();
    return trace;
  }
  std::vector<NodeId> d;
  while (d.size() < config.k_max) {
    if (s.empty()) break;
    const std::size_t m = bin_search(std::span<const NodeId>(s), std::span<const NodeId>(d), tester, &registry);
    d.push_back(s[m - 1]);
    if (d.size() >= config.k_min && detail::registry_test(tester, registry, d)) {
      trace.before_bottom_up = tester.ledger();
      trace.found = bottom_up_sight(d, config.k_min, config.k_max, registry, tester, choice);
      trace.outcome = Outcome::found;
      return trace;
    }
    s.resize(m - 1);
  }
  trace.outcome = Outcome::abort_too_large;
  trace.before_bottom_up = tester.ledger();
  return trace;
}

/// One complete SIGHT run against `oracle`: samples a0 nodes from the
/// universe with `streams.initial`, then searches.
inline RunResult run_sight(const Oracle& oracle, const SightConfig& config, RunStreams streams) {
  const std::size_t n = oracle.family().universe_size();
  config.validate(n);
  std::vector<NodeId> initial = sample_universe(n, config.a0, streams.initial);
  OracleSession session(oracle, streams.initial, streams.noise);
  SightTrace trace = sight_from_sample(std::move(initial), config, session, streams.choice);
  RunResult result;
  result.algorithm = Algorithm::sight;
  result.outcome = trace.outcome;
  result.found = std::move(trace.found);
  result.ledger = session.ledger();
  result.before_bottom_up = trace.before_bottom_up;
  result.a0 = config.a0;
  return result;
}

}  // namespace gtsample
