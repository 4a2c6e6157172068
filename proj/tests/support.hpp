#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "gtsample/gtsample.hpp"

namespace gtsample::testing {

/// Noise-free tester over a family that records every probe it answers.
class RecordingTester {
 public:
  explicit RecordingTester(const PlantedFamily& family) : family_(&family) {}

  bool is_defective(std::span<const NodeId> nodes) {
    const bool r = contains_defective(*family_, nodes);
    probes.emplace_back(nodes.begin(), nodes.end());
    answers.push_back(r);
    ++(r ? ledger_.positives : ledger_.negatives);
    return r;
  }
  TestLedger ledger() const { return ledger_; }

  std::vector<std::vector<NodeId>> probes;
  std::vector<bool> answers;

 private:
  const PlantedFamily* family_;
  TestLedger ledger_;
};

/// Tester whose answers come from an arbitrary predicate.
class ScriptedTester {
 public:
  explicit ScriptedTester(std::function<bool(std::span<const NodeId>)> answer) : answer_(std::move(answer)) {}

  bool is_defective(std::span<const NodeId> nodes) {
    const bool r = answer_(nodes);
    ++(r ? ledger_.positives : ledger_.negatives);
    return r;
  }
  TestLedger ledger() const { return ledger_; }

 private:
  std::function<bool(std::span<const NodeId>)> answer_;
  TestLedger ledger_;
};

// Brute-force defectiveness: some planted set is a subset of `nodes`.
inline bool brute_defective(const PlantedFamily& family, std::span<const NodeId> nodes) {
  std::vector<NodeId> sorted(nodes.begin(), nodes.end());
  std::sort(sorted.begin(), sorted.end());
  for (const KSet& p : family.planted()) {
    if (std::includes(sorted.begin(), sorted.end(), p.begin(), p.end())) return true;
  }
  return false;
}

inline bool is_planted(const PlantedFamily& family, const KSet& s) {
  const auto& ps = family.planted();
  return std::find(ps.begin(), ps.end(), s) != ps.end();
}

// Random family over [0, n) with up to `max_sets` sets of sizes in [2, max_k].
inline PlantedFamily random_small_family(std::size_t n, std::size_t max_sets, std::size_t max_k, Rng& rng) {
  std::map<std::size_t, std::size_t> counts;
  const std::size_t total = 1 + rng.below(max_sets);
  for (std::size_t i = 0; i < total; ++i) ++counts[2 + rng.below(max_k - 1)];
  // Shrink requests until the antichain fits.
  for (;;) {
    try {
      return generate_family(n, counts, rng(), 50);
    } catch (const Error&) {
      auto it = std::prev(counts.end());
      if (--it->second == 0) counts.erase(it);
      if (counts.empty()) return PlantedFamily(n, {});
    }
  }
}

inline std::vector<NodeId> iota_nodes(std::size_t n) {
  std::vector<NodeId> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<NodeId>(i);
  return v;
}

}  // namespace gtsample::testing
