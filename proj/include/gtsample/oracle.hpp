#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gtsample/combinatorics.hpp"
#include "gtsample/error.hpp"
#include "gtsample/rng.hpp"

namespace gtsample {

using NodeId = std::uint32_t;

/// A set of nodes in canonical (strictly ascending) form.
class KSet {
 public:
  KSet() = default;

  /// Canonicalizes `members`; duplicates are rejected.
  explicit KSet(std::vector<NodeId> members) : members_(std::move(members)) {
    std::sort(members_.begin(), members_.end());
    if (std::adjacent_find(members_.begin(), members_.end()) != members_.end()) {
      throw Error(ErrorCode::invalid_argument, "k-set contains a duplicate node");
    }
  }

  KSet(std::initializer_list<NodeId> members) : KSet(std::vector<NodeId>(members)) {}

  static KSet from(std::span<const NodeId> nodes) { return KSet(std::vector<NodeId>(nodes.begin(), nodes.end())); }

  std::size_t size() const noexcept { return members_.size(); }
  bool empty() const noexcept { return members_.empty(); }
  NodeId front() const { return members_.front(); }
  NodeId back() const { return members_.back(); }
  std::span<const NodeId> members() const noexcept { return members_; }
  auto begin() const noexcept { return members_.begin(); }
  auto end() const noexcept { return members_.end(); }

  /// True if every member of `other` is in this set.
  bool includes(const KSet& other) const {
    return std::includes(members_.begin(), members_.end(), other.members_.begin(), other.members_.end());
  }

  friend auto operator<=>(const KSet&, const KSet&) = default;
  friend bool operator==(const KSet&, const KSet&) = default;

 private:
  std::vector<NodeId> members_;
};

namespace detail {

// Per-thread membership bitmap over the universe, cleared after each use.
class MembershipMarks {
 public:
  MembershipMarks(std::size_t universe_size, std::span<const NodeId> nodes) : nodes_(nodes) {
    auto& marks = buffer();
    if (marks.size() < universe_size) marks.resize(universe_size, 0);
    for (NodeId x : nodes_) marks[x] = 1;
  }
  ~MembershipMarks() {
    auto& marks = buffer();
    for (NodeId x : nodes_) marks[x] = 0;
  }
  MembershipMarks(const MembershipMarks&) = delete;
  MembershipMarks& operator=(const MembershipMarks&) = delete;

  bool covers(std::span<const NodeId> s) const {
    const auto& marks = buffer();
    for (NodeId x : s) {
      if (!marks[x]) return false;
    }
    return true;
  }

 private:
  static std::vector<std::uint8_t>& buffer() {
    thread_local std::vector<std::uint8_t> marks;
    return marks;
  }

  std::span<const NodeId> nodes_;
};

}  // namespace detail

/// Ground-truth antichain of minimal defective sets over nodes [0, N).
///
/// Immutable after construction. Two indexes are kept: sets keyed by their
/// smallest member, stored flat as (size, remaining members) records, for
/// "does S contain a planted set" queries; and set indices keyed by every
/// member, for "is S contained in a planted set" checks.
class PlantedFamily {
 public:
  PlantedFamily() = default;

  PlantedFamily(std::size_t universe_size, std::vector<KSet> planted, std::uint64_t seed = 0)
      : universe_size_(universe_size), planted_(std::move(planted)), seed_(seed) {
    by_min_.resize(universe_size_);
    by_member_.resize(universe_size_);
    for (const KSet& s : planted_) {
      if (s.size() < 2) throw Error(ErrorCode::invalid_k, "planted sets must have at least 2 members");
      if (s.back() >= universe_size_) throw Error(ErrorCode::invalid_argument, "planted node outside universe");
    }
    std::vector<const KSet*> order;
    order.reserve(planted_.size());
    for (const KSet& s : planted_) order.push_back(&s);
    std::sort(order.begin(), order.end(), [](const KSet* a, const KSet* b) { return *a < *b; });
    if (std::adjacent_find(order.begin(), order.end(), [](const KSet* a, const KSet* b) { return *a == *b; }) !=
        order.end()) {
      throw Error(ErrorCode::antichain_violation, "duplicate planted set");
    }
    for (std::size_t i = 0; i < planted_.size(); ++i) index(i);
    for (const KSet& s : planted_) {
      if (count_within(s.members(), 2, s.size() - 1, 1) > 0) {
        throw Error(ErrorCode::antichain_violation, "a planted set contains another planted set");
      }
    }
  }

  std::size_t universe_size() const noexcept { return universe_size_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const std::vector<KSet>& planted() const noexcept { return planted_; }
  std::size_t size() const noexcept { return planted_.size(); }

  std::map<std::size_t, std::size_t> counts_by_k() const {
    std::map<std::size_t, std::size_t> counts;
    for (const KSet& s : planted_) ++counts[s.size()];
    return counts;
  }

  /// Planted sets lying entirely inside `nodes` with size in [min_size, max_size],
  /// counted up to `limit`. Nodes must be in range and distinct.
  std::size_t count_within(std::span<const NodeId> nodes, std::size_t min_size, std::size_t max_size,
                           std::size_t limit = SIZE_MAX) const {
    if (limit == 0) return 0;
    const detail::MembershipMarks marks(universe_size_, nodes);
    std::size_t n = 0;
    for (NodeId x : nodes) {
      const std::span<const NodeId> records = by_min_[x];
      for (std::size_t i = 0; i < records.size(); i += records[i]) {
        const std::size_t k = records[i];
        if (k < min_size || k > max_size || !marks.covers(records.subspan(i + 1, k - 1))) continue;
        if (++n >= limit) return n;
      }
    }
    return n;
  }

  /// True if `candidate` contains, or is contained in, some planted set.
  /// With `self_present`, an identical planted set is not counted.
  bool violates_antichain(const KSet& candidate, bool self_present = false) const {
    if (candidate.empty()) return false;
    const std::size_t largest_subset = self_present ? candidate.size() - 1 : candidate.size();
    if (count_within(candidate.members(), 2, largest_subset, 1) > 0) return true;
    if (candidate.size() >= max_size_) return false;
    for (std::uint32_t idx : by_member_[candidate.front()]) {
      const KSet& p = planted_[idx];
      if (p.size() > candidate.size() && p.includes(candidate)) return true;
    }
    return false;
  }

 private:
  friend PlantedFamily generate_family(std::size_t, const std::map<std::size_t, std::size_t>&, std::uint64_t,
                                       std::size_t);

  void index(std::size_t i) {
    const KSet& s = planted_[i];
    auto& records = by_min_[s.front()];
    records.push_back(static_cast<NodeId>(s.size()));
    records.insert(records.end(), s.begin() + 1, s.end());
    for (NodeId x : s) by_member_[x].push_back(static_cast<std::uint32_t>(i));
    max_size_ = std::max(max_size_, s.size());
  }

  std::size_t universe_size_ = 0;
  std::vector<KSet> planted_;
  std::uint64_t seed_ = 0;
  std::size_t max_size_ = 0;
  std::vector<std::vector<NodeId>> by_min_;
  std::vector<std::vector<std::uint32_t>> by_member_;
};

/// Draws a planted antichain with exactly `counts_by_k[k]` sets of each size k.
///
/// Sizes are drawn smallest first; each candidate is a uniform k-subset and is
/// redrawn if it duplicates, contains, or is contained in an accepted set.
/// `attempts_per_set` bounds the redraws before giving up.
inline PlantedFamily generate_family(std::size_t universe_size, const std::map<std::size_t, std::size_t>& counts_by_k,
                                     std::uint64_t seed, std::size_t attempts_per_set = 200) {
  for (const auto& [k, count] : counts_by_k) {
    if (k < 2) throw Error(ErrorCode::invalid_k, "planted set size " + std::to_string(k) + " is below 2");
    if (count == 0) continue;
    if (k > universe_size) {
      throw Error(ErrorCode::infeasible_counts, "set size " + std::to_string(k) + " exceeds universe size");
    }
    const auto available = binomial(universe_size, k);
    if (available && count > *available) {
      throw Error(ErrorCode::infeasible_counts, "requested " + std::to_string(count) + " sets of size " +
                                                    std::to_string(k) + " but only " + std::to_string(*available) +
                                                    " exist");
    }
  }

  PlantedFamily family;
  family.universe_size_ = universe_size;
  family.seed_ = seed;
  family.by_min_.resize(universe_size);
  family.by_member_.resize(universe_size);

  Rng rng = Rng::derive(seed, {static_cast<std::uint64_t>(StreamRole::family)});
  std::vector<NodeId> scratch;
  for (const auto& [k, count] : counts_by_k) {
    const std::size_t budget = attempts_per_set * count + 1000;
    std::size_t attempts = 0;
    std::size_t made = 0;
    family.planted_.reserve(family.planted_.size() + count);
    while (made < count) {
      if (attempts++ >= budget) {
        throw Error(ErrorCode::infeasible_counts, "could not place " + std::to_string(count) + " antichain sets of size " +
                                                      std::to_string(k) + " (placed " + std::to_string(made) + ")");
      }
      // Floyd's algorithm for a uniform k-subset.
      scratch.clear();
      for (std::size_t j = universe_size - k; j < universe_size; ++j) {
        auto t = static_cast<NodeId>(rng.below(j + 1));
        if (std::find(scratch.begin(), scratch.end(), t) != scratch.end()) t = static_cast<NodeId>(j);
        scratch.push_back(t);
      }
      KSet candidate(scratch);
      if (family.violates_antichain(candidate)) continue;
      family.planted_.push_back(std::move(candidate));
      family.index(family.planted_.size() - 1);
      ++made;
    }
  }
  return family;
}

/// Noise-free truth: does `nodes` contain some planted set?
inline bool contains_defective(const PlantedFamily& family, std::span<const NodeId> nodes) {
  for (NodeId x : nodes) {
    if (x >= family.universe_size()) throw Error(ErrorCode::invalid_argument, "node outside universe");
  }
  return family.count_within(nodes, 0, SIZE_MAX, 1) > 0;
}

inline bool contains_defective(const PlantedFamily& family, const KSet& s) {
  return contains_defective(family, s.members());
}

/// Number of planted sets of size `k` lying entirely inside `nodes` (distinct nodes).
inline std::size_t count_contained(const PlantedFamily& family, std::span<const NodeId> nodes, std::size_t k) {
  return family.count_within(nodes, k, k);
}

struct OracleConfig {
  double false_negative_rate = 0.0;
  double positive_cost = 1.0;  // negative tests cost 1
  std::uint64_t seed = 0;

  void validate() const {
    if (!(false_negative_rate >= 0.0 && false_negative_rate < 1.0)) {
      throw Error(ErrorCode::invalid_argument, "false-negative rate must lie in [0, 1)");
    }
    if (!(positive_cost > 0.0)) throw Error(ErrorCode::invalid_argument, "positive cost must be > 0");
  }
};

struct TestLedger {
  std::uint64_t positives = 0;
  std::uint64_t negatives = 0;

  std::uint64_t total() const noexcept { return positives + negatives; }
  double cost(double rho) const noexcept {
    return static_cast<double>(positives) * rho + static_cast<double>(negatives);
  }

  TestLedger& operator+=(const TestLedger& o) noexcept {
    positives += o.positives;
    negatives += o.negatives;
    return *this;
  }
  friend TestLedger operator+(TestLedger a, const TestLedger& b) noexcept { return a += b; }
  friend TestLedger operator-(const TestLedger& a, const TestLedger& b) noexcept {
    return {a.positives - b.positives, a.negatives - b.negatives};
  }
  friend bool operator==(const TestLedger&, const TestLedger&) = default;
};

/// Defectiveness oracle over a planted family with i.i.d. false negatives.
///
/// Stateless apart from its configuration: the caller supplies the ledger
/// to charge and the noise stream, so one oracle serves many concurrent runs.
class Oracle {
 public:
  Oracle(const PlantedFamily& family, OracleConfig config) : family_(&family), config_(config) { config_.validate(); }

  const PlantedFamily& family() const noexcept { return *family_; }
  const OracleConfig& config() const noexcept { return config_; }

  /// One charged test. A false negative is charged as a negative.
  bool is_defective(std::span<const NodeId> nodes, TestLedger& ledger, Rng& noise) const {
    bool result = contains_defective(*family_, nodes);
    if (result && config_.false_negative_rate > 0.0 && noise.bernoulli(config_.false_negative_rate)) result = false;
    if (result) {
      ++ledger.positives;
    } else {
      ++ledger.negatives;
    }
    return result;
  }

 private:
  const PlantedFamily* family_;
  OracleConfig config_;
};

/// A single run's view of an oracle: owns the run's ledger and noise stream.
///
/// The first test draws its noise from `opening` so that paired runs,
/// which share that stream, agree on the verdict for their shared initial
/// sample. Later tests draw from `noise`.
class OracleSession {
 public:
  OracleSession(const Oracle& oracle, Rng opening, Rng noise)
      : oracle_(&oracle), opening_(opening), noise_(noise) {}

  OracleSession(const Oracle& oracle, Rng noise) : OracleSession(oracle, noise, noise) { opened_ = true; }

  bool is_defective(std::span<const NodeId> nodes) {
    if (!opened_) {
      opened_ = true;
      return oracle_->is_defective(nodes, ledger_, opening_);
    }
    return oracle_->is_defective(nodes, ledger_, noise_);
  }

  const TestLedger& ledger() const noexcept { return ledger_; }
  const Oracle& oracle() const noexcept { return *oracle_; }

 private:
  const Oracle* oracle_;
  Rng opening_;
  Rng noise_;
  TestLedger ledger_;
  bool opened_ = false;
};

/// `count` distinct elements of `pool`, chosen uniformly, in uniformly random order.
inline std::vector<NodeId> sample(std::span<const NodeId> pool, std::size_t count, Rng& rng) {
  if (count > pool.size()) {
    throw Error(ErrorCode::count_exceeds_pool,
                "cannot draw " + std::to_string(count) + " from a pool of " + std::to_string(pool.size()));
  }
  std::vector<NodeId> work(pool.begin(), pool.end());
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(work.size() - i));
    std::swap(work[i], work[j]);
  }
  work.resize(count);
  return work;
}

/// Sample from the whole universe [0, universe_size).
inline std::vector<NodeId> sample_universe(std::size_t universe_size, std::size_t count, Rng& rng) {
  std::vector<NodeId> pool(universe_size);
  std::iota(pool.begin(), pool.end(), NodeId{0});
  return sample(pool, count, rng);
}

// JSON: {"universe_size": N, "planted": [[...], ...], "seed": s}
inline void to_json(nlohmann::ordered_json& j, const PlantedFamily& family) {
  auto planted = nlohmann::ordered_json::array();
  for (const KSet& s : family.planted()) {
    planted.push_back(std::vector<NodeId>(s.begin(), s.end()));
  }
  j = nlohmann::ordered_json{{"universe_size", family.universe_size()}, {"planted", planted}, {"seed", family.seed()}};
}

inline PlantedFamily family_from_json(const nlohmann::json& j) {
  try {
    const auto n = j.at("universe_size").get<std::size_t>();
    std::vector<KSet> planted;
    for (const auto& entry : j.at("planted")) {
      auto members = entry.get<std::vector<NodeId>>();
      if (!std::is_sorted(members.begin(), members.end())) {
        throw Error(ErrorCode::parse_error, "planted set is not in ascending order");
      }
      planted.emplace_back(std::move(members));
    }
    const auto seed = j.contains("seed") ? j.at("seed").get<std::uint64_t>() : std::uint64_t{0};
    return PlantedFamily(n, std::move(planted), seed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, e.what());
  }
}

}  // namespace gtsample
