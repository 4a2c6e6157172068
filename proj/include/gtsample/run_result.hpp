#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <json.hpp>

#include "gtsample/error.hpp"
#include "gtsample/oracle.hpp"

namespace gtsample {

/// Anything that answers charged defectiveness tests and reports its ledger.
template <class T>
concept DefectTester = requires(T& t, std::span<const NodeId> nodes) {
  { t.is_defective(nodes) } -> std::same_as<bool>;
  { t.ledger() } -> std::convertible_to<TestLedger>;
};

enum class Algorithm { sight, rc };

enum class Outcome {
  found,
  abort_initial,     // initial sample tested non-defective
  abort_too_large,   // SIGHT: no defective set of size <= k_max isolated
  abort_at_step,     // RC: a reduction step exhausted t_max attempts
  abort_no_minimal,  // RC: bottom-up search found nothing of size <= k_max
};

inline std::string_view to_string(Algorithm a) { return a == Algorithm::sight ? "sight" : "rc"; }

inline std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::found: return "found";
    case Outcome::abort_initial: return "abort_initial";
    case Outcome::abort_too_large: return "abort_too_large";
    case Outcome::abort_at_step: return "abort_at_step";
    case Outcome::abort_no_minimal: return "abort_no_minimal";
  }
  return "unknown";
}

inline Algorithm parse_algorithm(std::string_view s) {
  if (s == "sight") return Algorithm::sight;
  if (s == "rc") return Algorithm::rc;
  throw Error(ErrorCode::parse_error, "unknown algorithm '" + std::string(s) + "'");
}

inline Outcome parse_outcome(std::string_view s) {
  for (auto o : {Outcome::found, Outcome::abort_initial, Outcome::abort_too_large, Outcome::abort_at_step,
                 Outcome::abort_no_minimal}) {
    if (to_string(o) == s) return o;
  }
  throw Error(ErrorCode::parse_error, "unknown outcome '" + std::string(s) + "'");
}

/// Outcome of one SIGHT or RC run.
struct RunResult {
  Algorithm algorithm = Algorithm::sight;
  Outcome outcome = Outcome::abort_initial;
  std::optional<KSet> found;
  std::size_t abort_step = 0;  // RC reduction step index for abort_at_step
  TestLedger ledger;
  TestLedger before_bottom_up;  // ledger when the bottom-up search began (or at exit if it never did)
  std::size_t a0 = 0;
  std::uint64_t seed = 0;
  std::size_t pair = 0;

  bool is_found() const noexcept { return outcome == Outcome::found; }
  std::size_t k() const noexcept { return found ? found->size() : 0; }
};

/// Random streams for one run.
///
/// `initial` draws the initial sample and the noise of the test on it; in a
/// paired run both algorithms get the same `initial` stream. `noise` feeds
/// every later test and `choice` drives the algorithm's own random decisions.
struct RunStreams {
  Rng initial;
  Rng noise;
  Rng choice;

  /// Streams for run `index` of the (seed, a0) cell.
  static RunStreams for_run(std::uint64_t seed, std::size_t a0, std::size_t index, Algorithm algorithm) {
    const bool sight = algorithm == Algorithm::sight;
    const auto role = [&](StreamRole r) {
      return Rng::derive(seed, {static_cast<std::uint64_t>(a0), static_cast<std::uint64_t>(index),
                                static_cast<std::uint64_t>(r)});
    };
    return {role(StreamRole::initial), role(sight ? StreamRole::sight_noise : StreamRole::rc_noise),
            role(sight ? StreamRole::sight_choice : StreamRole::rc_choice)};
  }
};

/// One newline-delimited run-log record. Field order is part of the format.
inline nlohmann::ordered_json to_json(const RunResult& r) {
  nlohmann::ordered_json j;
  j["algorithm"] = to_string(r.algorithm);
  j["outcome"] = to_string(r.outcome);
  if (r.algorithm == Algorithm::rc) {
    if (r.outcome == Outcome::abort_at_step) {
      j["abort_step"] = r.abort_step;
    } else {
      j["abort_step"] = nullptr;
    }
  }
  if (r.found) {
    j["found_set"] = std::vector<NodeId>(r.found->begin(), r.found->end());
    j["k"] = r.found->size();
  } else {
    j["found_set"] = nullptr;
    j["k"] = nullptr;
  }
  j["positives"] = r.ledger.positives;
  j["negatives"] = r.ledger.negatives;
  j["a0"] = r.a0;
  j["seed"] = r.seed;
  j["pair"] = r.pair;
  return j;
}

inline RunResult run_result_from_json(const nlohmann::json& j) {
  try {
    RunResult r;
    r.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
    r.outcome = parse_outcome(j.at("outcome").get<std::string>());
    if (j.contains("abort_step") && !j.at("abort_step").is_null()) r.abort_step = j.at("abort_step").get<std::size_t>();
    if (!j.at("found_set").is_null()) r.found = KSet(j.at("found_set").get<std::vector<NodeId>>());
    r.ledger.positives = j.at("positives").get<std::uint64_t>();
    r.ledger.negatives = j.at("negatives").get<std::uint64_t>();
    r.before_bottom_up = r.ledger;
    r.a0 = j.at("a0").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("pair")) r.pair = j.at("pair").get<std::size_t>();
    if (r.is_found() != r.found.has_value()) throw Error(ErrorCode::parse_error, "found_set does not match outcome");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, e.what());
  }
}

}  // namespace gtsample
