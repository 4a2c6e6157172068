#pragma once

// Paired SIGHT/RC experiments: execution over an a0 grid, per-find cost
// amortization, cell summaries, and the run-log / summary-CSV writers.

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "gtsample/bounds.hpp"
#include "gtsample/error.hpp"
#include "gtsample/oracle.hpp"
#include "gtsample/rc.hpp"
#include "gtsample/run_result.hpp"
#include "gtsample/sight.hpp"
#include "gtsample/stats.hpp"

namespace gtsample {

inline const std::vector<double>& standard_cost_ratios() {
  static const std::vector<double> ratios{1, 10, 50, 100};
  return ratios;
}

struct ExperimentConfig {
  std::string label = "family";
  std::vector<std::size_t> a0_grid{16, 48, 80, 112, 144, 176};
  std::size_t k_min = 2;
  std::size_t k_max = 4;
  std::size_t t_max = 20;
  double false_negative_rate = 0.0;
  std::size_t runs = 1000;
  std::uint64_t seed = 0;
  std::vector<double> cost_ratios = standard_cost_ratios();
  unsigned threads = 1;

  void validate(std::size_t universe_size) const {
    if (runs < 1) throw Error(ErrorCode::invalid_argument, "runs per cell must be at least 1");
    if (a0_grid.empty()) throw Error(ErrorCode::invalid_a0, "a0 grid is empty");
    for (std::size_t a0 : a0_grid) {
      SightConfig{a0, k_min, k_max}.validate(universe_size);
      RcConfig{a0, k_min, k_max, t_max}.validate(universe_size);
    }
    OracleConfig{false_negative_rate, 1.0, seed}.validate();
    for (double rho : cost_ratios) {
      if (!(rho > 0)) throw Error(ErrorCode::invalid_argument, "cost ratios must be positive");
    }
  }
};

/// positives * rho + negatives
inline double cost_at_ratio(double positives, double negatives, double rho) {
  if (!(rho > 0)) throw Error(ErrorCode::invalid_argument, "cost ratio must be positive");
  return positives * rho + negatives;
}

inline double cost_at_ratio(const TestLedger& ledger, double rho) {
  return cost_at_ratio(static_cast<double>(ledger.positives), static_cast<double>(ledger.negatives), rho);
}

/// Names of the worst-case bounds `run` exceeds; empty when compliant.
inline std::vector<std::string> bound_violations(const RunResult& run, std::size_t k_min, std::size_t k_max,
                                                 std::size_t t_max) {
  std::vector<std::string> out;
  if (run.algorithm == Algorithm::sight) {
    if (run.ledger.total() > sight_max_tests(run.a0, k_min, k_max)) out.emplace_back("sight_max_tests");
    if (run.before_bottom_up.positives > sight_max_positive(run.a0, k_max)) out.emplace_back("sight_max_positive");
  } else {
    const ReductionSchedule schedule = build_schedule(run.a0, k_max);
    if (run.ledger.total() > rc_max_tests(schedule, t_max, k_min, k_max)) out.emplace_back("rc_max_tests");
    if (run.ledger.positives > rc_max_positive(schedule.length())) out.emplace_back("rc_max_positive");
  }
  return out;
}

struct PairedRun {
  RunResult sight;
  RunResult rc;
};

/// Runs `config.runs` paired SIGHT/RC runs at initial size `a0`.
///
/// Pair j draws its initial sample from the (seed, a0, j, initial) stream,
/// so both algorithms start from the same ordered set and see the same
/// verdict on it. Work is spread over `config.threads` workers; the result
/// is ordered by pair id and independent of the thread count. Any run that
/// breaks a worst-case bound raises a bound-violation error.
inline std::vector<PairedRun> run_paired_cell(const Oracle& oracle, const ExperimentConfig& config, std::size_t a0) {
  config.validate(oracle.family().universe_size());
  std::vector<PairedRun> pairs(config.runs);
  const SightConfig sight_cfg{a0, config.k_min, config.k_max};
  const RcConfig rc_cfg{a0, config.k_min, config.k_max, config.t_max};

  auto run_one = [&](std::size_t j) {
    PairedRun& p = pairs[j];
    p.sight = run_sight(oracle, sight_cfg, RunStreams::for_run(config.seed, a0, j, Algorithm::sight));
    p.rc = run_rc(oracle, rc_cfg, RunStreams::for_run(config.seed, a0, j, Algorithm::rc));
    for (RunResult* r : {&p.sight, &p.rc}) {
      r->seed = config.seed;
      r->pair = j;
      if (auto bad = bound_violations(*r, config.k_min, config.k_max, config.t_max); !bad.empty()) {
        throw Error(ErrorCode::bound_violation, std::string(to_string(r->algorithm)) + " run " + std::to_string(j) +
                                                    " at a0=" + std::to_string(a0) + " exceeds " + bad.front());
      }
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(config.runs)));
  if (workers == 1) {
    for (std::size_t j = 0; j < config.runs; ++j) run_one(j);
    return pairs;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t j = next++; j < config.runs; j = next++) {
        try {
          run_one(j);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return pairs;
}

/// A successful find with the cost of the aborted runs preceding it.
struct FindRecord {
  Algorithm algorithm = Algorithm::sight;
  KSet found;
  std::size_t k = 0;
  TestLedger own;
  TestLedger amortized;
  std::size_t pair = 0;
};

struct Amortization {
  std::vector<FindRecord> finds;
  TestLedger residue;  // aborts after the last find
  std::size_t trailing_aborts = 0;
};

/// Attributes every aborted run's tests to the next find in sequence.
inline Amortization amortize(std::span<const RunResult> results) {
  Amortization out;
  TestLedger pending;
  std::size_t pending_runs = 0;
  for (const RunResult& r : results) {
    if (!r.is_found()) {
      pending += r.ledger;
      ++pending_runs;
      continue;
    }
    FindRecord rec;
    rec.algorithm = r.algorithm;
    rec.found = *r.found;
    rec.k = r.found->size();
    rec.own = r.ledger;
    rec.amortized = r.ledger + pending;
    rec.pair = r.pair;
    out.finds.push_back(std::move(rec));
    pending = {};
    pending_runs = 0;
  }
  out.residue = pending;
  out.trailing_aborts = pending_runs;
  return out;
}

struct CellSummary {
  Algorithm algorithm = Algorithm::sight;
  std::size_t a0 = 0;
  std::size_t runs = 0;
  std::size_t finds = 0;
  std::size_t initial_failures = 0;
  std::size_t mid_aborts = 0;
  double init_fail_rate = 0;
  std::optional<double> abort_rate;  // among runs whose initial set tested defective
  std::optional<double> median_positives;
  std::optional<double> median_negatives;
  std::optional<double> median_total;
  std::map<std::size_t, double> k_proportions;
  std::optional<double> prop_identical;
  std::vector<double> cost_ratios;
  std::vector<std::optional<double>> expected_costs;  // per ratio, from the medians
  TestLedger residue;
  std::vector<double> amortized_positives;
  std::vector<double> amortized_negatives;
  std::vector<double> amortized_total;
  // Mann-Whitney of this algorithm (x) against its partner (y); absent without a partner or finds.
  std::optional<MannWhitneyResult> total_test;
  std::optional<MannWhitneyResult> positive_test;
  std::optional<MannWhitneyResult> negative_test;

  std::optional<double> cost_at(double rho) const {
    for (std::size_t i = 0; i < cost_ratios.size(); ++i) {
      if (cost_ratios[i] == rho) return expected_costs[i];
    }
    if (!median_positives || !median_negatives) return std::nullopt;
    return cost_at_ratio(*median_positives, *median_negatives, rho);
  }
};

namespace detail {

inline CellSummary summarize_one(std::span<const RunResult> own, std::span<const RunResult> partner,
                                 std::span<const double> cost_ratios) {
  if (own.empty()) throw Error(ErrorCode::empty_cell, "cannot summarize a cell with no runs");
  CellSummary s;
  s.algorithm = own.front().algorithm;
  s.a0 = own.front().a0;
  s.runs = own.size();
  std::map<std::size_t, std::size_t> k_counts;
  for (const RunResult& r : own) {
    if (r.is_found()) {
      ++s.finds;
      ++k_counts[r.k()];
    } else if (r.outcome == Outcome::abort_initial) {
      ++s.initial_failures;
    } else {
      ++s.mid_aborts;
    }
  }
  s.init_fail_rate = static_cast<double>(s.initial_failures) / static_cast<double>(s.runs);
  if (s.runs > s.initial_failures) {
    s.abort_rate = static_cast<double>(s.mid_aborts) / static_cast<double>(s.runs - s.initial_failures);
  }
  for (const auto& [k, c] : k_counts) s.k_proportions[k] = static_cast<double>(c) / static_cast<double>(s.finds);

  const Amortization am = amortize(own);
  s.residue = am.residue;
  for (const FindRecord& f : am.finds) {
    s.amortized_positives.push_back(static_cast<double>(f.amortized.positives));
    s.amortized_negatives.push_back(static_cast<double>(f.amortized.negatives));
    s.amortized_total.push_back(static_cast<double>(f.amortized.total()));
  }
  s.median_positives = median(s.amortized_positives);
  s.median_negatives = median(s.amortized_negatives);
  s.median_total = median(s.amortized_total);
  s.cost_ratios.assign(cost_ratios.begin(), cost_ratios.end());
  for (double rho : cost_ratios) {
    if (s.median_positives && s.median_negatives) {
      s.expected_costs.emplace_back(cost_at_ratio(*s.median_positives, *s.median_negatives, rho));
    } else {
      s.expected_costs.emplace_back(std::nullopt);
    }
  }

  if (!partner.empty()) {
    if (partner.size() != own.size()) throw Error(ErrorCode::invalid_argument, "paired sequences differ in length");
    std::size_t both = 0;
    std::size_t same = 0;
    for (std::size_t i = 0; i < own.size(); ++i) {
      if (own[i].is_found() && partner[i].is_found()) {
        ++both;
        if (*own[i].found == *partner[i].found) ++same;
      }
    }
    if (both > 0) s.prop_identical = static_cast<double>(same) / static_cast<double>(both);
  }
  return s;
}

}  // namespace detail

/// Summary of one algorithm's run sequence in a cell; `partner` holds the
/// other algorithm's runs in the same pair order (may be empty).
inline CellSummary summarize_cell(std::span<const RunResult> own, std::span<const RunResult> partner,
                                  std::span<const double> cost_ratios = standard_cost_ratios()) {
  CellSummary s = detail::summarize_one(own, partner, cost_ratios);
  if (!partner.empty() && !s.amortized_total.empty()) {
    const Amortization other = amortize(partner);
    if (!other.finds.empty()) {
      std::vector<double> pos, neg, tot;
      for (const FindRecord& f : other.finds) {
        pos.push_back(static_cast<double>(f.amortized.positives));
        neg.push_back(static_cast<double>(f.amortized.negatives));
        tot.push_back(static_cast<double>(f.amortized.total()));
      }
      s.total_test = mann_whitney_u(s.amortized_total, tot);
      s.positive_test = mann_whitney_u(s.amortized_positives, pos);
      s.negative_test = mann_whitney_u(s.amortized_negatives, neg);
    }
  }
  return s;
}

struct CellResult {
  std::size_t a0 = 0;
  std::vector<PairedRun> pairs;
  CellSummary sight;
  CellSummary rc;
};

inline CellResult summarize_pairs(std::size_t a0, std::vector<PairedRun> pairs, std::span<const double> ratios) {
  CellResult cell;
  cell.a0 = a0;
  std::vector<RunResult> sight, rc;
  for (const PairedRun& p : pairs) {
    sight.push_back(p.sight);
    rc.push_back(p.rc);
  }
  cell.sight = summarize_cell(sight, rc, ratios);
  cell.rc = summarize_cell(rc, sight, ratios);
  cell.pairs = std::move(pairs);
  return cell;
}

/// Runs and summarizes every a0 cell of the grid, in grid order.
inline std::vector<CellResult> run_experiment(const Oracle& oracle, const ExperimentConfig& config) {
  config.validate(oracle.family().universe_size());
  std::vector<CellResult> cells;
  for (std::size_t a0 : config.a0_grid) {
    cells.push_back(summarize_pairs(a0, run_paired_cell(oracle, config, a0), config.cost_ratios));
  }
  return cells;
}

/// Regroups a run log into cells by a0 (ascending) and pair id.
inline std::vector<CellResult> cells_from_runs(std::span<const RunResult> runs, std::span<const double> ratios) {
  std::map<std::size_t, std::map<std::size_t, PairedRun>> grouped;
  std::map<std::size_t, std::map<std::size_t, int>> seen;
  for (const RunResult& r : runs) {
    PairedRun& p = grouped[r.a0][r.pair];
    int& mask = seen[r.a0][r.pair];
    const int bit = r.algorithm == Algorithm::sight ? 1 : 2;
    if (mask & bit) throw Error(ErrorCode::parse_error, "duplicate run record for a0=" + std::to_string(r.a0));
    mask |= bit;
    (r.algorithm == Algorithm::sight ? p.sight : p.rc) = r;
  }
  std::vector<CellResult> cells;
  for (auto& [a0, by_pair] : grouped) {
    std::vector<PairedRun> pairs;
    for (auto& [id, p] : by_pair) {
      if (seen[a0][id] != 3) {
        throw Error(ErrorCode::parse_error, "unpaired run record for a0=" + std::to_string(a0));
      }
      pairs.push_back(std::move(p));
    }
    cells.push_back(summarize_pairs(a0, std::move(pairs), ratios));
  }
  return cells;
}

// ---- output ----

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string format_number(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

/// Newline-delimited JSON, one record per run, SIGHT before RC within each pair.
inline void write_run_log(std::ostream& out, std::span<const CellResult> cells) {
  for (const CellResult& cell : cells) {
    for (const PairedRun& p : cell.pairs) {
      out << to_json(p.sight).dump() << '\n';
      out << to_json(p.rc).dump() << '\n';
    }
  }
}

inline std::vector<RunResult> read_run_log(std::istream& in) {
  std::vector<RunResult> runs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      runs.push_back(run_result_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::parse_error, "run log line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return runs;
}

inline std::string ratio_label(double rho) {
  return "cost_r" + format_number(rho);
}

/// Header of the summary CSV; columns after p_value are extensions.
inline std::string summary_csv_header(std::span<const double> extra_ratios = {}) {
  std::string h =
      "algorithm,a0,T_label,finds,init_fail_rate,abort_rate,med_pos,med_neg,med_total,p2,p3,p4,prop_identical,"
      "cost_r1,cost_r10,cost_r50,cost_r100,U,p_value,U_pos,p_pos,U_neg,p_neg,runs,initial_failures,mid_aborts";
  for (double rho : extra_ratios) h += "," + ratio_label(rho);
  return h;
}

inline std::vector<double> nonstandard_ratios(std::span<const double> ratios) {
  std::vector<double> extra;
  for (double rho : ratios) {
    const auto& std_r = standard_cost_ratios();
    if (std::find(std_r.begin(), std_r.end(), rho) == std_r.end()) extra.push_back(rho);
  }
  return extra;
}

inline std::string summary_csv_row(const CellSummary& s, const std::string& label, std::span<const double> extra) {
  auto prop = [&](std::size_t k) -> std::string {
    if (s.finds == 0) return {};
    auto it = s.k_proportions.find(k);
    return format_number(it == s.k_proportions.end() ? 0.0 : it->second);
  };
  auto mw_u = [](const std::optional<MannWhitneyResult>& r) { return r ? format_number(r->u_x) : std::string(); };
  auto mw_p = [](const std::optional<MannWhitneyResult>& r) { return r ? format_number(r->p_value) : std::string(); };
  std::string row = std::string(to_string(s.algorithm)) + "," + std::to_string(s.a0) + "," + label + "," +
                    std::to_string(s.finds) + "," + format_number(s.init_fail_rate) + "," +
                    format_number(s.abort_rate) + "," + format_number(s.median_positives) + "," +
                    format_number(s.median_negatives) + "," + format_number(s.median_total) + "," + prop(2) + "," +
                    prop(3) + "," + prop(4) + "," + format_number(s.prop_identical);
  for (double rho : standard_cost_ratios()) row += "," + format_number(s.cost_at(rho));
  row += "," + mw_u(s.total_test) + "," + mw_p(s.total_test) + "," + mw_u(s.positive_test) + "," +
         mw_p(s.positive_test) + "," + mw_u(s.negative_test) + "," + mw_p(s.negative_test) + "," +
         std::to_string(s.runs) + "," + std::to_string(s.initial_failures) + "," + std::to_string(s.mid_aborts);
  for (double rho : extra) row += "," + format_number(s.cost_at(rho));
  return row;
}

/// Two rows per cell (SIGHT then RC), cells in the given order.
inline void write_summary_csv(std::ostream& out, std::span<const CellResult> cells, const std::string& label,
                              std::span<const double> ratios = standard_cost_ratios()) {
  const auto extra = nonstandard_ratios(ratios);
  out << summary_csv_header(extra) << '\n';
  for (const CellResult& cell : cells) {
    out << summary_csv_row(cell.sight, label, extra) << '\n';
    out << summary_csv_row(cell.rc, label, extra) << '\n';
  }
}

/// One-line human-readable digest of a cell.
inline std::string cell_digest(const CellResult& cell) {
  auto part = [](const CellSummary& s) {
    return std::string(to_string(s.algorithm)) + " finds=" + std::to_string(s.finds) +
           " med_pos=" + format_number(s.median_positives) + " med_neg=" + format_number(s.median_negatives) +
           " abort_rate=" + format_number(s.abort_rate);
  };
  std::string line = "a0=" + std::to_string(cell.a0) + " init_fail=" + format_number(cell.sight.init_fail_rate) +
                     " | " + part(cell.sight) + " | " + part(cell.rc);
  if (cell.sight.total_test) line += " | p_total=" + format_number(cell.sight.total_test->p_value);
  return line;
}

}  // namespace gtsample
