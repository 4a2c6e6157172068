#include <gtest/gtest.h>

#include <sstream>
#include <vector>

#include "support.hpp"

using namespace gtsample;

namespace {

RunResult aborted(std::uint64_t pos, std::uint64_t neg, Outcome outcome = Outcome::abort_too_large) {
  RunResult r;
  r.outcome = outcome;
  r.ledger = {pos, neg};
  return r;
}

RunResult found(std::uint64_t pos, std::uint64_t neg, KSet s) {
  RunResult r;
  r.outcome = Outcome::found;
  r.found = std::move(s);
  r.ledger = {pos, neg};
  return r;
}

KSet set_of_size(std::size_t k) {
  std::vector<NodeId> v;
  for (std::size_t i = 0; i < k; ++i) v.push_back(static_cast<NodeId>(i));
  return KSet(v);
}

}  // namespace

TEST(CostAtRatio, Examples) {
  EXPECT_EQ(cost_at_ratio(0, 0, 50), 0);
  EXPECT_EQ(cost_at_ratio(5, 2, 10), 52);
  EXPECT_EQ(cost_at_ratio(TestLedger{5, 2}, 1), 7);
  EXPECT_THROW(cost_at_ratio(1, 1, 0), Error);
}

TEST(Amortize, Examples) {
  const std::vector<RunResult> one{found(3, 5, KSet{1, 2})};
  auto a = amortize(one);
  ASSERT_EQ(a.finds.size(), 1u);
  EXPECT_EQ(a.finds[0].amortized, (TestLedger{3, 5}));

  const std::vector<RunResult> three{aborted(0, 1, Outcome::abort_initial), aborted(1, 4), found(2, 6, KSet{1, 2})};
  a = amortize(three);
  ASSERT_EQ(a.finds.size(), 1u);
  EXPECT_EQ(a.finds[0].amortized, (TestLedger{3, 11}));
  EXPECT_EQ(a.finds[0].own, (TestLedger{2, 6}));

  const std::vector<RunResult> none{aborted(0, 1, Outcome::abort_initial)};
  a = amortize(none);
  EXPECT_TRUE(a.finds.empty());
  EXPECT_EQ(a.residue, (TestLedger{0, 1}));
  EXPECT_EQ(a.trailing_aborts, 1u);
}

TEST(Amortize, ConservesTotals) {
  Rng rng(6);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<RunResult> runs;
    TestLedger total;
    const std::size_t len = rng.below(40);
    for (std::size_t i = 0; i < len; ++i) {
      const TestLedger l{rng.below(10), rng.below(30)};
      total += l;
      runs.push_back(rng.below(3) == 0 ? found(l.positives, l.negatives, KSet{1, 2}) : aborted(l.positives, l.negatives));
    }
    const auto a = amortize(runs);
    TestLedger sum = a.residue;
    for (const auto& f : a.finds) {
      sum += f.amortized;
      ASSERT_GE(f.amortized.positives, f.own.positives);
      ASSERT_GE(f.amortized.negatives, f.own.negatives);
    }
    ASSERT_EQ(sum, total);
  }
}

TEST(SummarizeCell, AllInitialFailures) {
  const std::vector<RunResult> runs(5, aborted(0, 1, Outcome::abort_initial));
  const auto s = summarize_cell(runs, {});
  EXPECT_EQ(s.init_fail_rate, 1.0);
  EXPECT_EQ(s.finds, 0u);
  EXPECT_EQ(s.abort_rate, std::nullopt);
  EXPECT_EQ(s.median_total, std::nullopt);
  EXPECT_EQ(s.cost_at(1), std::nullopt);
}

TEST(SummarizeCell, ProportionsAndAbortRate) {
  std::vector<RunResult> runs;
  for (std::size_t k : {2, 2, 2, 3, 3, 4}) runs.push_back(found(3, 4, set_of_size(k)));
  for (int i = 0; i < 4; ++i) runs.push_back(aborted(2, 9));
  const auto s = summarize_cell(runs, {});
  EXPECT_EQ(s.finds, 6u);
  EXPECT_DOUBLE_EQ(s.k_proportions.at(2), 0.5);
  EXPECT_DOUBLE_EQ(s.k_proportions.at(3), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.k_proportions.at(4), 1.0 / 6.0);
  EXPECT_DOUBLE_EQ(*s.abort_rate, 0.4);
  EXPECT_EQ(s.initial_failures, 0u);
  EXPECT_EQ(s.residue, (TestLedger{8, 36}));
}

TEST(SummarizeCell, ExpectedCostsFromMedians) {
  const std::vector<RunResult> runs{found(5, 40, KSet{1, 2})};
  const auto s = summarize_cell(runs, {});
  ASSERT_EQ(s.expected_costs.size(), 4u);
  EXPECT_EQ(s.expected_costs[0], 45.0);
  EXPECT_EQ(s.expected_costs[1], 90.0);
  EXPECT_EQ(s.expected_costs[2], 290.0);
  EXPECT_EQ(s.expected_costs[3], 540.0);
  EXPECT_EQ(s.cost_at(7), 75.0);
}

TEST(SummarizeCell, EmptyCellIsAnError) {
  try {
    summarize_cell(std::vector<RunResult>{}, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::empty_cell);
  }
}

TEST(PairedCell, EmptyFamilySingleRun) {
  const auto fam = generate_family(100, {}, 0);
  const Oracle oracle(fam, {});
  ExperimentConfig cfg;
  cfg.runs = 1;
  cfg.a0_grid = {16};
  const auto pairs = run_paired_cell(oracle, cfg, 16);
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].sight.outcome, Outcome::abort_initial);
  EXPECT_EQ(pairs[0].rc.outcome, Outcome::abort_initial);
  EXPECT_EQ(pairs[0].sight.ledger, (TestLedger{0, 1}));
  EXPECT_EQ(pairs[0].rc.ledger, (TestLedger{0, 1}));
}

TEST(PairedCell, UniquePairIsAlwaysAgreedOn) {
  const PlantedFamily fam(60, {KSet{7, 31}});
  const Oracle oracle(fam, {});
  ExperimentConfig cfg;
  cfg.runs = 1000;
  cfg.a0_grid = {48};
  const auto cell = summarize_pairs(48, run_paired_cell(oracle, cfg, 48), cfg.cost_ratios);
  ASSERT_TRUE(cell.sight.prop_identical);
  EXPECT_EQ(*cell.sight.prop_identical, 1.0);
  EXPECT_EQ(*cell.rc.prop_identical, 1.0);
  EXPECT_GT(cell.sight.finds, 100u);
}

TEST(PairedCell, InitialSamplesShared) {
  const auto fam = generate_family(300, {{2, 20}, {3, 20}}, 1);
  const Oracle oracle(fam, {0.2, 1.0, 0});
  ExperimentConfig cfg;
  cfg.runs = 400;
  cfg.false_negative_rate = 0.2;
  cfg.a0_grid = {48};
  const auto cell = summarize_pairs(48, run_paired_cell(oracle, cfg, 48), cfg.cost_ratios);
  EXPECT_EQ(cell.sight.initial_failures, cell.rc.initial_failures);
  for (std::size_t j = 0; j < 20; ++j) {
    auto a = RunStreams::for_run(0, 48, j, Algorithm::sight);
    auto b = RunStreams::for_run(0, 48, j, Algorithm::rc);
    EXPECT_EQ(sample_universe(300, 48, a.initial), sample_universe(300, 48, b.initial));
    EXPECT_NE(a.choice, b.choice);
  }
}

TEST(PairedCell, ThreadCountDoesNotChangeResults) {
  const auto fam = generate_family(400, {{2, 30}, {3, 30}, {4, 30}}, 8);
  const Oracle oracle(fam, {0.05, 1.0, 0});
  ExperimentConfig cfg;
  cfg.runs = 300;
  cfg.false_negative_rate = 0.05;
  cfg.a0_grid = {16, 80};
  cfg.seed = 77;
  std::string outputs[2];
  for (unsigned threads : {1u, 4u}) {
    cfg.threads = threads;
    const auto cells = run_experiment(oracle, cfg);
    std::ostringstream out;
    write_run_log(out, cells);
    write_summary_csv(out, cells, "t");
    outputs[threads == 1 ? 0 : 1] = out.str();
  }
  EXPECT_EQ(outputs[0], outputs[1]);
}

TEST(PairedCell, RunsRespectBounds) {
  const auto fam = generate_family(500, {{2, 30}, {3, 30}, {4, 30}, {5, 500}}, 4);
  for (double pfn : {0.0, 0.05}) {
    const Oracle oracle(fam, {pfn, 1.0, 0});
    ExperimentConfig cfg;
    cfg.runs = 200;
    cfg.false_negative_rate = pfn;
    cfg.a0_grid = {8, 16, 48, 176};
    for (const auto& cell : run_experiment(oracle, cfg)) {
      for (const auto& p : cell.pairs) {
        EXPECT_TRUE(bound_violations(p.sight, 2, 4, 20).empty());
        EXPECT_TRUE(bound_violations(p.rc, 2, 4, 20).empty());
      }
    }
  }
}

TEST(RunLog, RoundTripsThroughCells) {
  const auto fam = generate_family(300, {{2, 20}, {3, 20}}, 3);
  const Oracle oracle(fam, {0.01, 1.0, 0});
  ExperimentConfig cfg;
  cfg.runs = 100;
  cfg.false_negative_rate = 0.01;
  cfg.a0_grid = {16, 48};
  cfg.seed = 5;
  const auto cells = run_experiment(oracle, cfg);
  std::ostringstream log, csv;
  write_run_log(log, cells);
  write_summary_csv(csv, cells, "x");

  std::istringstream in(log.str());
  const auto runs = read_run_log(in);
  ASSERT_EQ(runs.size(), 400u);
  const auto again = cells_from_runs(runs, standard_cost_ratios());
  std::ostringstream log2, csv2;
  write_run_log(log2, again);
  write_summary_csv(csv2, again, "x");
  EXPECT_EQ(log.str(), log2.str());
  EXPECT_EQ(csv.str(), csv2.str());
}

TEST(RunLog, RejectsUnpairedRecords) {
  RunResult r = aborted(0, 1, Outcome::abort_initial);
  r.a0 = 16;
  const std::vector<RunResult> runs{r};
  EXPECT_THROW(cells_from_runs(runs, standard_cost_ratios()), Error);
  std::istringstream bad("{\"algorithm\": \"sight\"}\n");
  EXPECT_THROW(read_run_log(bad), Error);
}

TEST(RunLog, RecordFieldOrder) {
  RunResult r = found(3, 4, KSet{2, 9});
  r.algorithm = Algorithm::rc;
  r.a0 = 16;
  r.seed = 1;
  r.pair = 2;
  EXPECT_EQ(to_json(r).dump(),
            R"({"algorithm":"rc","outcome":"found","abort_step":null,"found_set":[2,9],"k":2,)"
            R"("positives":3,"negatives":4,"a0":16,"seed":1,"pair":2})");
}

TEST(SummaryCsv, HeaderColumns) {
  const std::string h = summary_csv_header();
  EXPECT_EQ(h.rfind("algorithm,a0,T_label,finds,init_fail_rate,abort_rate,med_pos,med_neg,med_total,p2,p3,p4,"
                    "prop_identical,cost_r1,cost_r10,cost_r50,cost_r100,U,p_value",
                    0),
            0u);
}

TEST(ExperimentConfigTest, Validation) {
  ExperimentConfig cfg;
  EXPECT_NO_THROW(cfg.validate(2000));
  cfg.runs = 0;
  EXPECT_THROW(cfg.validate(2000), Error);
  cfg.runs = 1;
  cfg.a0_grid = {4};
  EXPECT_THROW(cfg.validate(2000), Error);
  cfg.a0_grid = {16};
  EXPECT_THROW(cfg.validate(16), Error);
  cfg.cost_ratios = {0};
  EXPECT_THROW(cfg.validate(2000), Error);
}
