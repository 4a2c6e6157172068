// gtsample: generate planted test problems, run paired SIGHT/RC experiments,
// print worst-case bound tables, and recompute summaries from run logs.
//
// Exit codes: 0 success, 2 validation failure, 3 I/O failure.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gtsample/gtsample.hpp"

namespace fs = std::filesystem;
using namespace gtsample;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) parts.push_back(item.substr(b, e - b + 1));
  }
  return parts;
}

std::vector<std::size_t> parse_size_list(const std::string& flag, const std::string& text) {
  std::vector<std::size_t> out;
  for (const auto& part : split(text, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(part, &used);
      if (used != part.size() || v < 0) throw std::invalid_argument(part);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw ValidationError(flag + ": '" + part + "' is not a nonnegative integer");
    }
  }
  if (out.empty()) throw ValidationError(flag + ": empty list");
  return out;
}

std::vector<double> parse_double_list(const std::string& flag, const std::string& text) {
  std::vector<double> out;
  for (const auto& part : split(text, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(part, &used);
      if (used != part.size()) throw std::invalid_argument(part);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ValidationError(flag + ": '" + part + "' is not a number");
    }
  }
  if (out.empty()) throw ValidationError(flag + ": empty list");
  return out;
}

// Reads `key = value` lines (# comments) into `--key value` arguments.
std::vector<std::string> config_arguments(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("--config: cannot read '" + path + "'");
  std::vector<std::string> args;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("--config: line " + std::to_string(lineno) + " is not 'key = value'");
    }
    auto key = split(line.substr(0, eq), '\n');
    auto value = split(line.substr(eq + 1), '\n');
    if (key.empty() || value.empty()) {
      throw ValidationError("--config: line " + std::to_string(lineno) + " is not 'key = value'");
    }
    std::string k = key.front();
    if (!k.empty() && k.back() == '\r') k.pop_back();
    std::string v = value.front();
    if (!v.empty() && v.back() == '\r') v.pop_back();
    args.push_back((k.size() == 1 ? "-" : "--") + k);
    args.push_back(v);
  }
  return args;
}

// Splices config-file arguments in front of the subcommand's own flags so
// that flags given on the command line take precedence.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  for (std::size_t i = 1; i < args.size(); ++i) {
    std::string path;
    std::size_t consumed = 0;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      consumed = 2;
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      consumed = 1;
    } else {
      continue;
    }
    auto extra = config_arguments(path);
    args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + consumed));
    // args[1] is the subcommand; config values go right after it.
    args.insert(args.begin() + 2, extra.begin(), extra.end());
    break;
  }
  return args;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << content;
  out.close();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

PlantedFamily load_family(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("--family: cannot read '" + path + "'");
  try {
    return family_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("--family: malformed JSON: " + std::string(e.what()));
  } catch (const Error& e) {
    throw ValidationError("--family: " + std::string(e.what()));
  }
}

// ---- generate ----

struct GenerateArgs {
  std::size_t n = 0;
  std::map<int, std::size_t> counts;
  std::uint64_t seed = 0;
  std::string output;
};

int cmd_generate(const GenerateArgs& a) {
  if (a.n == 0) throw ValidationError("--n: universe size must be positive");
  if (auto it = a.counts.find(1); it != a.counts.end() && it->second > 0) {
    throw ValidationError("--k1: defective 1-sets are not allowed (planted sets need at least 2 nodes)");
  }
  std::map<std::size_t, std::size_t> counts;
  for (const auto& [k, c] : a.counts) {
    if (k >= 2 && c > 0) counts[static_cast<std::size_t>(k)] = c;
  }
  PlantedFamily family;
  try {
    family = generate_family(a.n, counts, a.seed);
  } catch (const Error& e) {
    throw ValidationError("--n/--k*: " + std::string(e.what()));
  }
  nlohmann::ordered_json j;
  to_json(j, family);
  write_file(a.output, j.dump() + "\n");

  std::cout << "wrote " << family.size() << " planted sets over N=" << a.n << " to " << a.output
            << " (antichain verified)\n";
  for (const auto& [k, c] : family.counts_by_k()) std::cout << "  k=" << k << ": " << c << "\n";
  if (family.size() == 0) std::cerr << "warning: family is empty; every test will come back non-defective\n";
  return kExitOk;
}

// ---- run ----

struct RunArgs {
  std::string family;
  std::string a0 = "16,48,80,112,144,176";
  std::size_t runs = 1000;
  std::size_t k_min = 2;
  std::size_t k_max = 4;
  std::size_t t_max = 20;
  double pfn = 0.0;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string ratios = "1,10,50,100";
  std::string label;
  std::string output = "out";
};

ExperimentConfig experiment_config(const RunArgs& a, std::size_t universe) {
  ExperimentConfig cfg;
  cfg.label = a.label.empty() ? fs::path(a.family).stem().string() : a.label;
  cfg.a0_grid = parse_size_list("--a0", a.a0);
  cfg.k_min = a.k_min;
  cfg.k_max = a.k_max;
  cfg.t_max = a.t_max;
  cfg.false_negative_rate = a.pfn;
  cfg.runs = a.runs;
  cfg.seed = a.seed;
  cfg.threads = a.threads;
  cfg.cost_ratios = parse_double_list("--ratios", a.ratios);

  if (cfg.runs < 1) throw ValidationError("--runs: must be at least 1");
  if (cfg.k_min < 2) throw ValidationError("--kmin: must be at least 2");
  if (cfg.k_max < cfg.k_min) throw ValidationError("--kmax: must be >= --kmin");
  if (cfg.t_max < 1) throw ValidationError("--tmax: must be at least 1");
  if (!(cfg.false_negative_rate >= 0 && cfg.false_negative_rate < 1)) throw ValidationError("--pfn: must lie in [0, 1)");
  if (cfg.threads < 1) throw ValidationError("--threads: must be at least 1");
  for (double rho : cfg.cost_ratios) {
    if (!(rho > 0)) throw ValidationError("--ratios: cost ratios must be positive");
  }
  for (std::size_t a0 : cfg.a0_grid) {
    if (a0 <= cfg.k_max) {
      throw ValidationError("--a0: " + std::to_string(a0) + " must exceed --kmax (" + std::to_string(cfg.k_max) + ")");
    }
    if (a0 >= universe) {
      throw ValidationError("--a0: " + std::to_string(a0) + " must be below the universe size " +
                            std::to_string(universe));
    }
  }
  return cfg;
}

std::string echo_config(const RunArgs& a, const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "# gtsample " << GTSAMPLE_VERSION << " run configuration\n"
     << "family = " << a.family << "\n"
     << "a0 = " << a.a0 << "\n"
     << "runs = " << cfg.runs << "\n"
     << "kmin = " << cfg.k_min << "\n"
     << "kmax = " << cfg.k_max << "\n"
     << "tmax = " << cfg.t_max << "\n"
     << "pfn = " << format_number(cfg.false_negative_rate) << "\n"
     << "seed = " << cfg.seed << "\n"
     << "ratios = " << a.ratios << "\n"
     << "label = " << cfg.label << "\n";
  return os.str();
}

int cmd_run(const RunArgs& a) {
  if (a.family.empty()) throw ValidationError("--family: required");
  const PlantedFamily family = load_family(a.family);
  const ExperimentConfig cfg = experiment_config(a, family.universe_size());
  const Oracle oracle(family, OracleConfig{cfg.false_negative_rate, 1.0, cfg.seed});

  std::error_code ec;
  fs::create_directories(a.output, ec);
  if (ec) throw IoError("-o: cannot create '" + a.output + "': " + ec.message());

  std::vector<CellResult> cells;
  for (std::size_t a0 : cfg.a0_grid) {
    cells.push_back(summarize_pairs(a0, run_paired_cell(oracle, cfg, a0), cfg.cost_ratios));
    std::cout << cell_digest(cells.back()) << "\n";
  }

  std::ostringstream log, csv;
  write_run_log(log, cells);
  write_summary_csv(csv, cells, cfg.label, cfg.cost_ratios);
  const fs::path dir(a.output);
  write_file(dir / "runs.jsonl", log.str());
  write_file(dir / "summary.csv", csv.str());
  write_file(dir / "config.txt", echo_config(a, cfg));
  std::cout << "wrote " << (dir / "runs.jsonl").string() << ", " << (dir / "summary.csv").string() << "\n";
  return kExitOk;
}

// ---- bounds ----

struct BoundsArgs {
  std::size_t a0 = 0;
  std::size_t k_min = 2;
  std::size_t k_max = 4;
  std::size_t t_max = 20;
};

int cmd_bounds(const BoundsArgs& a) {
  if (a.a0 < 2) throw ValidationError("--a0: must be at least 2");
  if (a.k_min < 2) throw ValidationError("--kmin: must be at least 2");
  if (a.k_max < a.k_min) throw ValidationError("--kmax: must be >= --kmin");
  if (a.t_max < 1) throw ValidationError("--tmax: must be at least 1");
  if (a.a0 <= a.k_max) throw ValidationError("--a0: must exceed --kmax");
  const ReductionSchedule schedule = build_schedule(a.a0, a.k_max);
  std::string listing;
  for (std::size_t i = 0; i < schedule.length(); ++i) {
    listing += (i ? "," : "") + std::to_string(schedule.sizes()[i]);
  }
  std::cout << "a0                 " << a.a0 << "\n"
            << "k_min              " << a.k_min << "\n"
            << "k_max              " << a.k_max << "\n"
            << "t_max              " << a.t_max << "\n"
            << "sight_max_tests    " << sight_max_tests(a.a0, a.k_min, a.k_max) << "\n"
            << "sight_max_positive " << sight_max_positive(a.a0, a.k_max) << "\n"
            << "schedule           [" << listing << "]\n"
            << "schedule_length    " << schedule.length() << "\n"
            << "a_final            " << schedule.final_size() << "\n"
            << "rc_max_tests       " << rc_max_tests(schedule, a.t_max, a.k_min, a.k_max) << "\n"
            << "rc_max_positive    " << rc_max_positive(schedule.length()) << "\n"
            << "ceil_log2_a0_plus1 " << rc_log_positive_reference(a.a0) << "\n";
  return kExitOk;
}

// ---- stats ----

struct StatsArgs {
  std::string log;
  std::string output;
  std::string ratios = "1,10,50,100";
  std::string label = "family";
};

int cmd_stats(const StatsArgs& a) {
  std::ifstream in(a.log);
  if (!in) throw IoError("--log: cannot read '" + a.log + "'");
  std::vector<RunResult> runs;
  try {
    runs = read_run_log(in);
  } catch (const Error& e) {
    throw ValidationError("--log: " + std::string(e.what()));
  }
  if (runs.empty()) throw ValidationError("--log: no run records");
  const auto ratios = parse_double_list("--ratios", a.ratios);
  for (double rho : ratios) {
    if (!(rho > 0)) throw ValidationError("--ratios: cost ratios must be positive");
  }
  std::vector<CellResult> cells;
  try {
    cells = cells_from_runs(runs, ratios);
  } catch (const Error& e) {
    throw ValidationError("--log: " + std::string(e.what()));
  }
  std::ostringstream csv;
  write_summary_csv(csv, cells, a.label, ratios);
  if (a.output.empty()) {
    std::cout << csv.str();
  } else {
    write_file(a.output, csv.str());
    for (const auto& cell : cells) std::cout << cell_digest(cell) << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive group-testing samplers (SIGHT and Random Chemistry) over planted test problems"};
  app.set_version_flag("--version", std::string("gtsample ") + GTSAMPLE_VERSION);
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Generate a planted family of minimal defective sets");
  generate->add_option("--n", gen.n, "Universe size N")->required();
  for (int k = 1; k <= 8; ++k) {
    generate->add_option("--k" + std::to_string(k), gen.counts[k], "Number of planted sets of size " + std::to_string(k));
  }
  generate->add_option("--seed", gen.seed, "RNG seed");
  generate->add_option("-o,--output", gen.output, "Output family JSON")->required();
  generate->add_option("--config", "Key-value configuration file (flags override)");

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run paired SIGHT/RC experiments over an a0 grid");
  run_cmd->add_option("--family", run.family, "Family JSON file")->required();
  run_cmd->add_option("--a0", run.a0, "Comma-separated initial set sizes");
  run_cmd->add_option("--runs", run.runs, "Paired runs per a0");
  run_cmd->add_option("--kmin", run.k_min, "Minimum set size sought");
  run_cmd->add_option("--kmax", run.k_max, "Maximum set size sought");
  run_cmd->add_option("--tmax", run.t_max, "RC attempts per reduction step");
  run_cmd->add_option("--pfn", run.pfn, "False-negative rate");
  run_cmd->add_option("--seed", run.seed, "Master seed");
  run_cmd->add_option("--threads", run.threads, "Worker threads (output does not depend on this)");
  run_cmd->add_option("--ratios", run.ratios, "Comma-separated positive:negative cost ratios");
  run_cmd->add_option("--label", run.label, "Family label for the summary (default: family file stem)");
  run_cmd->add_option("-o,--output", run.output, "Output directory");
  run_cmd->add_option("--config", "Key-value configuration file (flags override)");

  BoundsArgs bounds;
  auto* bounds_cmd = app.add_subcommand("bounds", "Print worst-case test bounds and the RC schedule");
  bounds_cmd->add_option("--a0", bounds.a0, "Initial set size")->required();
  bounds_cmd->add_option("--kmin", bounds.k_min, "Minimum set size sought");
  bounds_cmd->add_option("--kmax", bounds.k_max, "Maximum set size sought");
  bounds_cmd->add_option("--tmax", bounds.t_max, "RC attempts per reduction step");
  bounds_cmd->add_option("--config", "Key-value configuration file (flags override)");

  StatsArgs stats;
  auto* stats_cmd = app.add_subcommand("stats", "Recompute the summary CSV from a run log");
  stats_cmd->add_option("--log", stats.log, "Run log (runs.jsonl)")->required();
  stats_cmd->add_option("-o,--output", stats.output, "Summary CSV path (default: stdout)");
  stats_cmd->add_option("--ratios", stats.ratios, "Comma-separated positive:negative cost ratios");
  stats_cmd->add_option("--label", stats.label, "Family label for the summary");
  stats_cmd->add_option("--config", "Key-value configuration file (flags override)");

  try {
    std::vector<std::string> args(argv, argv + argc);
    args = expand_config(std::move(args));
    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
    app.parse(std::move(reversed));

    if (*generate) return cmd_generate(gen);
    if (*run_cmd) return cmd_run(run);
    if (*bounds_cmd) return cmd_bounds(bounds);
    if (*stats_cmd) return cmd_stats(stats);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}
