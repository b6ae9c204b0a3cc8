// shipfee: evaluate, optimize and simulate shipment-fee policies.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "shipfee/errors.hpp"
#include "shipfee/io.hpp"
#include "shipfee/presets.hpp"
#include "shipfee/reproduce.hpp"

namespace {

using namespace shipfee;
using nlohmann::json;

struct Options {
  std::string config;
  std::string preset;
  std::string out;
  std::string format;
  int threads = 0;
  std::optional<std::uint64_t> seed;
  std::optional<double> rejection_threshold;
  int small_period = 0;
};

int env_threads() {
  if (const char* v = std::getenv("SHIPFEE_THREADS")) {
    try {
      const int n = std::stoi(v);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
    throw ParameterError(std::string("SHIPFEE_THREADS must be a positive integer, got \"") + v + "\"");
  }
  return 1;
}

void apply_overrides(ExperimentConfig& cfg, const Options& o) {
  if (o.seed) {
    cfg.simulate.seed = *o.seed;
    cfg.verify.seed = *o.seed;
  }
  if (o.rejection_threshold) {
    cfg.scenario.rejection_threshold = *o.rejection_threshold;
    cfg.scenario.validate();
  }
  if (o.small_period > 0) cfg.verify.small_period = o.small_period;
}

std::vector<ExperimentConfig> configs(const Options& o, bool all_presets_by_default) {
  std::vector<ExperimentConfig> out;
  if (!o.config.empty() && !o.preset.empty()) throw ParameterError("--config and --preset are exclusive");
  if (!o.config.empty()) {
    out.push_back(load_config(o.config));
  } else if (!o.preset.empty()) {
    out.push_back(preset(o.preset));
  } else if (all_presets_by_default) {
    for (const std::string& name : preset_names()) out.push_back(preset(name));
  } else {
    throw ParameterError("one of --config or --preset is required");
  }
  for (ExperimentConfig& cfg : out) apply_overrides(cfg, o);
  return out;
}

const FeeStructure& require_policy(const ExperimentConfig& cfg) {
  if (!cfg.policy) throw ParameterError("$.policy: required by this command");
  return *cfg.policy;
}

// Writes to --out, to $SHIPFEE_OUTPUT_DIR/<stem>.<ext>, or to stdout.
void emit(const Options& o, const std::string& stem, const std::string& text) {
  std::filesystem::path target;
  const char* dir = std::getenv("SHIPFEE_OUTPUT_DIR");
  if (!o.out.empty()) {
    target = o.out;
    if (dir && target.is_relative()) target = std::filesystem::path(dir) / target;
  } else if (dir) {
    target = std::filesystem::path(dir) / (stem + "." + o.format);
  }
  if (target.empty()) {
    std::cout << text;
    return;
  }
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  std::ofstream file(target);
  if (!file) throw ParameterError("cannot write " + target.string());
  file << text;
}

json config_metadata(const ExperimentConfig& cfg) {
  json meta = {{"name", cfg.name}, {"scenario", to_json(cfg.scenario)}};
  if (cfg.requested_utilization) meta["requested_utilization"] = *cfg.requested_utilization;
  if (cfg.capacity_fit) {
    meta["capacity_fit"] = {{"alpha", cfg.capacity_fit->alpha},
                            {"beta", cfg.capacity_fit->beta},
                            {"achieved_mean", cfg.capacity_fit->achieved_mean},
                            {"achieved_scv", cfg.capacity_fit->achieved_scv}};
  }
  return meta;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

int run_evaluate(const Options& o) {
  const ExperimentConfig cfg = configs(o, false).front();
  EvaluateOptions eval = cfg.evaluate;
  eval.threads = o.threads;
  const PerformanceReport r = evaluate(cfg.scenario, require_policy(cfg), eval);
  if (o.format == "json") {
    json j = config_metadata(cfg);
    j["policy"] = to_json(require_policy(cfg));
    j["report"] = to_json(r);
    if (std::abs(r.expected_backorders - r.expected_backorders_raw) > 1e-6 ||
        std::abs(r.express_revenue - r.express_revenue_adjusted) > 1e-6) {
      j["conventions_differ"] = true;
    }
    emit(o, "evaluate", dump(j));
    return 0;
  }
  std::ostringstream out;
  CsvWriter w(out, {"setting", "E_M", "E_M_raw", "E_GV", "express_revenue", "express_revenue_adjusted",
                    "fixed_profit", "J", "rejected_per_cycle", "mean_delay", "bound", "utilization"});
  w.cell(cfg.name).cell(r.expected_backorders).cell(r.expected_backorders_raw).cell(r.variable_profit)
      .cell(r.express_revenue).cell(r.express_revenue_adjusted).cell(r.fixed_profit)
      .cell(r.rejection_probability).cell(r.expected_rejected_per_cycle).cell(r.mean_delay)
      .cell(r.bound).cell(r.utilization);
  w.end_row();
  emit(o, "evaluate", out.str());
  return 0;
}

int run_optimize(const Options& o) {
  const ExperimentConfig cfg = configs(o, false).front();
  OptimizeOptions opt;
  opt.threads = o.threads;
  opt.bound = cfg.evaluate.bound;
  const Optimum best = optimize_family(cfg.scenario, cfg.family, cfg.grid, opt);
  if (o.format == "json") {
    json j = config_metadata(cfg);
    j["family"] = search_family_name(cfg.family);
    j["optimum"] = to_json(best);
    emit(o, "optimize", dump(j));
    return 0;
  }
  std::ostringstream out;
  write_policy_csv(out, {PolicyRow{cfg.name, search_family_name(cfg.family), best.params,
                                   best.report.expected_backorders, best.report.variable_profit,
                                   {}, best.tie_broken, best.bound}});
  emit(o, "optimize", out.str());
  if (best.tie_broken) std::cerr << "note: the optimum was selected by the tie-break order\n";
  return 0;
}

int run_simulate(const Options& o) {
  const ExperimentConfig cfg = configs(o, false).front();
  SimConfig sim = cfg.simulate;
  sim.threads = o.threads;
  if (cfg.simulate_bound_from_search) {
    sim.bound = cfg.evaluate.bound ? *cfg.evaluate.bound : find_bound(cfg.scenario, require_policy(cfg)).bound;
  }
  const SimResult r = simulate(cfg.scenario, require_policy(cfg), sim);
  if (o.format == "json") {
    json j = config_metadata(cfg);
    j["bound"] = sim.bound;
    j["seed"] = sim.seed;
    j["simulation"] = to_json(r);
    emit(o, "simulate", dump(j));
    return 0;
  }
  std::ostringstream out;
  CsvWriter w(out, {"metric", "mean", "halfwidth"});
  const auto row = [&](const std::string& name, const Estimate& e) {
    w.cell(name).cell(e.mean).cell(e.halfwidth);
    w.end_row();
  };
  row("E_M", r.expected_backorders);
  row("E_GV", r.variable_profit);
  row("J", r.rejection_probability);
  row("rejected_per_cycle", r.rejected_per_cycle);
  for (std::size_t a = 0; a < r.per_age_express.size(); ++a) row("express_age_" + std::to_string(a), r.per_age_express[a]);
  emit(o, "simulate", out.str());
  return 0;
}

int run_verify(const Options& o) {
  VerifyOptions v;
  if (!o.config.empty() || !o.preset.empty()) {
    v = configs(o, false).front().verify;
  } else {
    if (o.seed) v.seed = *o.seed;
    if (o.small_period > 0) v.small_period = o.small_period;
  }
  v.threads = o.threads;
  const std::vector<SuiteResult> suites = run_all_suites(v);
  bool ok = true;
  for (const SuiteResult& s : suites) ok = ok && s.passed();
  if (o.format == "json") {
    json j = json::array();
    for (const SuiteResult& s : suites) j.push_back(to_json(s));
    emit(o, "verify", dump({{"passed", ok}, {"suites", j}}));
  } else {
    std::ostringstream out;
    CsvWriter w(out, {"suite", "passed", "cases", "failures", "worst"});
    for (const SuiteResult& s : suites) {
      w.cell(s.name).cell(s.passed() ? "true" : "false").cell(s.cases).cell(s.failures).cell(s.worst);
      w.end_row();
    }
    emit(o, "verify", out.str());
  }
  for (const SuiteResult& s : suites) {
    for (const std::string& m : s.messages) std::cerr << s.name << ": " << m << "\n";
  }
  return ok ? 0 : 1;
}

int run_table2(const Options& o) {
  std::vector<PolicyRow> rows;
  for (const ExperimentConfig& cfg : configs(o, true)) {
    const std::vector<PolicyRow> part = policy_comparison(cfg, o.threads);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  if (o.format == "json") {
    json j = json::array();
    for (const PolicyRow& r : rows) j.push_back(to_json(r));
    emit(o, "table2", dump({{"benefit_definition", "(E[G^V]_a - E[G^V]_b) / |E[G^V]_b| * 100"}, {"rows", j}}));
  } else {
    std::ostringstream out;
    write_policy_csv(out, rows);
    emit(o, "table2", out.str());
  }
  return 0;
}

int run_table3(const Options& o) {
  std::vector<CutoffRow> rows;
  for (const ExperimentConfig& cfg : configs(o, true)) {
    const int last = cfg.scenario.period_length - 1;
    const std::vector<CutoffRow> part = cutoff_comparison(cfg, {last, last - 1, last - 2}, o.threads);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  if (o.format == "json") {
    json j = json::array();
    for (const CutoffRow& r : rows) j.push_back(to_json(r));
    emit(o, "table3", dump({{"benefit_definition", "(E[G^V]_opt - E[G^V]_row) / |E[G^V]_row| * 100"}, {"rows", j}}));
  } else {
    std::ostringstream out;
    write_cutoff_csv(out, rows);
    emit(o, "table3", out.str());
  }
  return 0;
}

int run_sweep(const Options& o) {
  std::vector<SweepPoint> points;
  for (const ExperimentConfig& cfg : configs(o, true)) {
    const std::vector<SweepPoint> part = fee_sweeps(cfg, o.threads);
    points.insert(points.end(), part.begin(), part.end());
  }
  if (o.format == "json") {
    json j = json::array();
    for (const SweepPoint& p : points) j.push_back(to_json(p));
    emit(o, "sweep", dump(j));
  } else {
    std::ostringstream out;
    write_sweep_csv(out, points);
    emit(o, "sweep", out.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Steady-state evaluation and optimization of time-dependent shipment fees"};
  app.require_subcommand(1);
  Options o;
  std::string format;
  std::uint64_t seed = 0;
  double threshold = 0.0;

  const auto common = [&](CLI::App* cmd, const char* default_format) {
    cmd->add_option("--config", o.config, "Experiment config (JSON)")->check(CLI::ExistingFile);
    cmd->add_option("--preset", o.preset, "Built-in setting: rho085_c8, rho085_c12, rho090_c8, rho090_c12, rho095_c8, rho095_c12");
    cmd->add_option("--out", o.out, "Output file (default: stdout or $SHIPFEE_OUTPUT_DIR)");
    cmd->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->default_str(default_format);
    cmd->add_option("--threads", o.threads, "Worker threads (default: $SHIPFEE_THREADS or 1)")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", seed, "Random seed for simulate and verify");
    cmd->add_option("--rejection-threshold", threshold, "Largest acceptable rejection probability (default 0.023)")
        ->check(CLI::Range(0.0, 1.0));
  };
  struct Command {
    const char* name;
    const char* help;
    const char* format;
    int (*run)(const Options&);
  };
  const Command commands[] = {
      {"evaluate", "Exact performance report of the configured policy", "json", run_evaluate},
      {"optimize", "Grid search over a policy family", "json", run_optimize},
      {"simulate", "Monte Carlo estimate of the configured policy", "json", run_simulate},
      {"verify", "Randomized property suites", "csv", run_verify},
      {"reproduce-table2", "Benchmark policies per setting", "csv", run_table2},
      {"reproduce-table3", "Best TSP for the last three cutoffs per setting", "csv", run_table3},
      {"sweep-figures", "TSP profit over f_E and f_LE per switch age", "csv", run_sweep},
  };
  for (const Command& c : commands) {
    CLI::App* cmd = app.add_subcommand(c.name, c.help);
    common(cmd, c.format);
    if (std::string(c.name) == "verify") {
      cmd->add_option("--small-T", o.small_period, "Cycle length for the exhaustive search")->check(CLI::Range(2, 6));
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const Command* command = nullptr;
  for (const Command& c : commands) {
    if (chosen->get_name() == c.name) command = &c;
  }
  o.format = format.empty() ? command->format : format;
  if (chosen->count("--seed") > 0) o.seed = seed;
  if (chosen->count("--rejection-threshold") > 0) o.rejection_threshold = threshold;

  try {
    if (o.threads == 0) o.threads = env_threads();
    return command->run(o);
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
