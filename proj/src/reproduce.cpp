#include "shipfee/reproduce.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "shipfee/errors.hpp"

namespace shipfee {

double benefit_percent(double a, double b) {
  if (b == 0.0) throw NumericalError("benefit: reference profit is zero");
  return 100.0 * (a - b) / std::abs(b);
}

std::vector<PolicyRow> policy_comparison(const ExperimentConfig& config, int threads) {
  const Scenario& s = config.scenario;
  const int bound = find_bound(s, FeeStructure(std::vector<double>(s.period_length, 0.0))).bound;
  OptimizeOptions opt;
  opt.bound = bound;
  opt.threads = threads;

  std::vector<PolicyRow> rows;
  {
    PolicyRow row;
    row.policy = "CSP";
    row.params = ConstantFee{revenue_max_fee(s.choice)};
    EvaluateOptions eval;
    eval.bound = bound;
    eval.threads = threads;
    const PerformanceReport r = evaluate(s, build_policy(s.period_length, row.params, s.choice), eval);
    row.expected_backorders = r.expected_backorders;
    row.variable_profit = r.variable_profit;
    rows.push_back(row);
  }
  for (SearchFamily family : {SearchFamily::kTspCf, SearchFamily::kTspCfStar, SearchFamily::kTsp}) {
    const Optimum o = optimize_family(s, family, config.grid, opt);
    PolicyRow row;
    row.policy = search_family_name(family);
    row.params = o.params;
    row.expected_backorders = o.report.expected_backorders;
    row.variable_profit = o.report.variable_profit;
    row.tie_broken = o.tie_broken;
    rows.push_back(row);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].setting = config.name;
    rows[i].bound = bound;
    for (std::size_t j = 0; j < i; ++j) {
      rows[i].benefits.push_back(benefit_percent(rows[i].variable_profit, rows[j].variable_profit));
    }
  }
  return rows;
}

std::vector<CutoffRow> cutoff_comparison(const ExperimentConfig& config,
                                         const std::vector<int>& cutoffs, int threads) {
  OptimizeOptions opt;
  opt.threads = threads;
  const Optimum o = optimize_family(config.scenario, SearchFamily::kTsp, config.grid, opt);
  std::vector<int> order = cutoffs;
  std::sort(order.rbegin(), order.rend());
  std::vector<CutoffRow> rows;
  for (int cutoff : order) {
    const auto it = o.best_by_cutoff.find(cutoff);
    if (it == o.best_by_cutoff.end()) {
      throw ParameterError("cutoff " + std::to_string(cutoff) + " is outside the grid's cutoff range");
    }
    CutoffRow row;
    row.setting = config.name;
    row.params = it->second.params;
    row.expected_backorders = it->second.expected_backorders;
    row.variable_profit = it->second.variable_profit;
    if (!(std::get<SimpleTspParams>(row.params) == std::get<SimpleTspParams>(o.params))) {
      row.benefit = benefit_percent(o.report.variable_profit, row.variable_profit);
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<SweepPoint> fee_sweeps(const ExperimentConfig& config, int threads) {
  const Scenario& s = config.scenario;
  SearchGrid grid = config.grid;
  grid.cutoff_min = grid.cutoff_max = s.period_length - 1;
  std::vector<Candidate> candidates = family_candidates(s, SearchFamily::kTsp, grid);
  const int bound = find_bound(s, candidates.front().policy).bound;
  score_candidates(s, bound, candidates, threads);

  // Best f_LE for each (f_E, switch), and the overall optimum's f_E.
  std::map<std::pair<int, double>, double> best_by_express;
  const Candidate* top = &candidates.front();
  for (const Candidate& c : candidates) {
    const auto& p = std::get<SimpleTspParams>(c.params);
    const auto key = std::make_pair(p.switch_age, p.express_fee);
    const auto it = best_by_express.find(key);
    if (it == best_by_express.end() || c.variable_profit > it->second) best_by_express[key] = c.variable_profit;
    if (c.variable_profit > top->variable_profit) top = &c;
  }
  const double best_express = std::get<SimpleTspParams>(top->params).express_fee;

  std::vector<SweepPoint> points;
  for (const auto& [key, profit] : best_by_express) {
    points.push_back({config.name, "f_E", key.second, key.first, profit});
  }
  for (const Candidate& c : candidates) {
    const auto& p = std::get<SimpleTspParams>(c.params);
    if (p.express_fee == best_express) {
      points.push_back({config.name, "f_LE", p.lastminute_fee, p.switch_age, c.variable_profit});
    }
  }
  return points;
}

namespace {

void params_cells(CsvWriter& w, const PolicyParams& params) {
  if (const auto* c = std::get_if<ConstantFee>(&params)) {
    w.cell(c->fee).empty().empty().empty();
  } else if (const auto* c = std::get_if<CutoffFee>(&params)) {
    w.cell(c->fee).empty().empty().cell(c->cutoff_age);
  } else {
    const auto& t = std::get<SimpleTspParams>(params);
    w.cell(t.express_fee).cell(t.lastminute_fee).cell(t.switch_age).cell(t.cutoff_age);
  }
}

}  // namespace

void write_policy_csv(std::ostream& out, const std::vector<PolicyRow>& rows) {
  CsvWriter w(out, {"setting", "policy", "f_E", "f_LE", "tau_F", "tau_C", "E_M", "E_GV",
                    "benefit_vs_CSP_pct", "benefit_vs_TSP-CF_pct", "benefit_vs_TSP-CF*_pct"});
  for (const PolicyRow& r : rows) {
    w.cell(r.setting).cell(r.policy);
    params_cells(w, r.params);
    w.cell(r.expected_backorders).cell(r.variable_profit);
    for (std::size_t j = 0; j < 3; ++j) {
      if (j < r.benefits.size()) {
        w.cell(r.benefits[j]);
      } else {
        w.empty();
      }
    }
    w.end_row();
  }
}

void write_cutoff_csv(std::ostream& out, const std::vector<CutoffRow>& rows) {
  CsvWriter w(out, {"setting", "f_E", "f_LE", "tau_F", "tau_C", "E_M", "E_GV", "benefit_of_optimum_pct"});
  for (const CutoffRow& r : rows) {
    w.cell(r.setting);
    params_cells(w, r.params);
    w.cell(r.expected_backorders).cell(r.variable_profit);
    if (r.benefit) {
      w.cell(*r.benefit);
    } else {
      w.empty();
    }
    w.end_row();
  }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& points) {
  CsvWriter w(out, {"setting", "axis", "fee", "tau_F", "variable_profit"});
  for (const SweepPoint& p : points) {
    w.cell(p.setting).cell(p.axis).cell(p.fee).cell(p.switch_age).cell(p.variable_profit);
    w.end_row();
  }
}

nlohmann::json to_json(const PolicyRow& row) {
  return {{"setting", row.setting},
          {"policy", row.policy},
          {"params", to_json(row.params)},
          {"expected_backorders", row.expected_backorders},
          {"variable_profit", row.variable_profit},
          {"benefit_pct", row.benefits},
          {"tie_broken", row.tie_broken},
          {"bound", row.bound}};
}

nlohmann::json to_json(const CutoffRow& row) {
  nlohmann::json j = {{"setting", row.setting},
                      {"params", to_json(row.params)},
                      {"expected_backorders", row.expected_backorders},
                      {"variable_profit", row.variable_profit}};
  if (row.benefit) j["benefit_of_optimum_pct"] = *row.benefit;
  return j;
}

nlohmann::json to_json(const SweepPoint& p) {
  return {{"setting", p.setting}, {"axis", p.axis}, {"fee", p.fee}, {"tau_F", p.switch_age},
          {"variable_profit", p.variable_profit}};
}

}  // namespace shipfee
