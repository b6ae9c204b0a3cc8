#pragma once

// Benchmark tables and profit sweeps over the published settings.

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "shipfee/io.hpp"

namespace shipfee {

// (a - b) / |b| in percent.
double benefit_percent(double a, double b);

struct PolicyRow {
  std::string setting;
  std::string policy;  // CSP, TSP-CF, TSP-CF*, TSP
  PolicyParams params;
  double expected_backorders = 0.0;
  double variable_profit = 0.0;
  // Benefit over CSP, TSP-CF and TSP-CF* (rows above this one).
  std::vector<double> benefits;
  bool tie_broken = false;
  int bound = 0;
};

// CSP at the revenue-maximizing fee, then the optimized TSP-CF, TSP-CF* and TSP.
std::vector<PolicyRow> policy_comparison(const ExperimentConfig& config, int threads = 1);

struct CutoffRow {
  std::string setting;
  PolicyParams params;
  double expected_backorders = 0.0;
  double variable_profit = 0.0;
  std::optional<double> benefit;  // of the overall optimum over this row
};

// Best TSP for each cutoff in `cutoffs`, highest cutoff first.
std::vector<CutoffRow> cutoff_comparison(const ExperimentConfig& config,
                                         const std::vector<int>& cutoffs, int threads = 1);

struct SweepPoint {
  std::string setting;
  std::string axis;  // "f_E" (best f_LE per point) or "f_LE" (f_E fixed at its optimum)
  double fee = 0.0;
  int switch_age = 0;
  double variable_profit = 0.0;
};

// TSP at cutoff T-1 for every switch age below it.
std::vector<SweepPoint> fee_sweeps(const ExperimentConfig& config, int threads = 1);

void write_policy_csv(std::ostream& out, const std::vector<PolicyRow>& rows);
void write_cutoff_csv(std::ostream& out, const std::vector<CutoffRow>& rows);
void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& points);
nlohmann::json to_json(const PolicyRow& row);
nlohmann::json to_json(const CutoffRow& row);
nlohmann::json to_json(const SweepPoint& point);

}  // namespace shipfee
