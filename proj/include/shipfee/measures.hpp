#pragma once

// Steady-state performance measures per operating cycle.

#include <optional>
#include <vector>

#include "shipfee/chain.hpp"
#include "shipfee/policy.hpp"

namespace shipfee {

// Which express income enters (x_c + E - B)^+ at the deadline age: the income
// left after overflow rejection (consistent with the dynamics) or the raw draw.
enum class IncomeConvention { kAdjusted, kRaw };

struct PerformanceReport {
  double expected_backorders = 0.0;      // E[M] under `convention`
  double expected_backorders_raw = 0.0;  // E[M] with raw express income
  double variable_profit = 0.0;          // express_revenue - penalty * E[M]
  double express_revenue = 0.0;          // sum of f * lambda * w(f)
  double express_revenue_adjusted = 0.0; // sum of f * E[accepted express]
  double fixed_profit = 0.0;             // T * lambda * regular_price
  double rejection_probability = 0.0;    // J
  double expected_rejected_per_cycle = 0.0;
  double mean_delay = 0.0;               // E[M] / lambda, in cycles
  std::vector<double> per_age_express_rate;
  int bound = 0;
  double utilization = 0.0;
  double residual = 0.0;
  long iterations = 0;
  IncomeConvention convention = IncomeConvention::kAdjusted;
};

double expected_backorders(const StationaryDistribution& pi, const Scenario& scenario,
                           const FeeStructure& policy,
                           IncomeConvention convention = IncomeConvention::kAdjusted);

// Ages whose take rate is 0 contribute nothing (including fee = +infinity).
double express_revenue(const Scenario& scenario, const FeeStructure& policy);

double express_revenue_adjusted(const StationaryDistribution& pi, const Scenario& scenario,
                                const FeeStructure& policy);

double variable_profit(const StationaryDistribution& pi, const Scenario& scenario,
                       const FeeStructure& policy,
                       IncomeConvention convention = IncomeConvention::kAdjusted);

// Average over ages of P(total + E + R - B > bound).
double rejection_probability(const StationaryDistribution& pi, const Scenario& scenario,
                             const FeeStructure& policy);

double expected_rejected_per_cycle(const StationaryDistribution& pi, const Scenario& scenario,
                                   const FeeStructure& policy);

// Throws ParameterError when lambda == 0.
double mean_delay(double expected_backorders, double lambda);

struct EvaluateOptions {
  std::optional<int> bound;  // find_bound when empty
  IncomeConvention convention = IncomeConvention::kAdjusted;
  bool cold_start = false;   // uniform start instead of the workload warm start
  int threads = 1;
};

PerformanceReport evaluate(const Scenario& scenario, const FeeStructure& policy,
                           const EvaluateOptions& options = {});

}  // namespace shipfee
