#include "shipfee/measures.hpp"

#include <cmath>
#include <string>

#include "shipfee/errors.hpp"

namespace shipfee {
namespace {

void check_shape(const StationaryDistribution& pi, const Scenario& scenario,
                 const FeeStructure& policy) {
  if (policy.period_length() != scenario.period_length ||
      static_cast<int>(pi.per_age.size()) != scenario.period_length) {
    throw ParameterError("measures: stationary distribution has " +
                         std::to_string(pi.per_age.size()) + " ages, scenario has " +
                         std::to_string(scenario.period_length));
  }
  const std::size_t n = StateSpace(pi.bound).size();
  for (const auto& v : pi.per_age) {
    if (v.size() != n) throw ParameterError("measures: per-age vector has the wrong size");
  }
}

Pmf demand_at(const IncomeLaw& law) {
  std::vector<double> mass(law.express.support_max() + law.regular.support_max() + 1, 0.0);
  for (int e = 0; e <= law.express.support_max(); ++e) {
    for (int r = 0; r <= law.regular.support_max(); ++r) mass[e + r] += law.express[e] * law.regular[r];
  }
  double total = 0.0;
  for (double m : mass) total += m;
  for (double& m : mass) m /= total;
  return Pmf(std::move(mass));
}

}  // namespace

double expected_backorders(const StationaryDistribution& pi, const Scenario& scenario,
                           const FeeStructure& policy, IncomeConvention convention) {
  check_shape(pi, scenario, policy);
  const int last = scenario.period_length - 1;
  const int bound = pi.bound;
  const IncomeLaw law = income_law(scenario, policy[last]);
  const SignedPmf k_law = difference_pmf(law.express, scenario.capacity);
  const std::vector<double>& x = pi.per_age[last];
  double total = 0.0;
  for (int s = 0; s <= bound; ++s) {
    for (int c = 0; c <= s; ++c) {
      const double p = x[StateSpace::index(c, s)];
      if (p == 0.0) continue;
      double g = 0.0;
      for (int k = k_law.min; k <= k_law.max(); ++k) {
        const double pk = k_law[k];
        if (pk == 0.0) continue;
        if (convention == IncomeConvention::kAdjusted && s + k > bound) {
          g += pk * (c + bound - s);
        } else if (c + k > 0) {
          g += pk * (c + k);
        }
      }
      total += p * g;
    }
  }
  return total;
}

double express_revenue(const Scenario& scenario, const FeeStructure& policy) {
  double revenue = 0.0;
  for (int age = 0; age < policy.period_length(); ++age) {
    const double rate = split_rates(scenario.choice, scenario.lambda, policy[age]).express;
    if (rate > 0.0) revenue += policy[age] * rate;
  }
  return revenue;
}

double express_revenue_adjusted(const StationaryDistribution& pi, const Scenario& scenario,
                                const FeeStructure& policy) {
  check_shape(pi, scenario, policy);
  const int bound = pi.bound;
  const Pmf& capacity = scenario.capacity;
  double revenue = 0.0;
  for (int age = 0; age < policy.period_length(); ++age) {
    const IncomeLaw law = income_law(scenario, policy[age]);
    if (law.express.support_max() == 0) continue;
    const std::vector<double> totals = total_marginal(pi.per_age[age], bound);
    double accepted = 0.0;
    for (int s = 0; s <= bound; ++s) {
      if (totals[s] == 0.0) continue;
      double mean = 0.0;
      for (int e = 0; e <= law.express.support_max(); ++e) {
        for (int b = 0; b <= capacity.support_max(); ++b) {
          const double p = law.express[e] * capacity[b];
          mean += p * (s + e - b > bound ? bound - s + b : e);
        }
      }
      accepted += totals[s] * mean;
    }
    revenue += policy[age] * accepted;
  }
  return revenue;
}

double variable_profit(const StationaryDistribution& pi, const Scenario& scenario,
                       const FeeStructure& policy, IncomeConvention convention) {
  return express_revenue(scenario, policy) -
         scenario.penalty * expected_backorders(pi, scenario, policy, convention);
}

namespace {

template <typename Fn>
double overflow_average(const StationaryDistribution& pi, const Scenario& scenario,
                        const FeeStructure& policy, Fn&& weight) {
  check_shape(pi, scenario, policy);
  const int bound = pi.bound;
  double sum = 0.0;
  for (int age = 0; age < policy.period_length(); ++age) {
    const SignedPmf net = difference_pmf(demand_at(income_law(scenario, policy[age])), scenario.capacity);
    const std::vector<double> totals = total_marginal(pi.per_age[age], bound);
    for (int s = 0; s <= bound; ++s) {
      if (totals[s] == 0.0) continue;
      double w = 0.0;
      for (int k = std::max(net.min, bound - s + 1); k <= net.max(); ++k) w += net[k] * weight(s + k - bound);
      sum += totals[s] * w;
    }
  }
  return sum;
}

}  // namespace

double rejection_probability(const StationaryDistribution& pi, const Scenario& scenario,
                             const FeeStructure& policy) {
  return overflow_average(pi, scenario, policy, [](int) { return 1.0; }) / policy.period_length();
}

double expected_rejected_per_cycle(const StationaryDistribution& pi, const Scenario& scenario,
                                   const FeeStructure& policy) {
  return overflow_average(pi, scenario, policy, [](int excess) { return double(excess); });
}

double mean_delay(double expected_backorders, double lambda) {
  if (!(lambda > 0.0)) throw ParameterError("mean_delay: undefined for lambda == 0");
  return expected_backorders / lambda;
}

PerformanceReport evaluate(const Scenario& scenario, const FeeStructure& policy,
                           const EvaluateOptions& options) {
  scenario.validate();
  const int bound = options.bound ? *options.bound : find_bound(scenario, policy).bound;
  const TruncatedKernel kernel = build_kernel(scenario, policy, bound, options.threads);
  StationaryOptions stationary_options;
  if (!options.cold_start) stationary_options.initial = workload_warm_start(scenario, bound);
  const StationaryDistribution pi = stationary(kernel, stationary_options);

  PerformanceReport report;
  report.convention = options.convention;
  report.bound = bound;
  report.utilization = scenario.utilization();
  report.residual = pi.residual;
  report.iterations = pi.iterations;
  const double adjusted = expected_backorders(pi, scenario, policy, IncomeConvention::kAdjusted);
  report.expected_backorders_raw = expected_backorders(pi, scenario, policy, IncomeConvention::kRaw);
  report.expected_backorders =
      options.convention == IncomeConvention::kAdjusted ? adjusted : report.expected_backorders_raw;
  report.express_revenue = express_revenue(scenario, policy);
  report.express_revenue_adjusted = express_revenue_adjusted(pi, scenario, policy);
  report.variable_profit = report.express_revenue - scenario.penalty * report.expected_backorders;
  report.fixed_profit = scenario.period_length * scenario.lambda * scenario.choice.regular_price;
  report.rejection_probability = rejection_probability(pi, scenario, policy);
  report.expected_rejected_per_cycle = expected_rejected_per_cycle(pi, scenario, policy);
  report.mean_delay = scenario.lambda > 0.0 ? mean_delay(report.expected_backorders, scenario.lambda) : 0.0;
  for (int age = 0; age < policy.period_length(); ++age) {
    report.per_age_express_rate.push_back(split_rates(scenario.choice, scenario.lambda, policy[age]).express);
  }
  return report;
}

}  // namespace shipfee
