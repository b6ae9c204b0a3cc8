#include "shipfee/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "shipfee/cycle_evaluator.hpp"
#include "shipfee/errors.hpp"

namespace shipfee {

SearchGrid SearchGrid::defaults() {
  SearchGrid grid;
  for (int k = 1; k <= 19; ++k) grid.fee_values.push_back(k / 5.0);
  return grid;
}

int SearchGrid::resolved_cutoff_max(int period_length) const {
  return cutoff_max < 0 ? period_length - 1 : cutoff_max;
}

void SearchGrid::validate(const ChoiceModel& choice, int period_length) const {
  if (fee_values.empty()) throw ParameterError("grid: fee_values is empty");
  for (std::size_t i = 0; i < fee_values.size(); ++i) {
    const double f = fee_values[i];
    if (!std::isfinite(f) || f < choice.u_min || f > choice.u_max) {
      std::ostringstream msg;
      msg << "grid: fee " << f << " outside [" << choice.u_min << ", " << choice.u_max << "]";
      throw ParameterError(msg.str());
    }
    if (i > 0 && !(f > fee_values[i - 1])) throw ParameterError("grid: fee_values must be strictly increasing");
  }
  const int hi = resolved_cutoff_max(period_length);
  if (cutoff_min < 0 || hi > period_length - 1 || cutoff_min > hi) {
    throw ParameterError("grid: cutoff range must satisfy 0 <= min <= max <= T-1");
  }
}

double revenue_max_fee(const ChoiceModel& choice) {
  choice.validate();
  return std::clamp(choice.u_max / 2.0, choice.u_min, choice.u_max);
}

const char* search_family_name(SearchFamily family) {
  switch (family) {
    case SearchFamily::kTspCf:
      return "TSP-CF";
    case SearchFamily::kTspCfStar:
      return "TSP-CF*";
    case SearchFamily::kTsp:
      return "TSP";
  }
  return "?";
}

std::vector<Candidate> family_candidates(const Scenario& scenario, SearchFamily family,
                                         const SearchGrid& grid) {
  const int period = scenario.period_length;
  grid.validate(scenario.choice, period);
  const int hi = grid.resolved_cutoff_max(period);
  std::vector<Candidate> out;
  const auto add = [&](PolicyParams params) {
    Candidate c;
    c.policy = build_policy(period, params, scenario.choice);
    c.params = std::move(params);
    out.push_back(std::move(c));
  };
  for (int cutoff = grid.cutoff_min; cutoff <= hi; ++cutoff) {
    switch (family) {
      case SearchFamily::kTspCf:
        add(CutoffFee{revenue_max_fee(scenario.choice), cutoff});
        break;
      case SearchFamily::kTspCfStar:
        for (double f : grid.fee_values) add(CutoffFee{f, cutoff});
        break;
      case SearchFamily::kTsp:
        for (std::size_t e = 0; e < grid.fee_values.size(); ++e) {
          for (std::size_t l = e + 1; l < grid.fee_values.size(); ++l) {
            for (int sw = 0; sw < cutoff; ++sw) {
              add(SimpleTspParams{grid.fee_values[e], grid.fee_values[l], sw, cutoff});
            }
          }
        }
        break;
    }
  }
  if (out.empty()) throw ParameterError("grid: no candidates for this family");
  return out;
}

void score_candidates(const Scenario& scenario, int bound, std::vector<Candidate>& candidates,
                      int threads) {
  const CycleEvaluator evaluator(scenario, bound);
  std::vector<FeeStructure> policies;
  policies.reserve(candidates.size());
  for (const Candidate& c : candidates) policies.push_back(c.policy);
  const std::vector<CycleResult> results = evaluator.evaluate_batch(policies, threads);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    candidates[i].expected_backorders = results[i].expected_backorders;
    candidates[i].variable_profit = express_revenue(scenario, candidates[i].policy) -
                                    scenario.penalty * results[i].expected_backorders;
  }
}

namespace {

struct TieKey {
  int cutoff;
  int switch_age;
  double express_fee;
  double lastminute_fee;
};

TieKey tie_key(const PolicyParams& params) {
  if (const auto* cf = std::get_if<CutoffFee>(&params)) {
    return {cf->cutoff_age, cf->cutoff_age, cf->fee, cf->fee};
  }
  if (const auto* t = std::get_if<SimpleTspParams>(&params)) {
    return {t->cutoff_age, t->switch_age, t->express_fee, t->lastminute_fee};
  }
  const double f = std::get<ConstantFee>(params).fee;
  return {std::numeric_limits<int>::max(), std::numeric_limits<int>::max(), f, f};
}

// Higher cutoff, then higher switch, then lower f_E, then lower f_LE.
bool preferred(const PolicyParams& a, const PolicyParams& b) {
  const TieKey x = tie_key(a);
  const TieKey y = tie_key(b);
  if (x.cutoff != y.cutoff) return x.cutoff > y.cutoff;
  if (x.switch_age != y.switch_age) return x.switch_age > y.switch_age;
  if (x.express_fee != y.express_fee) return x.express_fee < y.express_fee;
  return x.lastminute_fee < y.lastminute_fee;
}

int cutoff_of(const PolicyParams& params) { return tie_key(params).cutoff; }

// Index of the best candidate in `indices` and whether a tie was resolved.
std::pair<std::size_t, bool> select_best(const std::vector<Candidate>& candidates,
                                         const std::vector<std::size_t>& indices, double tol) {
  std::size_t best = indices.front();
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i : indices) top = std::max(top, candidates[i].variable_profit);
  int tied = 0;
  bool first = true;
  for (std::size_t i : indices) {
    if (candidates[i].variable_profit < top - tol) continue;
    ++tied;
    if (first || preferred(candidates[i].params, candidates[best].params)) best = i;
    first = false;
  }
  return {best, tied > 1};
}

}  // namespace

Optimum optimize_family(const Scenario& scenario, SearchFamily family, const SearchGrid& grid,
                        const OptimizeOptions& options) {
  scenario.validate();
  std::vector<Candidate> candidates = family_candidates(scenario, family, grid);
  const int bound = options.bound ? *options.bound : find_bound(scenario, candidates.front().policy).bound;
  score_candidates(scenario, bound, candidates, options.threads);

  std::vector<std::size_t> all(candidates.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const auto [best, tie] = select_best(candidates, all, options.tie_tolerance);

  Optimum optimum;
  optimum.bound = bound;
  optimum.evaluations = static_cast<long>(candidates.size());
  optimum.params = candidates[best].params;
  optimum.policy = candidates[best].policy;
  optimum.tie_broken = tie;
  double runner_up = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (i != best) runner_up = std::max(runner_up, candidates[i].variable_profit);
  }
  optimum.runner_up_gap =
      std::isfinite(runner_up) ? candidates[best].variable_profit - runner_up : 0.0;

  std::map<int, std::vector<std::size_t>> by_cutoff;
  for (std::size_t i = 0; i < candidates.size(); ++i) by_cutoff[cutoff_of(candidates[i].params)].push_back(i);
  for (const auto& [cutoff, indices] : by_cutoff) {
    optimum.best_by_cutoff.emplace(cutoff, candidates[select_best(candidates, indices, options.tie_tolerance).first]);
  }

  EvaluateOptions eval;
  eval.bound = bound;
  eval.threads = options.threads;
  optimum.report = evaluate(scenario, optimum.policy, eval);
  optimum.route_gap = std::abs(optimum.report.expected_backorders - candidates[best].expected_backorders);
  return optimum;
}

ExhaustiveResult exhaustive_fee_vector_search(const Scenario& scenario, const SearchGrid& grid,
                                              const OptimizeOptions& options, long budget) {
  scenario.validate();
  const int period = scenario.period_length;
  grid.validate(scenario.choice, period);
  const std::size_t m = grid.fee_values.size();
  double count = std::pow(static_cast<double>(m), period);
  if (count > static_cast<double>(budget)) {
    std::ostringstream msg;
    msg << "exhaustive search: " << m << "^" << period << " fee vectors exceed the budget of "
        << budget << "; use a smaller grid or a shorter cycle";
    throw ParameterError(msg.str());
  }
  std::vector<FeeStructure> policies;
  policies.reserve(static_cast<std::size_t>(count));
  std::vector<std::size_t> digits(period, 0);
  for (long n = 0; n < static_cast<long>(count); ++n) {
    std::vector<double> fees(period);
    for (int a = 0; a < period; ++a) fees[a] = grid.fee_values[digits[a]];
    policies.emplace_back(std::move(fees));
    for (int a = period - 1; a >= 0; --a) {
      if (++digits[a] < m) break;
      digits[a] = 0;
    }
  }

  ExhaustiveResult result;
  result.bound = options.bound ? *options.bound : find_bound(scenario, policies.front()).bound;
  const CycleEvaluator evaluator(scenario, result.bound);
  const std::vector<CycleResult> scores = evaluator.evaluate_batch(policies, options.threads);
  std::vector<double> profit(policies.size());
  for (std::size_t i = 0; i < policies.size(); ++i) {
    profit[i] = express_revenue(scenario, policies[i]) - scenario.penalty * scores[i].expected_backorders;
  }
  result.best_profit = *std::max_element(profit.begin(), profit.end());
  for (std::size_t i = 0; i < policies.size(); ++i) {
    if (profit[i] >= result.best_profit - options.tie_tolerance) result.argmax.push_back(policies[i]);
  }
  result.evaluations = static_cast<long>(policies.size());
  return result;
}

DominanceRecord dominance_experiment(const Scenario& scenario, const FeeStructure& f,
                                     const FeeStructure& f_prime, std::optional<int> bound) {
  scenario.validate();
  const CumulativeDemandProfile front = demand_profile(f, scenario.choice, scenario.lambda);
  const CumulativeDemandProfile back = demand_profile(f_prime, scenario.choice, scenario.lambda);
  if (!front.dominates(back)) {
    throw ParameterError(
        "dominance_experiment: the profile of f does not dominate that of f_prime with equal totals");
  }
  DominanceRecord record;
  record.bound = bound ? *bound : find_bound(scenario, f).bound;
  EvaluateOptions eval;
  eval.bound = record.bound;
  record.backorders_front = evaluate(scenario, f, eval).expected_backorders;
  record.backorders_back = evaluate(scenario, f_prime, eval).expected_backorders;
  record.holds = record.backorders_front <= record.backorders_back + 1e-9;
  return record;
}

}  // namespace shipfee
