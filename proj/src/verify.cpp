#include "shipfee/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "shipfee/chain.hpp"
#include "shipfee/measures.hpp"
#include "shipfee/optimize.hpp"
#include "shipfee/sim.hpp"

namespace shipfee {
namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

Scenario random_scenario(Rng& rng, int period) {
  Scenario s;
  s.period_length = period;
  s.lambda = uniform(rng, 1.0, 3.0);
  const int support = uniform_int(rng, 10, 14);
  const double rho = uniform(rng, 0.6, 0.9);
  CapacitySpec spec{support, s.lambda / rho, uniform(rng, 0.2, 0.6)};
  s.capacity = discretized_beta(spec).pmf;
  s.choice = {4.0, 0.0, 4.0};
  s.penalty = uniform(rng, 0.0, 20.0);
  return s;
}

FeeStructure random_fees(Rng& rng, const ChoiceModel& choice, int period) {
  std::vector<double> fees(period);
  for (double& f : fees) f = uniform(rng, choice.u_min, choice.u_max);
  return FeeStructure(std::move(fees));
}

std::string describe_fees(const FeeStructure& f) {
  std::ostringstream out;
  out << "(";
  for (int a = 0; a < f.period_length(); ++a) out << (a ? ", " : "") << f[a];
  out << ")";
  return out.str();
}

void fail(SuiteResult& r, const std::string& message) {
  ++r.failures;
  if (r.messages.size() < 20) r.messages.push_back(message);
}

double report_distance(const PerformanceReport& a, const PerformanceReport& b) {
  double d = std::max({std::abs(a.expected_backorders - b.expected_backorders),
                       std::abs(a.expected_backorders_raw - b.expected_backorders_raw),
                       std::abs(a.variable_profit - b.variable_profit),
                       std::abs(a.express_revenue - b.express_revenue),
                       std::abs(a.express_revenue_adjusted - b.express_revenue_adjusted),
                       std::abs(a.fixed_profit - b.fixed_profit),
                       std::abs(a.rejection_probability - b.rejection_probability),
                       std::abs(a.expected_rejected_per_cycle - b.expected_rejected_per_cycle),
                       std::abs(a.mean_delay - b.mean_delay)});
  if (a.bound != b.bound || a.per_age_express_rate.size() != b.per_age_express_rate.size()) return INFINITY;
  for (std::size_t i = 0; i < a.per_age_express_rate.size(); ++i) {
    d = std::max(d, std::abs(a.per_age_express_rate[i] - b.per_age_express_rate[i]));
  }
  return d;
}

}  // namespace

SuiteResult cutoff_form_suite(const VerifyOptions& options) {
  SuiteResult r{"cutoff_form_invariance", 0, 0, 0.0, {}};
  Rng rng(options.seed ^ 0x11);
  for (int i = 0; i < options.cutoff_form_cases; ++i) {
    const int period = uniform_int(rng, 2, 6);
    const Scenario s = random_scenario(rng, period);
    CutoffPolicy cut;
    cut.cutoff = uniform_int(rng, 0, period - 1);
    for (int a = 0; a <= cut.cutoff; ++a) cut.fees.push_back(uniform(rng, s.choice.u_min, s.choice.u_max));
    const FeeStructure cutoff_form = to_fee_structure(period, cut);
    const FeeStructure canonical = canonicalize(period, cut.cutoff, cut.fees, s.choice);
    EvaluateOptions eval;
    eval.bound = find_bound(s, canonical).bound;
    const double d = report_distance(evaluate(s, cutoff_form, eval), evaluate(s, canonical, eval));
    ++r.cases;
    r.worst = std::max(r.worst, d);
    if (!(d <= 1e-12)) fail(r, "reports differ by " + std::to_string(d) + " for " + describe_fees(canonical));
  }
  return r;
}

SuiteResult dominance_suite(const VerifyOptions& options) {
  SuiteResult r{"front_loading_dominance", 0, 0, 0.0, {}};
  Rng rng(options.seed ^ 0x22);
  for (int i = 0; i < options.dominance_cases; ++i) {
    const int period = uniform_int(rng, 2, 4);
    const Scenario s = random_scenario(rng, period);
    std::vector<double> back(period);
    for (double& w : back) w = uniform(rng, 0.0, 1.0);
    std::vector<double> front = back;
    const int moves = uniform_int(rng, 1, 3);
    for (int m = 0; m < moves; ++m) {
      const int a = uniform_int(rng, 0, period - 2);
      const int b = uniform_int(rng, a + 1, period - 1);
      const double delta = uniform(rng, 0.0, 1.0) * std::min(1.0 - front[a], front[b]);
      front[a] += delta;
      front[b] -= delta;
    }
    std::vector<double> f_front(period), f_back(period);
    for (int a = 0; a < period; ++a) {
      f_front[a] = fee_for_take_rate(s.choice, std::clamp(front[a], 0.0, 1.0));
      f_back[a] = fee_for_take_rate(s.choice, std::clamp(back[a], 0.0, 1.0));
    }
    const DominanceRecord rec = dominance_experiment(s, FeeStructure(f_front), FeeStructure(f_back));
    ++r.cases;
    r.worst = std::max(r.worst, rec.backorders_front - rec.backorders_back);
    if (!rec.holds) {
      std::ostringstream msg;
      msg << "E[M] " << rec.backorders_front << " > " << rec.backorders_back << " for "
          << describe_fees(FeeStructure(f_front)) << " vs " << describe_fees(FeeStructure(f_back));
      fail(r, msg.str());
    }
  }
  return r;
}

SuiteResult monotone_argmax_suite(const VerifyOptions& options) {
  SuiteResult r{"monotone_argmax", 0, 0, 0.0, {}};
  Rng rng(options.seed ^ 0x33);
  SearchGrid grid;
  grid.fee_values = {0.4, 1.2, 2.0, 2.8, 3.6};
  OptimizeOptions opt;
  opt.threads = options.threads;
  for (int i = 0; i < options.monotone_argmax_cases; ++i) {
    Scenario s = random_scenario(rng, options.small_period);
    const ExhaustiveResult res = exhaustive_fee_vector_search(s, grid, opt);
    ++r.cases;
    const bool found = std::any_of(res.argmax.begin(), res.argmax.end(),
                                   [](const FeeStructure& f) { return is_weakly_monotone(f); });
    if (!found) fail(r, "no nondecreasing vector in the argmax, e.g. " + describe_fees(res.argmax.front()));
  }
  return r;
}

SuiteResult oracle_suite(const VerifyOptions& options) {
  SuiteResult r{"monte_carlo_oracle", 0, 0, 0.0, {}};
  Rng rng(options.seed ^ 0x44);
  for (int i = 0; i < options.oracle_cases; ++i) {
    const int period = uniform_int(rng, 2, 6);
    const Scenario s = random_scenario(rng, period);
    const FeeStructure f = random_fees(rng, s.choice, period);
    const PerformanceReport exact = evaluate(s, f);
    SimConfig cfg;
    cfg.bound = exact.bound;
    cfg.warmup_cycles = 1000;
    cfg.cycles = options.oracle_cycles + cfg.warmup_cycles;
    cfg.seed = options.seed + static_cast<std::uint64_t>(i);
    cfg.threads = options.threads;
    const SimResult sim = simulate(s, f, cfg);
    const auto check = [&](const char* what, double value, const Estimate& e) {
      const double z = e.halfwidth > 0.0 ? std::abs(e.mean - value) / e.halfwidth
                                         : (std::abs(e.mean - value) < 1e-12 ? 0.0 : INFINITY);
      r.worst = std::max(r.worst, z);
      ++r.cases;
      if (!(z <= 3.0)) {
        std::ostringstream msg;
        msg << what << ": simulated " << e.mean << " +- " << e.halfwidth << ", exact " << value;
        fail(r, msg.str());
      }
    };
    check("E[M]", exact.expected_backorders, sim.expected_backorders);
    check("E[G^V]", exact.variable_profit, sim.variable_profit);
    check("J", exact.rejection_probability, sim.rejection_probability);
  }
  return r;
}

SuiteResult workload_invariance_suite(const VerifyOptions& options) {
  SuiteResult r{"workload_invariance", 0, 0, 0.0, {}};
  Rng rng(options.seed ^ 0x55);
  for (int i = 0; i < options.invariance_cases; ++i) {
    const int period = uniform_int(rng, 2, 6);
    const Scenario s = random_scenario(rng, period);
    const int bound = find_bound(s, FeeStructure(std::vector<double>(period, 2.0))).bound;
    const WorkloadChain chain(poisson_pmf(s.lambda), s.capacity, bound);
    const std::vector<double> reference = chain.stationary();
    for (int p = 0; p < 3; ++p) {
      const FeeStructure f = random_fees(rng, s.choice, period);
      StationaryOptions cold;  // uniform start, so agreement is not inherited
      const StationaryDistribution pi = stationary(build_kernel(s, f, bound), cold);
      double d = 0.0;
      for (int age = 0; age < period; ++age) {
        const std::vector<double> m = total_marginal(pi.per_age[age], bound);
        for (int x = 0; x <= bound; ++x) d = std::max(d, std::abs(m[x] - reference[x]));
      }
      ++r.cases;
      r.worst = std::max(r.worst, d);
      if (!(d <= 1e-9)) fail(r, "total marginal deviates by " + std::to_string(d) + " for " + describe_fees(f));
    }
  }
  return r;
}

SuiteResult truncation_suite(const VerifyOptions& options) {
  SuiteResult r{"truncation", 0, 0, 0.0, {}};
  Rng rng(options.seed ^ 0x66);
  for (int i = 0; i < 5; ++i) {
    const int period = uniform_int(rng, 2, 6);
    const Scenario s = random_scenario(rng, period);
    const FeeStructure f = random_fees(rng, s.choice, period);
    const BoundSearch bs = find_bound(s, f);
    ++r.cases;
    if (!s.rejection_acceptable(bs.rejection_probability) ||
        (bs.rejection_below && s.rejection_acceptable(*bs.rejection_below))) {
      fail(r, "bound " + std::to_string(bs.bound) + " does not bracket the threshold");
    }
    const TruncatedKernel k = build_kernel(s, f, bs.bound);
    double worst = 0.0;
    for (const auto& m : k.per_age) {
      for (std::size_t row = 0; row < m->rows(); ++row) worst = std::max(worst, std::abs(m->row_sum(row) - 1.0));
    }
    ++r.cases;
    r.worst = std::max(r.worst, worst);
    if (!(worst <= 1e-12)) fail(r, "row sum off by " + std::to_string(worst));
  }
  return r;
}

std::vector<SuiteResult> run_all_suites(const VerifyOptions& options) {
  return {cutoff_form_suite(options),  dominance_suite(options),
          monotone_argmax_suite(options), oracle_suite(options),
          workload_invariance_suite(options), truncation_suite(options)};
}

}  // namespace shipfee
