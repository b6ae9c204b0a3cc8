#include "shipfee/sim.hpp"

#include <cmath>
#include <random>

#include "shipfee/errors.hpp"
#include "shipfee/parallel.hpp"

namespace shipfee {

void SimConfig::validate() const {
  if (warmup_cycles < 0) throw ParameterError("simulate: warmup_cycles must be >= 0");
  if (cycles <= warmup_cycles) throw ParameterError("simulate: no measured cycles (cycles <= warmup_cycles)");
  if (bound < 0) throw ParameterError("simulate: bound must be >= 0");
  if (batches < 2) throw ParameterError("simulate: batches must be >= 2");
  if (replications < 1) throw ParameterError("simulate: replications must be >= 1");
  if ((cycles - warmup_cycles) / replications < batches) {
    throw ParameterError("simulate: fewer measured cycles per replication than batches");
  }
}

namespace {

std::discrete_distribution<int> sampler(const Pmf& pmf) {
  const auto mass = pmf.mass();
  return std::discrete_distribution<int>(mass.begin(), mass.end());
}

struct CycleTotals {
  double backorders = 0.0;
  double profit = 0.0;
  double overflow_periods = 0.0;
  double rejected = 0.0;
};

struct BatchSums {
  std::vector<double> backorders, profit, overflow, rejected;
  std::vector<std::vector<double>> express;  // [age][batch]
};

void run_stream(const Scenario& scenario, const FeeStructure& policy, const SimConfig& config,
                int stream, long measured, BatchSums& out) {
  std::seed_seq seq{static_cast<std::uint32_t>(config.seed),
                    static_cast<std::uint32_t>(config.seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  std::mt19937_64 rng(seq);
  const int period = scenario.period_length;
  std::vector<std::discrete_distribution<int>> express, regular;
  std::vector<double> fee(period, 0.0);
  for (int age = 0; age < period; ++age) {
    const IncomeLaw law = income_law(scenario, policy[age]);
    express.push_back(sampler(law.express));
    regular.push_back(sampler(law.regular));
    if (law.express.support_max() > 0) fee[age] = policy[age];
  }
  auto capacity = sampler(scenario.capacity);

  const int batches = config.batches;
  out.backorders.assign(batches, 0.0);
  out.profit.assign(batches, 0.0);
  out.overflow.assign(batches, 0.0);
  out.rejected.assign(batches, 0.0);
  out.express.assign(period, std::vector<double>(batches, 0.0));

  int due_now = 0;
  int total = 0;
  const long per_batch = measured / batches;
  const long used = per_batch * batches;
  for (long k = -config.warmup_cycles; k < used; ++k) {
    const bool record = k >= 0;
    const int batch = record ? static_cast<int>(k / per_batch) : 0;
    double revenue = 0.0;
    for (int age = 0; age < period; ++age) {
      const int e = express[age](rng);
      const int r = regular[age](rng);
      const int b = capacity(rng);
      const StepOutcome next = step(due_now, total, age, period, config.bound, e, r, b);
      if (record) {
        revenue += fee[age] * e;
        out.express[age][batch] += next.express_accepted;
        if (next.overflow > 0) out.overflow[batch] += 1.0;
        out.rejected[batch] += next.overflow;
        if (age == period - 1) out.backorders[batch] += next.backorders;
      }
      if (record && age == period - 1) {
        out.profit[batch] += revenue - scenario.penalty * next.backorders;
      }
      due_now = next.due_now;
      total = next.total;
    }
  }
  const double n = static_cast<double>(per_batch);
  for (int j = 0; j < batches; ++j) {
    out.backorders[j] /= n;
    out.profit[j] /= n;
    out.overflow[j] /= n * period;
    out.rejected[j] /= n;
    for (int age = 0; age < period; ++age) out.express[age][j] /= n;
  }
}

// Pairwise summation keeps the pooled mean independent of the stream count.
double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  return pairwise_sum(x, n / 2) + pairwise_sum(x + n / 2, n - n / 2);
}

Estimate estimate(const std::vector<double>& batch_means) {
  const double n = static_cast<double>(batch_means.size());
  Estimate e;
  e.mean = pairwise_sum(batch_means.data(), batch_means.size()) / n;
  double ss = 0.0;
  for (double x : batch_means) ss += (x - e.mean) * (x - e.mean);
  e.halfwidth = 1.959963984540054 * std::sqrt(ss / (n - 1.0) / n);
  return e;
}

}  // namespace

SimResult simulate(const Scenario& scenario, const FeeStructure& policy, const SimConfig& config) {
  scenario.validate();
  config.validate();
  if (policy.period_length() != scenario.period_length) {
    throw ParameterError("simulate: fee structure length differs from period_length");
  }
  const long measured = (config.cycles - config.warmup_cycles) / config.replications;
  std::vector<BatchSums> streams(config.replications);
  parallel_chunks(streams.size(), config.threads, [&](std::size_t begin, std::size_t end, std::size_t) {
    for (std::size_t s = begin; s < end; ++s) {
      run_stream(scenario, policy, config, static_cast<int>(s), measured, streams[s]);
    }
  });

  BatchSums pooled;
  pooled.express.resize(scenario.period_length);
  for (const BatchSums& s : streams) {
    pooled.backorders.insert(pooled.backorders.end(), s.backorders.begin(), s.backorders.end());
    pooled.profit.insert(pooled.profit.end(), s.profit.begin(), s.profit.end());
    pooled.overflow.insert(pooled.overflow.end(), s.overflow.begin(), s.overflow.end());
    pooled.rejected.insert(pooled.rejected.end(), s.rejected.begin(), s.rejected.end());
    for (int age = 0; age < scenario.period_length; ++age) {
      pooled.express[age].insert(pooled.express[age].end(), s.express[age].begin(), s.express[age].end());
    }
  }
  SimResult result;
  result.expected_backorders = estimate(pooled.backorders);
  result.variable_profit = estimate(pooled.profit);
  result.rejection_probability = estimate(pooled.overflow);
  result.rejected_per_cycle = estimate(pooled.rejected);
  for (const auto& per_age : pooled.express) result.per_age_express.push_back(estimate(per_age));
  result.measured_cycles = (measured / config.batches) * config.batches * config.replications;
  return result;
}

}  // namespace shipfee
