#pragma once

// Monte Carlo trajectories of the truncated dynamics, used as an oracle for
// the exact solver.

#include <cstdint>
#include <vector>

#include "shipfee/chain.hpp"
#include "shipfee/policy.hpp"

namespace shipfee {

struct SimConfig {
  long cycles = 1'001'000;  // warm-up plus measured
  long warmup_cycles = 1000;
  std::uint64_t seed = 1;
  int bound = 0;
  int batches = 100;
  // Independent streams (seed, stream index); measured cycles are split
  // evenly among them.
  int replications = 1;
  int threads = 1;

  void validate() const;
};

struct Estimate {
  double mean = 0.0;
  double halfwidth = 0.0;  // 95% normal approximation over batch means
};

struct SimResult {
  Estimate expected_backorders;
  Estimate variable_profit;
  Estimate rejection_probability;  // fraction of periods with overflow
  Estimate rejected_per_cycle;
  std::vector<Estimate> per_age_express;  // accepted express orders per age
  long measured_cycles = 0;
};

SimResult simulate(const Scenario& scenario, const FeeStructure& policy, const SimConfig& config);

}  // namespace shipfee
