#pragma once

// Matrix-free evaluation of E[M] for many fee structures on one scenario.
//
// The age-0 law is known in closed form (the workload stationary law on the
// diagonal), so one pass over the T ages gives E[M] without iterating. The
// distribution is kept dense as a (bound+1) x (bound+1) grid; each age first
// folds the express-minus-capacity increment K = E - B into a weight table
// indexed by the base s + K, then spreads it with the clipped regular income.

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "shipfee/chain.hpp"
#include "shipfee/policy.hpp"

namespace shipfee {

struct CycleResult {
  double expected_backorders = 0.0;
  // L1 distance between the propagated total law after the deadline and the
  // age-0 start; a consistency check, ~1e-12 in practice.
  double cycle_residual = 0.0;
};

class CycleEvaluator {
 public:
  CycleEvaluator(const Scenario& scenario, int bound);

  int bound() const { return bound_; }
  const std::vector<double>& workload_stationary() const { return workload_; }

  CycleResult evaluate(const FeeStructure& policy) const;
  // Results are returned in input order. Shared fee prefixes are propagated
  // once; `threads` splits the sorted batch into contiguous chunks.
  std::vector<CycleResult> evaluate_batch(std::span<const FeeStructure> policies,
                                          int threads = 1) const;

 private:
  struct AgeOperator;

  std::shared_ptr<const AgeOperator> make_operator(double fee) const;

  Scenario scenario_;
  int bound_;
  std::vector<double> workload_;
};

}  // namespace shipfee
