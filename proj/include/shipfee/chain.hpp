#pragma once

// The periodic discrete-time Markov chain of an order-fulfillment center
// with a shipment deadline every T periods.
//
// State (due_now, total, age): due_now orders must ship at the next
// deadline, total counts every unprocessed order. Each period express income
// E, regular income R and capacity B arrive; capacity serves due_now + E
// first. At age T-1 the deadline passes and everything left becomes due at
// the next one. Total backlog is capped at `bound`; overflowing income is
// rejected, regular orders first.

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "shipfee/choice.hpp"
#include "shipfee/policy.hpp"
#include "shipfee/stochastics.hpp"

namespace shipfee {

struct Scenario {
  int period_length = 8;
  double lambda = 0.0;
  Pmf capacity;
  ChoiceModel choice;
  double penalty = 0.0;
  double rejection_threshold = 0.023;
  // find_bound only considers multiples of bound_step.
  int bound_step = 1;
  int bound_cap = 2000;
  // When set, J is rounded to this many decimals before the comparison.
  std::optional<int> rejection_decimals;

  // Throws ParameterError; requires T >= 2, penalty >= 0 and utilization < 1.
  void validate() const;
  double utilization() const;
  bool rejection_acceptable(double j) const;
};

// Enumerates the pairs 0 <= due_now <= total <= bound.
class StateSpace {
 public:
  explicit StateSpace(int bound);

  int bound() const { return bound_; }
  std::size_t size() const { return size_; }
  static std::size_t index(int due_now, int total) {
    return static_cast<std::size_t>(total) * (total + 1) / 2 + due_now;
  }
  std::pair<int, int> state(std::size_t index) const;  // (due_now, total)

 private:
  int bound_;
  std::size_t size_;
};

struct StepOutcome {
  int due_now = 0;
  int total = 0;
  int overflow = 0;          // O = (total + E + R - B - bound)^+
  int express_accepted = 0;  // E'
  int regular_accepted = 0;  // R'
  int backorders = 0;        // (due_now + E' - B)^+ at the deadline age, else 0
};

// One period of the truncated dynamics from (due_now, total) at `age`.
StepOutcome step(int due_now, int total, int age, int period_length, int bound, int express,
                 int regular, int capacity);

// Truncated Poisson income laws at one age.
struct IncomeLaw {
  Pmf express;
  Pmf regular;
};

IncomeLaw income_law(const Scenario& scenario, double fee);

// Row-major sparse matrix; rows are source states.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  CsrMatrix(std::size_t rows, std::vector<std::size_t> row_ptr, std::vector<std::size_t> cols,
            std::vector<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t nonzeros() const { return values_.size(); }
  // y = x * A (x, y are row vectors).
  void left_multiply(std::span<const double> x, std::span<double> y) const;
  double row_sum(std::size_t row) const;
  double at(std::size_t row, std::size_t col) const;

 private:
  std::size_t rows_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> cols_;
  std::vector<double> values_;
};

struct TruncatedKernel {
  int bound = 0;
  int period_length = 0;
  // Ages with the same fee and deadline role share one matrix.
  std::vector<std::shared_ptr<const CsrMatrix>> per_age;
  // Per age and source state: P(overflow) and E[rejected orders].
  std::vector<std::vector<double>> overflow_probability;
  std::vector<std::vector<double>> expected_rejections;
};

// Enumerates joint (E, R, B) outcomes for every state and age. bound >= 0.
TruncatedKernel build_kernel(const Scenario& scenario, const FeeStructure& policy, int bound,
                             int threads = 1);

// The total-backlog process alone: X' = min(bound, (X + D - B)^+). It does not
// depend on the fee structure because rejection only looks at X + D - B.
class WorkloadChain {
 public:
  WorkloadChain(const Pmf& demand, const Pmf& capacity, int bound);

  int bound() const { return bound_; }
  // Stationary law by GTH elimination restricted to the band of the matrix.
  std::vector<double> stationary() const;
  // P(X + D - B > bound) under `pi`.
  double rejection_probability(std::span<const double> pi) const;
  double expected_rejections(std::span<const double> pi) const;

 private:
  int bound_;
  SignedPmf net_;  // D - B
};

struct BoundSearch {
  int bound = 0;
  double rejection_probability = 0.0;
  // J at bound - bound_step; nullopt when bound is the first grid point.
  std::optional<double> rejection_below;
  std::vector<std::pair<int, double>> probes;
  bool linear_fallback = false;
};

// Smallest multiple of scenario.bound_step in [1, bound_cap] whose stationary
// rejection probability is <= scenario.rejection_threshold. J does not depend
// on `policy` (see WorkloadChain); the argument is validated only.
// Throws CapacityInfeasibleError when the cap is reached.
BoundSearch find_bound(const Scenario& scenario, const FeeStructure& policy);

// Stationary J for a given bound.
double rejection_probability_at(const Scenario& scenario, int bound);

struct StationaryOptions {
  double tolerance = 1e-12;
  long max_iterations = 1'000'000;
  // Age-0 start vector; uniform over all states when empty.
  std::vector<double> initial;
};

struct StationaryDistribution {
  int bound = 0;
  std::vector<std::vector<double>> per_age;
  long iterations = 0;
  double residual = 0.0;
  bool damped = false;
};

// Power iteration on the cycle map P_0 P_1 ... P_{T-1} at age 0, then
// propagation to the other ages. Throws NumericalError on non-convergence.
StationaryDistribution stationary(const TruncatedKernel& kernel,
                                  const StationaryOptions& options = {});

// Age-0 fixed point built from the workload chain: at age 0 due_now == total,
// so the vector is the workload law placed on the diagonal states.
std::vector<double> workload_warm_start(const Scenario& scenario, int bound);

// Marginal law of `total` for a per-age vector.
std::vector<double> total_marginal(std::span<const double> per_age_vector, int bound);
std::vector<double> due_now_marginal(std::span<const double> per_age_vector, int bound);

}  // namespace shipfee
