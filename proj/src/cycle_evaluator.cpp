#include "shipfee/cycle_evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "shipfee/errors.hpp"
#include "shipfee/parallel.hpp"
#include "shipfee/simd.hpp"

namespace shipfee {

struct CycleEvaluator::AgeOperator {
  SignedPmf increment;         // K = E - B
  std::vector<double> tail;    // tail[d] = P(K > d), d = 0..bound
  int base_min = 0;            // smallest base s + K
  // clipped[(u - base_min) * (bound + 1) + t] = P(clip(u + R, 0, bound) = t)
  std::vector<double> clipped;
};

CycleEvaluator::CycleEvaluator(const Scenario& scenario, int bound)
    : scenario_(scenario), bound_(bound) {
  scenario_.validate();
  if (bound < 0) throw ParameterError("cycle evaluator: bound must be >= 0");
  const WorkloadChain chain(poisson_pmf(scenario_.lambda), scenario_.capacity, bound);
  workload_ = chain.stationary();
}

std::shared_ptr<const CycleEvaluator::AgeOperator> CycleEvaluator::make_operator(double fee) const {
  const IncomeLaw law = income_law(scenario_, fee);
  auto op = std::make_shared<AgeOperator>();
  op->increment = difference_pmf(law.express, scenario_.capacity);
  const int n = bound_ + 1;
  op->tail.assign(n, 0.0);
  for (int d = 0; d < n; ++d) {
    for (int k = std::max(d + 1, op->increment.min); k <= op->increment.max(); ++k) {
      op->tail[d] += op->increment[k];
    }
  }
  op->base_min = op->increment.min;
  const int bases = bound_ - op->base_min + 1;
  op->clipped.assign(static_cast<std::size_t>(bases) * n, 0.0);
  for (int u = op->base_min; u <= bound_; ++u) {
    double* row = op->clipped.data() + static_cast<std::size_t>(u - op->base_min) * n;
    for (int r = 0; r <= law.regular.support_max(); ++r) {
      row[std::clamp(u + r, 0, bound_)] += law.regular[r];
    }
  }
  return op;
}

namespace {

// Dense distribution stored row-major as [due_now][total].
struct Workspace {
  std::vector<double> by_total;  // transposed input, [total][due_now]
  std::vector<double> prefix;    // running sums of by_total rows
  std::vector<double> weight;    // [base - base_min][due_now']
};

}  // namespace

static void advance(const std::vector<double>& in, std::vector<double>& out, int bound,
                    const auto& op, bool deadline, Workspace& ws, double* backorders) {
  const int n = bound + 1;
  const std::size_t cells = static_cast<std::size_t>(n) * n;
  ws.by_total.assign(cells, 0.0);
  for (int c = 0; c < n; ++c) {
    for (int s = c; s < n; ++s) ws.by_total[static_cast<std::size_t>(s) * n + c] = in[static_cast<std::size_t>(c) * n + s];
  }
  ws.prefix.resize(cells);
  for (int s = 0; s < n; ++s) {
    double run = 0.0;
    for (int c = 0; c < n; ++c) {
      run += ws.by_total[static_cast<std::size_t>(s) * n + c];
      ws.prefix[static_cast<std::size_t>(s) * n + c] = run;
    }
  }
  const int base_min = op.base_min;
  const int bases = bound - base_min + 1;
  ws.weight.assign(static_cast<std::size_t>(bases) * n, 0.0);
  out.assign(cells, 0.0);

  double expected = 0.0;
  double capped_to_bound = 0.0;
  for (int s = 0; s < n; ++s) {
    const double* xs = ws.by_total.data() + static_cast<std::size_t>(s) * n;
    const double* ps = ws.prefix.data() + static_cast<std::size_t>(s) * n;
    if (ps[s] == 0.0) continue;
    const int k_hi = std::min(op.increment.max(), bound - s);
    for (int k = op.increment.min; k <= k_hi; ++k) {
      const double p = op.increment[k];
      if (p == 0.0) continue;
      double* wu = ws.weight.data() + static_cast<std::size_t>(s + k - base_min) * n;
      const int c0 = std::max(0, -k);
      if (c0 > 0) wu[0] += p * ps[std::min(s, c0 - 1)];
      if (c0 <= s) {
        simd::axpy(p, std::span<const double>(xs + c0, s - c0 + 1),
                   std::span<double>(wu + c0 + k, s - c0 + 1));
      }
    }
    // Increment pushes past the bound: express is cut to fit and regular
    // income is rejected entirely.
    const double tail = op.tail[bound - s];
    if (tail == 0.0) continue;
    if (deadline) {
      for (int c = 0; c <= s; ++c) expected += tail * xs[c] * (c + bound - s);
      capped_to_bound += tail * ps[s];
    } else {
      for (int c = 0; c <= s; ++c) out[static_cast<std::size_t>(c + bound - s) * n + bound] += tail * xs[c];
    }
  }

  if (deadline) {
    std::vector<double> total_law(n, 0.0);
    for (int u = base_min; u <= bound; ++u) {
      const double* wu = ws.weight.data() + static_cast<std::size_t>(u - base_min) * n;
      const int c_hi = std::max(u, 0);
      double mass = 0.0;
      for (int c = 0; c <= c_hi; ++c) {
        mass += wu[c];
        expected += wu[c] * c;
      }
      if (mass == 0.0) continue;
      const int lo = std::max(u, 0);
      const double* q = op.clipped.data() + static_cast<std::size_t>(u - base_min) * n;
      simd::axpy(mass, std::span<const double>(q + lo, n - lo), std::span<double>(total_law.data() + lo, n - lo));
    }
    total_law[bound] += capped_to_bound;
    for (int s = 0; s < n; ++s) out[static_cast<std::size_t>(s) * n + s] = total_law[s];
    *backorders = expected;
    return;
  }

  for (int u = base_min; u <= bound; ++u) {
    const double* wu = ws.weight.data() + static_cast<std::size_t>(u - base_min) * n;
    const double* q = op.clipped.data() + static_cast<std::size_t>(u - base_min) * n;
    const int lo = std::max(u, 0);
    for (int c = 0; c <= lo; ++c) {
      if (wu[c] == 0.0) continue;
      simd::axpy(wu[c], std::span<const double>(q + lo, n - lo),
                 std::span<double>(out.data() + static_cast<std::size_t>(c) * n + lo, n - lo));
    }
  }
}

CycleResult CycleEvaluator::evaluate(const FeeStructure& policy) const {
  return evaluate_batch(std::span<const FeeStructure>(&policy, 1)).front();
}

std::vector<CycleResult> CycleEvaluator::evaluate_batch(std::span<const FeeStructure> policies,
                                                        int threads) const {
  const int period = scenario_.period_length;
  std::map<double, std::shared_ptr<const AgeOperator>> operators;
  for (const FeeStructure& policy : policies) {
    if (policy.period_length() != period) {
      throw ParameterError("cycle evaluator: fee structure length differs from period_length");
    }
    for (double fee : policy.fees()) {
      const double rate = split_rates(scenario_.choice, scenario_.lambda, fee).express;
      if (!operators.contains(rate)) operators.emplace(rate, make_operator(fee));
    }
  }
  const auto op_for = [&](double fee) -> const AgeOperator& {
    return *operators.at(split_rates(scenario_.choice, scenario_.lambda, fee).express);
  };

  std::vector<std::size_t> order(policies.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return policies[a].fees() < policies[b].fees();
  });

  const int n = bound_ + 1;
  std::vector<double> start(static_cast<std::size_t>(n) * n, 0.0);
  for (int s = 0; s < n; ++s) start[static_cast<std::size_t>(s) * n + s] = workload_[s];

  std::vector<CycleResult> results(policies.size());
  parallel_chunks(order.size(), threads, [&](std::size_t begin, std::size_t end, std::size_t) {
    Workspace ws;
    // stack[a] is the law at age a given the fees of the previous candidate.
    std::vector<std::vector<double>> stack(period);
    stack[0] = start;
    std::vector<double> closing;
    const FeeStructure* previous = nullptr;
    for (std::size_t i = begin; i < end; ++i) {
      const FeeStructure& policy = policies[order[i]];
      int shared = 0;
      if (previous) {
        while (shared < period - 1 && (*previous)[shared] == policy[shared]) ++shared;
      }
      for (int age = shared; age < period - 1; ++age) {
        advance(stack[age], stack[age + 1], bound_, op_for(policy[age]), false, ws, nullptr);
      }
      CycleResult result;
      advance(stack[period - 1], closing, bound_, op_for(policy[period - 1]), true, ws,
              &result.expected_backorders);
      double residual = 0.0;
      for (int s = 0; s < n; ++s) {
        residual += std::abs(closing[static_cast<std::size_t>(s) * n + s] - workload_[s]);
      }
      result.cycle_residual = residual;
      results[order[i]] = result;
      previous = &policy;
    }
  });
  return results;
}

}  // namespace shipfee
