#include "shipfee/chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "shipfee/errors.hpp"
#include "shipfee/parallel.hpp"
#include "shipfee/simd.hpp"

namespace shipfee {

void Scenario::validate() const {
  if (period_length < 2) throw ParameterError("scenario: period_length must be >= 2");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ParameterError("scenario: lambda must be finite and >= 0");
  }
  if (!(penalty >= 0.0) || !std::isfinite(penalty)) {
    throw ParameterError("scenario: penalty must be finite and >= 0");
  }
  if (!(rejection_threshold > 0.0 && rejection_threshold <= 1.0)) {
    throw ParameterError("scenario: rejection_threshold must lie in (0, 1]");
  }
  if (bound_step < 1) throw ParameterError("scenario: bound_step must be >= 1");
  if (bound_cap < bound_step) throw ParameterError("scenario: bound_cap must be >= bound_step");
  if (rejection_decimals && (*rejection_decimals < 0 || *rejection_decimals > 12)) {
    throw ParameterError("scenario: rejection_decimals must lie in [0, 12]");
  }
  choice.validate();
  const double mean_capacity = capacity.mean();
  if (!(mean_capacity > 0.0)) {
    throw ParameterError("scenario: expected capacity must be > 0 (utilization undefined)");
  }
  if (!(lambda < mean_capacity)) {
    std::ostringstream msg;
    msg << "scenario: utilization lambda / E[B] = " << lambda / mean_capacity
        << " must be below 1";
    throw ParameterError(msg.str());
  }
}

double Scenario::utilization() const { return lambda / capacity.mean(); }

bool Scenario::rejection_acceptable(double j) const {
  if (!rejection_decimals) return j <= rejection_threshold;
  const double scale = std::pow(10.0, *rejection_decimals);
  return std::llround(j * scale) <= std::llround(rejection_threshold * scale);
}

StateSpace::StateSpace(int bound) : bound_(bound) {
  if (bound < 0) throw ParameterError("state space: bound must be >= 0");
  size_ = static_cast<std::size_t>(bound + 1) * (bound + 2) / 2;
}

std::pair<int, int> StateSpace::state(std::size_t index) const {
  int total = static_cast<int>((std::sqrt(8.0 * static_cast<double>(index) + 1.0) - 1.0) / 2.0);
  while (StateSpace::index(0, total + 1) <= index) ++total;
  while (StateSpace::index(0, total) > index) --total;
  return {static_cast<int>(index - StateSpace::index(0, total)), total};
}

StepOutcome step(int due_now, int total, int age, int period_length, int bound, int express,
                 int regular, int capacity) {
  StepOutcome out;
  out.overflow = std::max(0, total + express + regular - capacity - bound);
  out.regular_accepted = std::max(0, regular - out.overflow);
  out.express_accepted = std::max(0, express - std::max(0, out.overflow - regular));
  out.total = std::max(0, total + out.express_accepted + out.regular_accepted - capacity);
  const int due_left = std::max(0, due_now + out.express_accepted - capacity);
  if (age == period_length - 1) {
    out.backorders = due_left;
    out.due_now = out.total;
  } else {
    out.due_now = due_left;
  }
  return out;
}

IncomeLaw income_law(const Scenario& scenario, double fee) {
  const ArrivalRates rates = split_rates(scenario.choice, scenario.lambda, fee);
  return {poisson_pmf(rates.express), poisson_pmf(rates.regular)};
}

CsrMatrix::CsrMatrix(std::size_t rows, std::vector<std::size_t> row_ptr,
                     std::vector<std::size_t> cols, std::vector<double> values)
    : rows_(rows), row_ptr_(std::move(row_ptr)), cols_(std::move(cols)), values_(std::move(values)) {
  if (row_ptr_.size() != rows_ + 1 || cols_.size() != values_.size() ||
      row_ptr_.back() != values_.size()) {
    throw ParameterError("csr: inconsistent layout");
  }
}

void CsrMatrix::left_multiply(std::span<const double> x, std::span<double> y) const {
  std::fill(y.begin(), y.end(), 0.0);
  for (std::size_t row = 0; row < rows_; ++row) {
    const double weight = x[row];
    if (weight == 0.0) continue;
    for (std::size_t k = row_ptr_[row]; k < row_ptr_[row + 1]; ++k) {
      y[cols_[k]] += weight * values_[k];
    }
  }
}

double CsrMatrix::row_sum(std::size_t row) const {
  return std::accumulate(values_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row]),
                         values_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row + 1]), 0.0);
}

double CsrMatrix::at(std::size_t row, std::size_t col) const {
  const auto first = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row]);
  const auto last = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row + 1]);
  const auto it = std::lower_bound(first, last, col);
  return (it != last && *it == col) ? values_[static_cast<std::size_t>(it - cols_.begin())] : 0.0;
}

namespace {

struct AgeBlock {
  std::shared_ptr<const CsrMatrix> matrix;
  std::vector<double> overflow_probability;
  std::vector<double> expected_rejections;
};

AgeBlock build_age_block(const Scenario& scenario, const IncomeLaw& law, int age, int bound,
                         int threads) {
  const StateSpace space(bound);
  const std::size_t n = space.size();
  const int period_length = scenario.period_length;
  const Pmf& capacity = scenario.capacity;

  struct Row {
    std::vector<std::size_t> cols;
    std::vector<double> values;
  };
  std::vector<Row> rows(n);
  AgeBlock block;
  block.overflow_probability.assign(n, 0.0);
  block.expected_rejections.assign(n, 0.0);

  parallel_chunks(n, threads, [&](std::size_t begin, std::size_t end, std::size_t) {
    std::vector<double> scratch(n, 0.0);
    std::vector<std::size_t> touched;
    for (std::size_t src = begin; src < end; ++src) {
      const auto [due_now, total] = space.state(src);
      double overflow = 0.0;
      double rejected = 0.0;
      for (int e = 0; e <= law.express.support_max(); ++e) {
        const double pe = law.express[e];
        if (pe == 0.0) continue;
        for (int r = 0; r <= law.regular.support_max(); ++r) {
          const double per = pe * law.regular[r];
          if (per == 0.0) continue;
          for (int b = 0; b <= capacity.support_max(); ++b) {
            const double p = per * capacity[b];
            if (p == 0.0) continue;
            const StepOutcome next = step(due_now, total, age, period_length, bound, e, r, b);
            const std::size_t dst = StateSpace::index(next.due_now, next.total);
            if (scratch[dst] == 0.0) touched.push_back(dst);
            scratch[dst] += p;
            if (next.overflow > 0) {
              overflow += p;
              rejected += p * next.overflow;
            }
          }
        }
      }
      std::sort(touched.begin(), touched.end());
      Row& row = rows[src];
      row.cols.reserve(touched.size());
      row.values.reserve(touched.size());
      for (std::size_t dst : touched) {
        row.cols.push_back(dst);
        row.values.push_back(scratch[dst]);
        scratch[dst] = 0.0;
      }
      touched.clear();
      block.overflow_probability[src] = overflow;
      block.expected_rejections[src] = rejected;
    }
  });

  std::vector<std::size_t> row_ptr(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) row_ptr[i + 1] = row_ptr[i] + rows[i].cols.size();
  std::vector<std::size_t> cols;
  std::vector<double> values;
  cols.reserve(row_ptr.back());
  values.reserve(row_ptr.back());
  for (Row& row : rows) {
    cols.insert(cols.end(), row.cols.begin(), row.cols.end());
    values.insert(values.end(), row.values.begin(), row.values.end());
  }
  block.matrix = std::make_shared<const CsrMatrix>(n, std::move(row_ptr), std::move(cols),
                                                   std::move(values));
  return block;
}

}  // namespace

TruncatedKernel build_kernel(const Scenario& scenario, const FeeStructure& policy, int bound,
                             int threads) {
  scenario.validate();
  if (policy.period_length() != scenario.period_length) {
    throw ParameterError("build_kernel: fee structure length differs from period_length");
  }
  if (bound < 0) throw ParameterError("build_kernel: bound must be >= 0");

  TruncatedKernel kernel;
  kernel.bound = bound;
  kernel.period_length = scenario.period_length;
  // Keyed by (express rate, deadline age): equal keys give identical blocks.
  std::map<std::pair<double, bool>, AgeBlock> blocks;
  for (int age = 0; age < scenario.period_length; ++age) {
    const bool deadline = age == scenario.period_length - 1;
    const ArrivalRates rates = split_rates(scenario.choice, scenario.lambda, policy[age]);
    const auto key = std::make_pair(rates.express, deadline);
    auto it = blocks.find(key);
    if (it == blocks.end()) {
      const IncomeLaw law = income_law(scenario, policy[age]);
      it = blocks.emplace(key, build_age_block(scenario, law, age, bound, threads)).first;
    }
    kernel.per_age.push_back(it->second.matrix);
    kernel.overflow_probability.push_back(it->second.overflow_probability);
    kernel.expected_rejections.push_back(it->second.expected_rejections);
  }
  return kernel;
}

WorkloadChain::WorkloadChain(const Pmf& demand, const Pmf& capacity, int bound)
    : bound_(bound), net_(difference_pmf(demand, capacity)) {
  if (bound < 0) throw ParameterError("workload chain: bound must be >= 0");
}

std::vector<double> WorkloadChain::stationary() const {
  const int n = bound_ + 1;
  if (n == 1) return {1.0};
  const int up = std::max(0, net_.max());
  const int down = std::max(0, -net_.min);
  std::vector<double> p(static_cast<std::size_t>(n) * n, 0.0);
  auto at = [&](int i, int j) -> double& { return p[static_cast<std::size_t>(i) * n + j]; };
  for (int s = 0; s < n; ++s) {
    for (int k = net_.min; k <= net_.max(); ++k) {
      const double pk = net_[k];
      if (pk == 0.0) continue;
      at(s, std::clamp(s + k, 0, bound_)) += pk;
    }
  }
  // Grassmann-Taksar-Heyman elimination. Without pivoting the fill stays
  // inside the band [i - down, i + up].
  std::vector<double> exit_rate(n, 0.0);
  for (int k = n - 1; k >= 1; --k) {
    double s = 0.0;
    for (int j = std::max(0, k - down); j < k; ++j) s += at(k, j);
    if (!(s > 0.0)) {
      throw NumericalError("workload chain: state cannot move down; chain is not irreducible");
    }
    exit_rate[k] = s;
    for (int i = std::max(0, k - up); i < k; ++i) {
      const double factor = at(i, k) / s;
      if (factor == 0.0) continue;
      for (int j = std::max(0, k - down); j < k; ++j) at(i, j) += factor * at(k, j);
    }
  }
  std::vector<double> pi(n, 0.0);
  pi[0] = 1.0;
  for (int k = 1; k < n; ++k) {
    double inflow = 0.0;
    for (int i = std::max(0, k - up); i < k; ++i) inflow += pi[i] * at(i, k);
    pi[k] = inflow / exit_rate[k];
  }
  const double total = std::accumulate(pi.begin(), pi.end(), 0.0);
  for (double& v : pi) v /= total;
  return pi;
}

double WorkloadChain::rejection_probability(std::span<const double> pi) const {
  double j = 0.0;
  for (int s = 0; s <= bound_; ++s) {
    double tail = 0.0;
    for (int k = std::max(net_.min, bound_ - s + 1); k <= net_.max(); ++k) tail += net_[k];
    j += pi[s] * tail;
  }
  return j;
}

double WorkloadChain::expected_rejections(std::span<const double> pi) const {
  double total = 0.0;
  for (int s = 0; s <= bound_; ++s) {
    double excess = 0.0;
    for (int k = std::max(net_.min, bound_ - s + 1); k <= net_.max(); ++k) {
      excess += net_[k] * (s + k - bound_);
    }
    total += pi[s] * excess;
  }
  return total;
}

double rejection_probability_at(const Scenario& scenario, int bound) {
  const WorkloadChain chain(poisson_pmf(scenario.lambda), scenario.capacity, bound);
  return chain.rejection_probability(chain.stationary());
}

BoundSearch find_bound(const Scenario& scenario, const FeeStructure& policy) {
  scenario.validate();
  if (policy.period_length() != scenario.period_length) {
    throw ParameterError("find_bound: fee structure length differs from period_length");
  }
  const int step = scenario.bound_step;
  const int max_index = scenario.bound_cap / step;
  const double threshold = scenario.rejection_threshold;
  BoundSearch search;
  std::map<int, double> cache;
  const auto probe = [&](int index) {
    const auto it = cache.find(index);
    if (it != cache.end()) return it->second;
    const double j = rejection_probability_at(scenario, index * step);
    cache.emplace(index, j);
    search.probes.emplace_back(index * step, j);
    return j;
  };
  // J must be nonincreasing over every probe made so far.
  const auto monotone_so_far = [&] {
    double previous = std::numeric_limits<double>::infinity();
    for (const auto& [index, j] : cache) {
      if (j > previous + 1e-15) return false;
      previous = j;
    }
    return true;
  };

  // Exponential search for a feasible grid index, then bisection.
  int lo = 0;  // largest index known infeasible (0 is a sentinel)
  int hi = 1;
  while (!scenario.rejection_acceptable(probe(hi))) {
    lo = hi;
    if (hi == max_index) {
      std::ostringstream msg;
      msg << "find_bound: rejection probability " << cache[hi] << " at the hard cap "
          << hi * step << " still exceeds " << threshold;
      throw CapacityInfeasibleError(msg.str());
    }
    hi = std::min(2 * hi, max_index);
  }
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    if (scenario.rejection_acceptable(probe(mid))) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  int result = hi;
  if (!monotone_so_far() || (result > 1 && scenario.rejection_acceptable(probe(result - 1)))) {
    search.linear_fallback = true;
    result = 0;
    for (int index = 1; index <= max_index; ++index) {
      if (scenario.rejection_acceptable(probe(index))) {
        result = index;
        break;
      }
    }
    if (result == 0) throw CapacityInfeasibleError("find_bound: linear scan reached the hard cap");
  }
  search.bound = result * step;
  search.rejection_probability = probe(result);
  if (result > 1) search.rejection_below = probe(result - 1);
  return search;
}

std::vector<double> workload_warm_start(const Scenario& scenario, int bound) {
  const WorkloadChain chain(poisson_pmf(scenario.lambda), scenario.capacity, bound);
  const std::vector<double> workload = chain.stationary();
  std::vector<double> start(StateSpace(bound).size(), 0.0);
  for (int s = 0; s <= bound; ++s) start[StateSpace::index(s, s)] = workload[s];
  return start;
}

StationaryDistribution stationary(const TruncatedKernel& kernel, const StationaryOptions& options) {
  const StateSpace space(kernel.bound);
  const std::size_t n = space.size();
  for (std::size_t age = 0; age < kernel.per_age.size(); ++age) {
    if (!kernel.per_age[age] || kernel.per_age[age]->rows() != n) {
      throw ParameterError("stationary: kernel matrix has the wrong size");
    }
  }
  std::vector<double> x = options.initial;
  if (x.empty()) {
    x.assign(n, 1.0 / static_cast<double>(n));
  } else if (x.size() != n) {
    throw ParameterError("stationary: initial vector has the wrong size");
  }

  std::vector<double> y(n);
  std::vector<double> scratch(n);
  const auto apply_cycle = [&](const std::vector<double>& in, std::vector<double>& out) {
    scratch = in;
    for (const auto& matrix : kernel.per_age) {
      matrix->left_multiply(scratch, out);
      scratch.swap(out);
    }
    out.swap(scratch);
    const double total = simd::sum(out);
    for (double& v : out) v /= total;
  };

  StationaryDistribution result;
  result.bound = kernel.bound;
  double previous = std::numeric_limits<double>::infinity();
  int stalled = 0;
  bool converged = false;
  for (long it = 1; it <= options.max_iterations; ++it) {
    apply_cycle(x, y);
    const double residual = simd::l1_distance(x, y);
    result.iterations = it;
    result.residual = residual;
    if (residual <= options.tolerance) {
      x.swap(y);
      converged = true;
      break;
    }
    // A residual that stops shrinking signals an oscillating iterate.
    stalled = residual >= previous ? stalled + 1 : 0;
    previous = residual;
    if (!result.damped && stalled >= 20) result.damped = true;
    if (result.damped) {
      for (std::size_t i = 0; i < n; ++i) x[i] = 0.5 * x[i] + 0.5 * y[i];
    } else {
      x.swap(y);
    }
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "stationary: power iteration stopped after " << result.iterations
        << " cycles with L1 residual " << result.residual;
    throw NumericalError(msg.str());
  }

  result.per_age.reserve(kernel.per_age.size());
  result.per_age.push_back(x);
  for (std::size_t age = 0; age + 1 < kernel.per_age.size(); ++age) {
    kernel.per_age[age]->left_multiply(result.per_age.back(), y);
    const double total = simd::sum(y);
    for (double& v : y) v /= total;
    result.per_age.push_back(y);
  }
  return result;
}

std::vector<double> total_marginal(std::span<const double> per_age_vector, int bound) {
  std::vector<double> marginal(bound + 1, 0.0);
  for (int s = 0; s <= bound; ++s) {
    for (int c = 0; c <= s; ++c) marginal[s] += per_age_vector[StateSpace::index(c, s)];
  }
  return marginal;
}

std::vector<double> due_now_marginal(std::span<const double> per_age_vector, int bound) {
  std::vector<double> marginal(bound + 1, 0.0);
  for (int s = 0; s <= bound; ++s) {
    for (int c = 0; c <= s; ++c) marginal[c] += per_age_vector[StateSpace::index(c, s)];
  }
  return marginal;
}

}  // namespace shipfee
