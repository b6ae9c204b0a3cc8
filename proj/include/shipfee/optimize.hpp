#pragma once

// Grid search over the benchmark policy families and brute force over whole
// fee vectors for short cycles.

#include <map>
#include <optional>
#include <vector>

#include "shipfee/chain.hpp"
#include "shipfee/measures.hpp"
#include "shipfee/policy.hpp"

namespace shipfee {

struct SearchGrid {
  std::vector<double> fee_values;  // strictly increasing, within [u_min, u_max]
  int cutoff_min = 1;
  int cutoff_max = -1;  // -1 means T - 1

  // {0.2, 0.4, ..., 3.8} and cutoffs 1..T-1.
  static SearchGrid defaults();
  int resolved_cutoff_max(int period_length) const;
  void validate(const ChoiceModel& choice, int period_length) const;
};

// argmax of f * w(p + f) over [u_min, u_max].
double revenue_max_fee(const ChoiceModel& choice);

enum class SearchFamily {
  kTspCf,      // f = revenue_max_fee, cutoff searched
  kTspCfStar,  // f and cutoff searched
  kTsp,        // f_E < f_LE, switch < cutoff, cutoff searched
};

const char* search_family_name(SearchFamily family);

struct Candidate {
  PolicyParams params;
  FeeStructure policy;
  double expected_backorders = 0.0;
  double variable_profit = 0.0;
};

struct Optimum {
  PolicyParams params;
  FeeStructure policy;
  PerformanceReport report;  // full re-evaluation of the winner
  long evaluations = 0;
  double runner_up_gap = 0.0;
  bool tie_broken = false;
  // Best candidate for each cutoff age.
  std::map<int, Candidate> best_by_cutoff;
  int bound = 0;
  // |E[M] of the matrix-free pass - E[M] of the full re-evaluation|.
  double route_gap = 0.0;
};

struct OptimizeOptions {
  std::optional<int> bound;
  int threads = 1;
  double tie_tolerance = 1e-9;
};

// All candidates of a family on the grid, in generation order.
std::vector<Candidate> family_candidates(const Scenario& scenario, SearchFamily family,
                                         const SearchGrid& grid);

// Fills expected_backorders and variable_profit of every candidate at `bound`.
void score_candidates(const Scenario& scenario, int bound, std::vector<Candidate>& candidates,
                      int threads = 1);

Optimum optimize_family(const Scenario& scenario, SearchFamily family, const SearchGrid& grid,
                        const OptimizeOptions& options = {});

struct ExhaustiveResult {
  std::vector<FeeStructure> argmax;
  double best_profit = 0.0;
  long evaluations = 0;
  int bound = 0;
};

// Every vector of the T-fold product of grid.fee_values. Throws ParameterError
// when the product exceeds `budget` vectors.
ExhaustiveResult exhaustive_fee_vector_search(const Scenario& scenario, const SearchGrid& grid,
                                              const OptimizeOptions& options = {},
                                              long budget = 1'000'000);

struct DominanceRecord {
  double backorders_front = 0.0;  // E[M] of the dominating profile
  double backorders_back = 0.0;
  bool holds = false;             // front <= back + 1e-9
  int bound = 0;
};

// Requires demand_profile(f) to dominate demand_profile(f_prime); throws
// ParameterError otherwise.
DominanceRecord dominance_experiment(const Scenario& scenario, const FeeStructure& f,
                                     const FeeStructure& f_prime,
                                     std::optional<int> bound = std::nullopt);

}  // namespace shipfee
