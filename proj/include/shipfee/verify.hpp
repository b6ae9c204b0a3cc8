#pragma once

// Randomized property suites over the structural results of the model.

#include <cstdint>
#include <string>
#include <vector>

namespace shipfee {

struct SuiteResult {
  std::string name;
  int cases = 0;
  int failures = 0;
  double worst = 0.0;  // suite-specific worst violation or discrepancy
  std::vector<std::string> messages;
  bool passed() const { return failures == 0 && cases > 0; }
};

struct VerifyOptions {
  std::uint64_t seed = 20240611;
  int small_period = 3;  // T for the exhaustive fee-vector search
  int cutoff_form_cases = 50;
  int dominance_cases = 100;
  int monotone_argmax_cases = 10;
  int oracle_cases = 3;
  long oracle_cycles = 200'000;
  int invariance_cases = 5;
  int threads = 1;
};

// Cutoff form (+infinity after the cutoff) and canonical form (u_max) give
// identical reports to 1e-12.
SuiteResult cutoff_form_suite(const VerifyOptions& options);
// Front-loaded express profiles never produce more backorders.
SuiteResult dominance_suite(const VerifyOptions& options);
// The argmax of the exhaustive fee-vector search contains a nondecreasing vector.
SuiteResult monotone_argmax_suite(const VerifyOptions& options);
// Monte Carlo estimates within three halfwidths of the exact values.
SuiteResult oracle_suite(const VerifyOptions& options);
// Per-age total-backlog marginals agree across policies and with the
// workload chain to 1e-9.
SuiteResult workload_invariance_suite(const VerifyOptions& options);
// Stochastic kernel rows and a bound search that brackets the threshold.
SuiteResult truncation_suite(const VerifyOptions& options);

std::vector<SuiteResult> run_all_suites(const VerifyOptions& options);

}  // namespace shipfee
