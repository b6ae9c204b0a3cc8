#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "shipfee/chain.hpp"
#include "shipfee/measures.hpp"
#include "shipfee/optimize.hpp"
#include "shipfee/parallel.hpp"
#include "shipfee/presets.hpp"
#include "shipfee/sim.hpp"
#include "shipfee/verify.hpp"

using namespace shipfee;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct PublishedRow {
  const char* policy;
  PolicyParams params;
  double backorders;
  double profit;
};

struct PublishedSetting {
  const char* preset;
  double penalty;
  PublishedRow rows[4];  // CSP, TSP-CF, TSP-CF*, TSP
  PublishedRow by_cutoff[2];  // best TSP for cutoffs 6 and 5
};

const PublishedSetting kTables[] = {
    {"rho085_c8", 8,
     {{"CSP", ConstantFee{2.0}, 1.29, 29.66},
      {"TSP-CF", CutoffFee{2.0, 6}, 0.58, 30.39},
      {"TSP-CF*", CutoffFee{2.4, 7}, 0.77, 32.22},
      {"TSP", SimpleTspParams{2.4, 3.0, 6, 7}, 0.56, 32.86}},
     {{"TSP", SimpleTspParams{2.2, 2.4, 4, 6}, 0.39, 31.24}, {"TSP", SimpleTspParams{2.0, 2.2, 0, 5}, 0.26, 27.66}}},
    {"rho085_c12", 12,
     {{"CSP", ConstantFee{2.0}, 1.29, 24.49},
      {"TSP-CF", CutoffFee{2.0, 6}, 0.58, 28.08},
      {"TSP-CF*", CutoffFee{2.4, 6}, 0.33, 29.70},
      {"TSP", SimpleTspParams{2.4, 3.2, 6, 7}, 0.50, 30.78}},
     {{"TSP", SimpleTspParams{2.2, 2.4, 2, 6}, 0.36, 29.73}, {"TSP", SimpleTspParams{2.2, 2.4, 4, 5}, 0.24, 26.68}}},
    {"rho090_c8", 8,
     {{"CSP", ConstantFee{2.0}, 2.69, 18.45},
      {"TSP-CF", CutoffFee{2.0, 6}, 1.76, 20.95},
      {"TSP-CF*", CutoffFee{2.6, 7}, 1.42, 25.08},
      {"TSP", SimpleTspParams{2.6, 3.2, 6, 7}, 1.18, 25.60}},
     {{"TSP", SimpleTspParams{2.4, 2.6, 3, 6}, 1.07, 24.31}, {"TSP", SimpleTspParams{2.4, 2.6, 4, 5}, 0.86, 21.68}}},
    {"rho090_c12", 12,
     {{"CSP", ConstantFee{2.0}, 2.69, 7.68},
      {"TSP-CF", CutoffFee{2.0, 5}, 1.27, 14.80},
      {"TSP-CF*", CutoffFee{2.6, 6}, 0.95, 20.43},
      {"TSP", SimpleTspParams{2.8, 3.4, 6, 7}, 0.91, 21.07}},
     {{"TSP", SimpleTspParams{2.6, 2.8, 4, 6}, 0.89, 20.52}, {"TSP", SimpleTspParams{2.4, 2.6, 0, 5}, 0.76, 18.46}}},
    {"rho095_c8", 8,
     {{"CSP", ConstantFee{2.0}, 6.36, -10.91},
      {"TSP-CF", CutoffFee{2.0, 2}, 2.20, -2.03},
      {"TSP-CF*", CutoffFee{3.0, 7}, 2.42, 6.67},
      {"TSP", SimpleTspParams{3.0, 3.4, 6, 7}, 2.27, 6.91}},
     {{"TSP", SimpleTspParams{2.8, 3.0, 0, 6}, 2.56, 6.20}, {"TSP", SimpleTspParams{2.8, 3.0, 4, 5}, 2.49, 4.83}}},
    {"rho095_c12", 12,
     {{"CSP", ConstantFee{2.0}, 6.36, -36.37},
      {"TSP-CF", CutoffFee{2.0, 1}, 1.73, -10.75},
      {"TSP-CF*", CutoffFee{3.2, 6}, 2.13, -3.18},
      {"TSP", SimpleTspParams{3.2, 3.6, 6, 7}, 2.27, -3.00}},
     {{"TSP", SimpleTspParams{3.2, 3.4, 5, 6}, 2.08, -3.20}, {"TSP", SimpleTspParams{3.0, 3.2, 0, 5}, 1.96, -3.96}}},
};

constexpr double kBackorderTol = 0.05;
constexpr double kProfitRelTol = 0.02;

bool profit_close(double got, double want) { return std::abs(got - want) <= kProfitRelTol * std::abs(want); }

bool same_params(const PolicyParams& a, const PolicyParams& b) {
  if (a.index() != b.index()) return false;
  if (const auto* x = std::get_if<ConstantFee>(&a)) return std::abs(x->fee - std::get<ConstantFee>(b).fee) < 1e-9;
  if (const auto* x = std::get_if<CutoffFee>(&a)) {
    const auto& y = std::get<CutoffFee>(b);
    return std::abs(x->fee - y.fee) < 1e-9 && x->cutoff_age == y.cutoff_age;
  }
  const auto& x = std::get<SimpleTspParams>(a);
  const auto& y = std::get<SimpleTspParams>(b);
  return std::abs(x.express_fee - y.express_fee) < 1e-9 && std::abs(x.lastminute_fee - y.lastminute_fee) < 1e-9 &&
         x.switch_age == y.switch_age && x.cutoff_age == y.cutoff_age;
}

struct RowCheck {
  bool passed = false;
  std::string detail;
};

// A printed (E[M], E[G^V]) pair is self-consistent when E[G^V] equals the
// closed-form revenue minus c E[M] up to the printed rounding. When it is not,
// one of the two cells must carry a typo; the row passes if either cell
// matches and the other matches the value implied by it.
RowCheck check_row(const PublishedRow& row, double revenue, double penalty, const PerformanceReport& r) {
  char buf[512];
  const double implied_profit = revenue - penalty * row.backorders;
  const bool consistent = std::abs(implied_profit - row.profit) <= penalty * 0.005 + 0.005 + 1e-9;
  const bool em_ok = std::abs(r.expected_backorders - row.backorders) <= kBackorderTol;
  const bool gv_ok = profit_close(r.variable_profit, row.profit);
  RowCheck out;
  if (consistent) {
    out.passed = em_ok && gv_ok;
    std::snprintf(buf, sizeof buf, "%-8s %-26s E[M] %.4f (printed %.2f)  E[G^V] %.4f (printed %.2f)", row.policy,
                  describe(row.params).c_str(), r.expected_backorders, row.backorders, r.variable_profit, row.profit);
  } else {
    const double implied_backorders = (revenue - row.profit) / penalty;
    const bool via_profit = gv_ok && std::abs(r.expected_backorders - implied_backorders) <= kBackorderTol;
    const bool via_backorders = em_ok && profit_close(r.variable_profit, implied_profit);
    out.passed = via_profit || via_backorders;
    std::snprintf(buf, sizeof buf,
                  "%-8s %-26s E[M] %.4f (printed %.2f, implied by printed E[G^V] %.4f)  E[G^V] %.4f (printed %.2f, "
                  "implied by printed E[M] %.4f)  printed row inconsistent, matched via %s",
                  row.policy, describe(row.params).c_str(), r.expected_backorders, row.backorders, implied_backorders,
                  r.variable_profit, row.profit, implied_profit,
                  via_profit ? "E[G^V]" : (via_backorders ? "E[M]" : "neither"));
  }
  out.detail = buf;
  return out;
}

int failures = 0;

void verdict(int id, const char* title, bool ok, const std::string& summary) {
  std::printf("[%s] criterion %d: %s: %s\n", ok ? "PASS" : "FAIL", id, title, summary.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

void detail(const std::string& line) { std::printf("    %s\n", line.c_str()); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct SettingRun {
  ExperimentConfig cfg;
  int bound = 0;
  std::vector<FeeStructure> policies;
  std::vector<PerformanceReport> reports;
  double seconds = 0.0;
};

std::vector<SettingRun> runs;

void criterion1() {
  bool ok = true;
  double slowest = 0.0;
  for (const PublishedSetting& s : kTables) {
    SettingRun run;
    run.cfg = preset(s.preset);
    const Scenario& sc = run.cfg.scenario;
    const auto t0 = Clock::now();
    for (const PublishedRow& row : s.rows) {
      run.policies.push_back(build_policy(sc.period_length, row.params, sc.choice));
      run.reports.push_back(evaluate(sc, run.policies.back()));
    }
    run.seconds = seconds_since(t0);
    run.bound = run.reports.front().bound;
    slowest = std::max(slowest, run.seconds);
    detail(fmt("%s: bound %d, J %.5f, %.2f s", s.preset, run.bound, run.reports.front().rejection_probability,
               run.seconds));
    for (int i = 0; i < 4; ++i) {
      const RowCheck c = check_row(s.rows[i], express_revenue(sc, run.policies[i]), s.penalty, run.reports[i]);
      detail(std::string(c.passed ? "  ok   " : "  MISS ") + c.detail);
      ok = ok && c.passed;
    }
    ok = ok && run.seconds < 60.0;
    runs.push_back(std::move(run));
  }
  verdict(1, "policy comparison, values", ok,
          fmt("24 rows within E[M] +-%.2f and E[G^V] +-%.0f%%, slowest setting %.2f s", kBackorderTol,
              100 * kProfitRelTol, slowest));
}

std::vector<std::vector<Optimum>> optima;  // per setting: TSP-CF, TSP-CF*, TSP

void criterion2() {
  bool ranking = true;
  int matched = 0;
  bool mismatches_are_ties = true;
  double slowest = 0.0;
  for (std::size_t k = 0; k < std::size(kTables); ++k) {
    const PublishedSetting& s = kTables[k];
    const SettingRun& run = runs[k];
    const Scenario& sc = run.cfg.scenario;
    const auto t0 = Clock::now();
    std::vector<Optimum> found;
    for (SearchFamily fam : {SearchFamily::kTspCf, SearchFamily::kTspCfStar, SearchFamily::kTsp}) {
      found.push_back(optimize_family(sc, fam, run.cfg.grid));
    }
    const double secs = seconds_since(t0);
    slowest = std::max(slowest, secs);

    bool ranked = true;
    for (int i = 1; i < 4; ++i) ranked = ranked && run.reports[i - 1].variable_profit < run.reports[i].variable_profit;
    for (int i = 1; i < 3; ++i) {
      ranked = ranked && found[i - 1].report.variable_profit < found[i].report.variable_profit;
    }
    ranked = ranked && run.reports[0].variable_profit < found[0].report.variable_profit;
    ranking = ranking && ranked;

    bool all_match = true;
    for (int i = 0; i < 3; ++i) {
      const PublishedRow& row = s.rows[i + 1];
      const Optimum& o = found[i];
      if (same_params(o.params, row.params)) {
        detail(fmt("%s %-8s %-26s matches (E[G^V] %.4f%s)", s.preset, row.policy, describe(o.params).c_str(),
                   o.report.variable_profit, o.tie_broken ? ", tie broken" : ""));
        continue;
      }
      all_match = false;
      const double at_printed = run.reports[i + 1].variable_profit;
      const bool tie = profit_close(o.report.variable_profit, at_printed) || profit_close(o.report.variable_profit, row.profit);
      mismatches_are_ties = mismatches_are_ties && tie;
      detail(fmt("%s %-8s MISMATCH: optimum %s E[G^V] %.4f; printed %s evaluates to %.4f, printed E[G^V] %.2f; %s",
                 s.preset, row.policy, describe(o.params).c_str(), o.report.variable_profit,
                 describe(row.params).c_str(), at_printed, row.profit,
                 tie ? "optimum profit agrees with the printed profit within tolerance" : "not a tie"));
    }
    if (all_match) ++matched;
    detail(fmt("%s ranking CSP < TSP-CF < TSP-CF* < TSP %s; search %.2f s", s.preset, ranked ? "holds" : "VIOLATED",
               secs));
    optima.push_back(std::move(found));
  }
  verdict(2, "policy comparison, ranking and optima", ranking && matched >= 5 && mismatches_are_ties,
          fmt("ranking %s in 6 settings, starred parameters reproduced in %d of 6 settings, mismatches %s, "
              "slowest search %.2f s",
              ranking ? "holds" : "fails", matched, mismatches_are_ties ? "are profit ties" : "are NOT ties", slowest));
}

void criterion3() {
  bool ok = true;
  for (std::size_t k = 0; k < std::size(kTables); ++k) {
    const PublishedSetting& s = kTables[k];
    const Optimum& tsp = optima[k][2];
    const auto& p = std::get<SimpleTspParams>(tsp.params);
    const bool star = p.cutoff_age == 7 && p.switch_age == p.cutoff_age - 1;
    ok = ok && star;
    detail(fmt("%s optimum %s: cutoff %d, switch %d %s", s.preset, describe(tsp.params).c_str(), p.cutoff_age,
               p.switch_age, star ? "ok" : "MISS"));
    const Scenario& sc = runs[k].cfg.scenario;
    for (int j = 0; j < 2; ++j) {
      const PublishedRow& row = s.by_cutoff[j];
      const int cutoff = std::get<SimpleTspParams>(row.params).cutoff_age;
      const Candidate& best = tsp.best_by_cutoff.at(cutoff);
      const bool params = same_params(best.params, row.params);
      const FeeStructure f = build_policy(sc.period_length, row.params, sc.choice);
      EvaluateOptions eo;
      eo.bound = runs[k].bound;
      const RowCheck c = check_row(row, express_revenue(sc, f), s.penalty, evaluate(sc, f, eo));
      const bool below = best.variable_profit < tsp.report.variable_profit;
      ok = ok && params && c.passed && below;
      detail(fmt("  cutoff %d best %s (%s) %s", cutoff, describe(best.params).c_str(), params ? "as printed" : "DIFFERS",
                 c.detail.c_str()));
    }
  }
  verdict(3, "cutoff comparison", ok, "optimal cutoff 7 and switch 6 in all six settings checked");
}

void criterion4() {
  struct Job {
    std::size_t setting;
    int row;
  };
  std::vector<Job> jobs;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    for (int i = 0; i < 4; ++i) jobs.push_back({k, i});
  }
  std::vector<SimResult> results(jobs.size());
  const int threads = static_cast<int>(std::clamp(std::thread::hardware_concurrency(), 1u, 8u));
  const auto t0 = Clock::now();
  parallel_chunks(jobs.size(), threads, [&](std::size_t begin, std::size_t end, std::size_t) {
    for (std::size_t j = begin; j < end; ++j) {
      const SettingRun& run = runs[jobs[j].setting];
      SimConfig c = run.cfg.simulate;
      c.cycles = c.warmup_cycles + 1'000'000;
      c.bound = run.bound;
      results[j] = simulate(run.cfg.scenario, run.policies[jobs[j].row], c);
    }
  });
  const double secs = seconds_since(t0);
  bool ok = secs < 300.0;
  double worst = 0.0;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const SettingRun& run = runs[jobs[j].setting];
    const PerformanceReport& exact = run.reports[jobs[j].row];
    const SimResult& r = results[j];
    const auto z = [](double exact_value, const Estimate& e) { return std::abs(e.mean - exact_value) / e.halfwidth; };
    const double zm = z(exact.expected_backorders, r.expected_backorders);
    const double zg = z(exact.variable_profit, r.variable_profit);
    const double zj = z(exact.rejection_probability, r.rejection_probability);
    const double m = std::max({zm, zg, zj});
    worst = std::max(worst, m);
    ok = ok && m <= 3.0 && r.measured_cycles == 1'000'000;
    detail(fmt("%s %-8s E[M] %.4f vs %.4f+-%.4f  E[G^V] %.4f vs %.4f+-%.4f  J %.5f vs %.5f+-%.5f  max z %.2f",
               run.cfg.name.c_str(), kTables[jobs[j].setting].rows[jobs[j].row].policy, exact.expected_backorders,
               r.expected_backorders.mean, r.expected_backorders.halfwidth, exact.variable_profit,
               r.variable_profit.mean, r.variable_profit.halfwidth, exact.rejection_probability,
               r.rejection_probability.mean, r.rejection_probability.halfwidth, m));
  }
  verdict(4, "Monte Carlo oracle", ok,
          fmt("24 configurations x 10^6 cycles, worst deviation %.2f halfwidths, %.1f s on %d thread(s)", worst, secs,
              threads));
}

void suite_criterion(int id, const char* title, const SuiteResult& r) {
  for (const std::string& m : r.messages) detail(m);
  verdict(id, title, r.passed(),
          fmt("%d cases, %d failures, worst %.3g", r.cases, r.failures, r.worst));
}

void criterion8() {
  bool ok = true;
  for (SettingRun& run : runs) {
    Scenario unit = run.cfg.scenario;
    unit.bound_step = 1;
    unit.rejection_decimals.reset();
    const BoundSearch b = find_bound(unit, run.policies.front());
    const bool brackets = b.rejection_probability <= 0.023 && b.rejection_below && *b.rejection_below > 0.023;
    ok = ok && brackets;
    detail(fmt("%s unit-step bound %d: J %.5f, J(bound-1) %.5f %s", run.cfg.name.c_str(), b.bound,
               b.rejection_probability, b.rejection_below.value_or(NAN), brackets ? "ok" : "MISS"));

    const BoundSearch g = find_bound(run.cfg.scenario, run.policies.front());
    const bool grid_brackets = g.bound == run.bound && run.cfg.scenario.rejection_acceptable(g.rejection_probability) &&
                               g.rejection_below && !run.cfg.scenario.rejection_acceptable(*g.rejection_below);
    ok = ok && grid_brackets;
    detail(fmt("%s step-%d bound %d: J %.5f (3 decimals), J(bound-%d) %.5f %s", run.cfg.name.c_str(),
               run.cfg.scenario.bound_step, g.bound, g.rejection_probability, run.cfg.scenario.bound_step,
               g.rejection_below.value_or(NAN), grid_brackets ? "ok" : "MISS"));

    for (int bound : {b.bound, run.bound}) {
      double worst = 0.0;
      std::size_t kernels = 0;
      for (const FeeStructure& f : run.policies) {
        const TruncatedKernel k = build_kernel(run.cfg.scenario, f, bound);
        for (const auto& m : k.per_age) {
          ++kernels;
          for (std::size_t r = 0; r < m->rows(); ++r) worst = std::max(worst, std::abs(m->row_sum(r) - 1.0));
        }
      }
      ok = ok && worst <= 1e-12;
      detail(fmt("%s bound %d: %zu kernels, worst row-sum error %.2e", run.cfg.name.c_str(), bound, kernels, worst));
    }
  }
  const SuiteResult random = truncation_suite({});
  ok = ok && random.passed();
  detail(fmt("random scenarios: %d checks, worst row-sum error %.2e", random.cases, random.worst));
  verdict(8, "truncation correctness", ok, "row sums within 1e-12; bound search brackets the 0.023 threshold");
}

void criterion9() {
  bool ok = true;
  double worst = 0.0;
  for (const SettingRun& run : runs) {
    const WorkloadChain chain(poisson_pmf(run.cfg.scenario.lambda), run.cfg.scenario.capacity, run.bound);
    const std::vector<double> reference = chain.stationary();
    for (const FeeStructure& f : run.policies) {
      const StationaryDistribution pi = stationary(build_kernel(run.cfg.scenario, f, run.bound), StationaryOptions{});
      for (const auto& v : pi.per_age) {
        const std::vector<double> m = total_marginal(v, run.bound);
        for (int x = 0; x <= run.bound; ++x) worst = std::max(worst, std::abs(m[x] - reference[x]));
      }
    }
  }
  ok = worst <= 1e-9;
  detail(fmt("published settings, 4 policies each, cold-start power iteration: worst deviation %.2e", worst));
  const SuiteResult random = workload_invariance_suite({});
  ok = ok && random.passed();
  detail(fmt("random scenarios: %d policies, worst deviation %.2e", random.cases, random.worst));
  verdict(9, "workload invariance", ok, fmt("total-backlog marginals policy-invariant within 1e-9 (worst %.2e)",
                                             std::max(worst, random.worst)));
}

void guarded(const std::function<void()>& fn, int id) {
  try {
    fn();
  } catch (const std::exception& e) {
    verdict(id, "error", false, e.what());
  }
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  guarded(criterion1, 1);
  if (runs.size() == std::size(kTables)) {
    guarded(criterion2, 2);
    if (optima.size() == std::size(kTables)) {
      guarded(criterion3, 3);
    } else {
      verdict(3, "cutoff comparison", false, "optimization did not complete");
    }
    guarded(criterion4, 4);
  } else {
    for (int id : {2, 3, 4}) verdict(id, "skipped", false, "policy comparison did not complete");
  }
  guarded([] { suite_criterion(5, "cutoff-form invariance", cutoff_form_suite({})); }, 5);
  guarded([] { suite_criterion(6, "dominance", dominance_suite({})); }, 6);
  guarded([] { suite_criterion(7, "monotone argmax at T=3", monotone_argmax_suite({})); }, 7);
  if (runs.size() == std::size(kTables)) {
    guarded(criterion8, 8);
    guarded(criterion9, 9);
  } else {
    for (int id : {8, 9}) verdict(id, "skipped", false, "policy comparison did not complete");
  }
  std::printf("%d of 9 criteria failed, %.1f s\n", failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
