#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "shipfee/chain.hpp"
#include "shipfee/cycle_evaluator.hpp"
#include "shipfee/errors.hpp"
#include "shipfee/measures.hpp"
#include "shipfee/presets.hpp"

using namespace shipfee;

namespace {

Scenario micro() {
  Scenario s;
  s.period_length = 2;
  s.lambda = 1.0;
  s.capacity = Pmf({0.2, 0.3, 0.5});
  s.choice = {4.0, 0.0, 4.0};
  s.penalty = 5.0;
  return s;
}

Eigen::MatrixXd enumerate_age(const Scenario& s, const FeeStructure& f, int age, int bound) {
  const StateSpace space(bound);
  const auto n = static_cast<Eigen::Index>(space.size());
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  const IncomeLaw law = income_law(s, f[age]);
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto [c, x] = space.state(i);
    for (int e = 0; e <= law.express.support_max(); ++e) {
      for (int r = 0; r <= law.regular.support_max(); ++r) {
        for (int b = 0; b <= s.capacity.support_max(); ++b) {
          const double w = law.express[e] * law.regular[r] * s.capacity[b];
          const StepOutcome o = step(c, x, age, s.period_length, bound, e, r, b);
          p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(StateSpace::index(o.due_now, o.total))) += w;
        }
      }
    }
  }
  return p;
}

Eigen::VectorXd solve_stationary(const Eigen::MatrixXd& p) {
  const auto n = p.rows();
  Eigen::MatrixXd a = p.transpose() - Eigen::MatrixXd::Identity(n, n);
  a.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  return a.fullPivLu().solve(rhs);
}

}  // namespace

TEST_SUITE("chain") {

TEST_CASE("state space") {
  for (int bound : {0, 1, 5, 30}) {
    const StateSpace space(bound);
    CHECK(space.size() == static_cast<std::size_t>((bound + 1) * (bound + 2) / 2));
    for (std::size_t i = 0; i < space.size(); ++i) {
      const auto [c, x] = space.state(i);
      CHECK(0 <= c);
      CHECK(c <= x);
      CHECK(x <= bound);
      CHECK(StateSpace::index(c, x) == i);
    }
  }
}

TEST_CASE("single step") {
  StepOutcome o = step(2, 5, 3, 8, 100, 1, 2, 4);
  CHECK(o.due_now == 0);
  CHECK(o.total == 4);
  CHECK(o.backorders == 0);

  o = step(2, 5, 7, 8, 100, 1, 2, 4);
  CHECK(o.due_now == 4);
  CHECK(o.total == 4);

  o = step(0, 5, 0, 8, 5, 2, 1, 0);
  CHECK(o.overflow == 3);
  CHECK(o.regular_accepted == 0);
  CHECK(o.express_accepted == 0);
  CHECK(o.due_now == 0);
  CHECK(o.total == 5);

  o = step(3, 4, 7, 8, 10, 2, 0, 1);
  CHECK(o.backorders == 4);
  CHECK(o.due_now == 5);
  CHECK(o.total == 5);
}

TEST_CASE("kernel and stationary law match a dense solve") {
  const Scenario s = micro();
  const FeeStructure f({1.0, 3.0});
  const int bound = 4;
  const TruncatedKernel k = build_kernel(s, f, bound);
  Eigen::MatrixXd cycle = Eigen::MatrixXd::Identity(15, 15);
  for (int age = 0; age < 2; ++age) {
    const Eigen::MatrixXd p = enumerate_age(s, f, age, bound);
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      CHECK(std::abs(p.row(i).sum() - 1.0) <= 1e-12);
      for (Eigen::Index j = 0; j < p.cols(); ++j) {
        CHECK(std::abs(k.per_age[age]->at(i, j) - p(i, j)) <= 1e-14);
      }
    }
    cycle = cycle * p;
  }
  const Eigen::VectorXd oracle = solve_stationary(cycle);
  StationaryOptions cold;
  const StationaryDistribution pi = stationary(k, cold);
  for (Eigen::Index i = 0; i < oracle.size(); ++i) CHECK(std::abs(pi.per_age[0][i] - oracle(i)) <= 1e-10);
}

TEST_CASE("generous capacity concentrates the law on low states") {
  Scenario s = micro();
  s.capacity = Pmf::point_mass(30);
  const FeeStructure f({2.0, 2.0});
  const TruncatedKernel k = build_kernel(s, f, 3);
  const StationaryDistribution pi = stationary(k);
  CHECK(pi.per_age[0][0] == doctest::Approx(1.0));
}

TEST_CASE("kernel rows are stochastic") {
  const ExperimentConfig cfg = preset("rho095_c12");
  const FeeStructure f = build_policy(8, SimpleTspParams{3.2, 3.6, 6, 7}, cfg.scenario.choice);
  const TruncatedKernel k = build_kernel(cfg.scenario, f, 50, 2);
  CHECK(k.per_age.size() == 8);
  double worst = 0.0;
  for (const auto& m : k.per_age) {
    CHECK(m->rows() == StateSpace(50).size());
    for (std::size_t r = 0; r < m->rows(); ++r) worst = std::max(worst, std::abs(m->row_sum(r) - 1.0));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("stationary fixed point and uniqueness") {
  const ExperimentConfig cfg = preset("rho090_c8");
  const Scenario& s = cfg.scenario;
  const FeeStructure f = build_policy(8, SimpleTspParams{2.6, 3.2, 6, 7}, s.choice);
  const TruncatedKernel k = build_kernel(s, f, 40);
  StationaryOptions warm;
  warm.initial = workload_warm_start(s, 40);
  const StationaryDistribution a = stationary(k, warm);
  const StationaryDistribution b = stationary(k, StationaryOptions{});

  std::vector<double> x = a.per_age[0], y(x.size());
  for (int age = 0; age < 8; ++age) {
    k.per_age[age]->left_multiply(x, y);
    std::swap(x, y);
  }
  double fixed = 0.0, unique = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    fixed = std::max(fixed, std::abs(x[i] - a.per_age[0][i]));
    unique = std::max(unique, std::abs(a.per_age[0][i] - b.per_age[0][i]));
  }
  CHECK(fixed <= 1e-10);
  CHECK(unique <= 1e-9);

  const auto due = due_now_marginal(a.per_age[0], 40);
  const auto tot = total_marginal(a.per_age[0], 40);
  for (int i = 0; i <= 40; ++i) CHECK(std::abs(due[i] - tot[i]) <= 1e-15);
}

TEST_CASE("workload chain") {
  const ExperimentConfig cfg = preset("rho085_c8");
  const Scenario& s = cfg.scenario;
  const WorkloadChain w(poisson_pmf(s.lambda), s.capacity, 30);
  const auto pi = w.stationary();
  double sum = 0.0;
  for (double v : pi) sum += v;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(w.rejection_probability(pi) == doctest::Approx(rejection_probability_at(s, 30)).epsilon(1e-14));
  CHECK(w.expected_rejections(pi) > 0.0);

  const Pmf d = poisson_pmf(s.lambda);
  const WorkloadChain zero(d, s.capacity, 0);
  double over = 0.0;
  for (int x = 0; x <= d.support_max(); ++x) {
    for (int b = 0; b <= s.capacity.support_max(); ++b) over += x > b ? d[x] * s.capacity[b] : 0.0;
  }
  CHECK(zero.rejection_probability(zero.stationary()) == doctest::Approx(over).epsilon(1e-13));
}

TEST_CASE("find bound") {
  ExperimentConfig cfg = preset("rho085_c8");
  Scenario s = cfg.scenario;
  const FeeStructure csp(std::vector<double>(8, 2.0));

  s.bound_step = 1;
  s.rejection_decimals.reset();
  const BoundSearch unit = find_bound(s, csp);
  CHECK(unit.bound == 27);
  CHECK(unit.rejection_probability <= 0.023);
  REQUIRE(unit.rejection_below);
  CHECK(*unit.rejection_below > 0.023);
  CHECK(*unit.rejection_below == rejection_probability_at(s, 26));

  CHECK(find_bound(cfg.scenario, csp).bound == 30);
  CHECK(find_bound(preset("rho090_c8").scenario, csp).bound == 40);
  CHECK(find_bound(preset("rho095_c8").scenario, csp).bound == 50);

  s.rejection_threshold = 1.0;
  CHECK(find_bound(s, csp).bound == 1);

  Scenario idle = s;
  idle.rejection_threshold = 0.023;
  idle.lambda = 1e-9;
  CHECK(find_bound(idle, csp).bound == 1);

  Scenario capped = cfg.scenario;
  capped.bound_cap = 20;
  CHECK_THROWS_AS(find_bound(capped, csp), CapacityInfeasibleError);
}

TEST_CASE("rounded threshold comparison") {
  Scenario s;
  s.rejection_threshold = 0.023;
  CHECK_FALSE(s.rejection_acceptable(0.0234));
  s.rejection_decimals = 3;
  CHECK(s.rejection_acceptable(0.0234));
  CHECK_FALSE(s.rejection_acceptable(0.0235));
}

TEST_CASE("scenario validation") {
  Scenario s = micro();
  CHECK_NOTHROW(s.validate());
  Scenario over = s;
  over.capacity = Pmf::point_mass(0);
  CHECK_THROWS_AS(over.validate(), ParameterError);
  Scenario saturated = s;
  saturated.lambda = saturated.capacity.mean();
  CHECK_THROWS_AS(saturated.validate(), ParameterError);
  Scenario short_cycle = s;
  short_cycle.period_length = 1;
  CHECK_THROWS_AS(short_cycle.validate(), ParameterError);
  Scenario negative = s;
  negative.penalty = -1.0;
  CHECK_THROWS_AS(negative.validate(), ParameterError);
}

TEST_CASE("matrix-free route agrees with the kernel route") {
  for (const char* name : {"rho085_c8", "rho095_c12"}) {
    const ExperimentConfig cfg = preset(name);
    const Scenario& s = cfg.scenario;
    const int bound = find_bound(s, FeeStructure(std::vector<double>(8, 2.0))).bound;
    const CycleEvaluator fast(s, bound);
    const std::vector<FeeStructure> policies{
        build_policy(8, ConstantFee{2.0}, s.choice),
        build_policy(8, CutoffFee{2.0, 3}, s.choice),
        build_policy(8, SimpleTspParams{3.0, 3.4, 6, 7}, s.choice),
        FeeStructure({0.4, 3.8, 1.0, 2.6, 0.2, 3.0, 1.8, 2.2}),
    };
    const auto batch = fast.evaluate_batch(policies, 2);
    for (std::size_t i = 0; i < policies.size(); ++i) {
      StationaryOptions warm;
      warm.initial = workload_warm_start(s, bound);
      const StationaryDistribution pi = stationary(build_kernel(s, policies[i], bound), warm);
      const double full = expected_backorders(pi, s, policies[i]);
      CHECK(std::abs(batch[i].expected_backorders - full) <= 1e-10);
      CHECK(std::abs(batch[i].expected_backorders - fast.evaluate(policies[i]).expected_backorders) <= 1e-13);
      CHECK(batch[i].cycle_residual <= 1e-10);
    }
  }
}

}
