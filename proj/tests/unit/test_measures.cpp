#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "shipfee/chain.hpp"
#include "shipfee/errors.hpp"
#include "shipfee/measures.hpp"
#include "shipfee/presets.hpp"

using namespace shipfee;

namespace {

Scenario micro() {
  Scenario s;
  s.period_length = 2;
  s.lambda = 1.2;
  s.capacity = Pmf({0.15, 0.25, 0.35, 0.25});
  s.choice = {4.0, 0.0, 4.0};
  s.penalty = 6.0;
  return s;
}

struct Brute {
  double adjusted = 0.0;
  double raw = 0.0;
  double rejection = 0.0;
};

Brute brute_force(const Scenario& s, const FeeStructure& f, int bound) {
  const StateSpace space(bound);
  const auto n = static_cast<Eigen::Index>(space.size());
  std::vector<Eigen::MatrixXd> p(2, Eigen::MatrixXd::Zero(n, n));
  for (int age = 0; age < 2; ++age) {
    const IncomeLaw law = income_law(s, f[age]);
    for (std::size_t i = 0; i < space.size(); ++i) {
      const auto [c, x] = space.state(i);
      for (int e = 0; e <= law.express.support_max(); ++e) {
        for (int r = 0; r <= law.regular.support_max(); ++r) {
          for (int b = 0; b <= s.capacity.support_max(); ++b) {
            const StepOutcome o = step(c, x, age, 2, bound, e, r, b);
            p[age](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(StateSpace::index(o.due_now, o.total))) +=
                law.express[e] * law.regular[r] * s.capacity[b];
          }
        }
      }
    }
  }
  Eigen::MatrixXd a = (p[0] * p[1]).transpose() - Eigen::MatrixXd::Identity(n, n);
  a.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  const Eigen::VectorXd pi0 = a.fullPivLu().solve(rhs);
  const Eigen::VectorXd pi1 = (pi0.transpose() * p[0]).transpose();

  Brute out;
  for (int age = 0; age < 2; ++age) {
    const Eigen::VectorXd& pi = age == 0 ? pi0 : pi1;
    const IncomeLaw law = income_law(s, f[age]);
    for (std::size_t i = 0; i < space.size(); ++i) {
      const auto [c, x] = space.state(i);
      for (int e = 0; e <= law.express.support_max(); ++e) {
        for (int r = 0; r <= law.regular.support_max(); ++r) {
          for (int b = 0; b <= s.capacity.support_max(); ++b) {
            const double w = pi(static_cast<Eigen::Index>(i)) * law.express[e] * law.regular[r] * s.capacity[b];
            const StepOutcome o = step(c, x, age, 2, bound, e, r, b);
            if (o.overflow > 0) out.rejection += w / 2.0;
            if (age == 1) {
              out.adjusted += w * o.backorders;
              out.raw += w * std::max(0, c + e - b);
            }
          }
        }
      }
    }
  }
  return out;
}

}  // namespace

TEST_SUITE("measures") {

TEST_CASE("micro instance against enumeration") {
  const Scenario s = micro();
  for (const FeeStructure& f : {FeeStructure({1.0, 3.0}), FeeStructure({3.5, 0.5}), FeeStructure({4.0, 2.0})}) {
    for (int bound : {2, 5}) {
      const Brute b = brute_force(s, f, bound);
      EvaluateOptions opt;
      opt.bound = bound;
      const PerformanceReport r = evaluate(s, f, opt);
      CHECK(r.expected_backorders == doctest::Approx(b.adjusted).epsilon(1e-10));
      CHECK(r.expected_backorders_raw == doctest::Approx(b.raw).epsilon(1e-10));
      CHECK(r.rejection_probability == doctest::Approx(b.rejection).epsilon(1e-10));
      opt.convention = IncomeConvention::kRaw;
      CHECK(evaluate(s, f, opt).expected_backorders == doctest::Approx(b.raw).epsilon(1e-10));
    }
  }
}

TEST_CASE("published settings") {
  const ExperimentConfig cfg = preset("rho085_c8");
  const Scenario& s = cfg.scenario;
  const PerformanceReport csp = evaluate(s, build_policy(8, ConstantFee{2.0}, s.choice));
  CHECK(csp.bound == 30);
  CHECK(std::abs(csp.expected_backorders - 1.29) < 0.005);
  CHECK(csp.variable_profit == doctest::Approx(40.0 - 8.0 * csp.expected_backorders));
  CHECK(csp.rejection_probability <= 0.023);
  CHECK(csp.fixed_profit == doctest::Approx(160.0));

  const PerformanceReport tsp = evaluate(s, build_policy(8, SimpleTspParams{2.4, 3.0, 6, 7}, s.choice));
  CHECK(std::abs(tsp.variable_profit - 32.86) < 0.005);
  CHECK(tsp.mean_delay == doctest::Approx(tsp.expected_backorders / 5.0));
}

TEST_CASE("revenue terms") {
  Scenario s = preset("rho085_c8").scenario;
  CHECK(express_revenue(s, FeeStructure(std::vector<double>(8, 2.0))) == doctest::Approx(40.0));
  CHECK(express_revenue(s, FeeStructure({2, 2, 2, 2, 2, 2, 2, INFINITY})) == doctest::Approx(35.0));

  s.penalty = 0.0;
  CHECK(evaluate(s, FeeStructure(std::vector<double>(8, 2.0))).variable_profit == doctest::Approx(40.0));

  s.penalty = 8.0;
  const PerformanceReport none = evaluate(s, FeeStructure(std::vector<double>(8, 4.0)));
  CHECK(none.express_revenue == 0.0);
  CHECK(none.variable_profit == -8.0 * none.expected_backorders);
  for (double w : none.per_age_express_rate) CHECK(w == 0.0);
}

TEST_CASE("profit is linear in the penalty") {
  Scenario s = preset("rho090_c12").scenario;
  const FeeStructure f = build_policy(8, SimpleTspParams{2.8, 3.4, 6, 7}, s.choice);
  StationaryOptions warm;
  warm.initial = workload_warm_start(s, 40);
  const StationaryDistribution pi = stationary(build_kernel(s, f, 40), warm);
  const double em = expected_backorders(pi, s, f);
  s.penalty = 3.0;
  const double g3 = variable_profit(pi, s, f);
  s.penalty = 11.0;
  const double g11 = variable_profit(pi, s, f);
  CHECK((g3 - g11) / 8.0 == doctest::Approx(em).epsilon(1e-12));
}

TEST_CASE("rejection probability") {
  const Scenario s = preset("rho085_c8").scenario;
  const FeeStructure f(std::vector<double>(8, 2.0));
  CHECK(rejection_probability_at(s, 400) <= 1e-12);
  Scenario light = s;
  light.lambda = 2.0;
  EvaluateOptions big;
  big.bound = 120;
  CHECK(evaluate(light, f, big).rejection_probability <= 1e-12);

  EvaluateOptions zero;
  zero.bound = 0;
  const IncomeLaw law = income_law(s, 2.0);
  double over = 0.0;
  for (int e = 0; e <= law.express.support_max(); ++e) {
    for (int r = 0; r <= law.regular.support_max(); ++r) {
      for (int b = 0; b <= s.capacity.support_max(); ++b) {
        if (e + r > b) over += law.express[e] * law.regular[r] * s.capacity[b];
      }
    }
  }
  CHECK(evaluate(s, f, zero).rejection_probability == doctest::Approx(over).epsilon(1e-12));
}

TEST_CASE("overwhelming capacity") {
  Scenario s = preset("rho085_c8").scenario;
  s.capacity = Pmf::point_mass(40);
  const PerformanceReport r = evaluate(s, FeeStructure(std::vector<double>(8, 2.0)));
  CHECK(r.expected_backorders == 0.0);
  CHECK(r.rejection_probability == 0.0);
}

TEST_CASE("warm and cold starts agree") {
  const Scenario s = preset("rho095_c8").scenario;
  const FeeStructure f = build_policy(8, SimpleTspParams{3.0, 3.4, 6, 7}, s.choice);
  EvaluateOptions warm, cold;
  cold.cold_start = true;
  const PerformanceReport a = evaluate(s, f, warm);
  const PerformanceReport b = evaluate(s, f, cold);
  CHECK(std::abs(a.expected_backorders - b.expected_backorders) <= 1e-9);
  CHECK(std::abs(a.rejection_probability - b.rejection_probability) <= 1e-9);
  CHECK(a.iterations <= b.iterations);
}

TEST_CASE("mean delay") {
  CHECK(mean_delay(1.29, 5.0) == doctest::Approx(0.258));
  CHECK(mean_delay(0.0, 5.0) == 0.0);
  CHECK(mean_delay(0.56, 5.0) == doctest::Approx(0.112));
  CHECK_THROWS_AS(mean_delay(1.0, 0.0), ParameterError);
}

}
