#pragma once

// Discrete probability primitives: truncated Poisson laws, the discretized
// Beta capacity law, and the positive-part fold (base + I - C)^+.

#include <cstddef>
#include <span>
#include <vector>

namespace shipfee {

// Probability mass function on {0, 1, ..., support_max()}.
class Pmf {
 public:
  Pmf() : mass_{1.0} {}

  // Validates: nonempty, entries in [0, 1], total within 1e-12 of 1.
  explicit Pmf(std::vector<double> mass);

  static Pmf point_mass(int value);

  int support_max() const { return static_cast<int>(mass_.size()) - 1; }
  double operator[](int i) const { return (i < 0 || i > support_max()) ? 0.0 : mass_[i]; }
  std::span<const double> mass() const { return mass_; }

  double mean() const;
  double variance() const;
  // Squared coefficient of variation; 0 for a point mass at 0.
  double scv() const;
  double cdf(int i) const;

  friend bool operator==(const Pmf&, const Pmf&) = default;

 private:
  std::vector<double> mass_;
};

inline constexpr double kDefaultTailEps = 1e-12;

// Poisson(rate) truncated at the smallest n with CDF(n) >= 1 - tail_eps; the
// residual tail is folded onto n so the result is exactly stochastic.
Pmf poisson_pmf(double rate, double tail_eps = kDefaultTailEps);

struct CapacitySpec {
  int support_max = 20;
  double mean = 0.0;
  double scv = 0.0;
};

// How the continuous Beta on [0, 1] is cut into the support cells.
enum class BetaCells {
  // P(B = i) = F((i + 1/2) / n) - F((i - 1/2) / n), end cells clipped to [0, 1].
  // Round-to-nearest of n * Y; preserves the mean up to O(1/n^2) effects.
  kRounded,
  // P(B = i) = F((i + 1) / (n + 1)) - F(i / (n + 1)). Floor of (n + 1) * Y;
  // biases the mean down by roughly one half unit.
  kEqualWidth,
};

struct CapacityFit {
  Pmf pmf;
  double alpha = 0.0;
  double beta = 0.0;
  double achieved_mean = 0.0;
  double achieved_scv = 0.0;
};

// Moment-matches a Beta(alpha, beta) on [0, 1] to m = mean / n and
// v = scv * mean^2 / n^2 (n = support_max), then discretizes it onto {0..n}.
// Throws ParameterError when no Beta has that variance.
CapacityFit discretized_beta(const CapacitySpec& spec, BetaCells cells = BetaCells::kRounded);

// Exact law of (base + I - C)^+ for independent I ~ income, C ~ capacity.
Pmf surplus_pmf(int base, const Pmf& income, const Pmf& capacity);

// Law of I - C for independent I ~ income, C ~ capacity, stored with an offset:
// mass[j] = P(I - C = j + min).
struct SignedPmf {
  int min = 0;
  std::vector<double> mass;

  int max() const { return min + static_cast<int>(mass.size()) - 1; }
  double operator[](int value) const {
    const int j = value - min;
    return (j < 0 || j >= static_cast<int>(mass.size())) ? 0.0 : mass[j];
  }
};

SignedPmf difference_pmf(const Pmf& income, const Pmf& capacity);

// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

}  // namespace shipfee
