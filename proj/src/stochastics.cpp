#include "shipfee/stochastics.hpp"

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <numeric>
#include <sstream>

#include "shipfee/errors.hpp"

namespace shipfee {

Pmf::Pmf(std::vector<double> mass) : mass_(std::move(mass)) {
  if (mass_.empty()) throw ParameterError("pmf: empty support");
  double total = 0.0;
  for (std::size_t i = 0; i < mass_.size(); ++i) {
    const double p = mass_[i];
    if (!(p >= 0.0 && p <= 1.0)) {
      std::ostringstream msg;
      msg << "pmf: mass[" << i << "] = " << p << " outside [0, 1]";
      throw ParameterError(msg.str());
    }
    total += p;
  }
  if (std::fabs(total - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "pmf: total mass " << total << " differs from 1 by more than 1e-12";
    throw ParameterError(msg.str());
  }
}

Pmf Pmf::point_mass(int value) {
  if (value < 0) throw ParameterError("pmf: point mass at a negative value");
  std::vector<double> mass(static_cast<std::size_t>(value) + 1, 0.0);
  mass.back() = 1.0;
  return Pmf(std::move(mass));
}

double Pmf::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < mass_.size(); ++i) m += static_cast<double>(i) * mass_[i];
  return m;
}

double Pmf::variance() const {
  const double m = mean();
  double v = 0.0;
  for (std::size_t i = 0; i < mass_.size(); ++i) {
    const double d = static_cast<double>(i) - m;
    v += d * d * mass_[i];
  }
  return v;
}

double Pmf::scv() const {
  const double m = mean();
  return m > 0.0 ? variance() / (m * m) : 0.0;
}

double Pmf::cdf(int i) const {
  if (i < 0) return 0.0;
  if (i >= support_max()) return 1.0;
  return std::accumulate(mass_.begin(), mass_.begin() + i + 1, 0.0);
}

Pmf poisson_pmf(double rate, double tail_eps) {
  if (!(rate >= 0.0) || !std::isfinite(rate)) {
    std::ostringstream msg;
    msg << "poisson_pmf: rate must be finite and >= 0, got " << rate;
    throw ParameterError(msg.str());
  }
  if (!(tail_eps > 0.0 && tail_eps <= 1e-6)) {
    throw ParameterError("poisson_pmf: tail_eps must lie in (0, 1e-6]");
  }
  if (rate == 0.0) return Pmf::point_mass(0);

  std::vector<double> mass;
  double cumulative = 0.0;
  const double log_rate = std::log(rate);
  for (int n = 0;; ++n) {
    const double p = std::exp(-rate + n * log_rate - std::lgamma(n + 1.0));
    mass.push_back(p);
    cumulative += p;
    // Past the mode the terms only shrink; stop once the tail is negligible.
    if (cumulative >= 1.0 - tail_eps && n >= rate) break;
  }
  mass.back() += 1.0 - cumulative;
  mass.back() = std::clamp(mass.back(), 0.0, 1.0);
  return Pmf(std::move(mass));
}

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return boost::math::ibeta(a, b, x);
}

CapacityFit discretized_beta(const CapacitySpec& spec, BetaCells cells) {
  const int n = spec.support_max;
  if (n < 1) throw ParameterError("capacity: support_max must be >= 1");
  if (!(spec.mean > 0.0 && spec.mean < n)) {
    std::ostringstream msg;
    msg << "capacity: mean " << spec.mean << " must lie in (0, " << n << ")";
    throw ParameterError(msg.str());
  }
  const double max_scv = (n - spec.mean) / spec.mean;
  if (!(spec.scv > 0.0 && spec.scv < max_scv)) {
    std::ostringstream msg;
    msg << "capacity: scv " << spec.scv << " infeasible for a Beta on [0, " << n
        << "] with mean " << spec.mean << "; feasible scv range is (0, " << max_scv << ")";
    throw ParameterError(msg.str());
  }

  const double m = spec.mean / n;
  const double v = spec.scv * spec.mean * spec.mean / (static_cast<double>(n) * n);
  const double concentration = m * (1.0 - m) / v - 1.0;
  CapacityFit fit;
  fit.alpha = m * concentration;
  fit.beta = (1.0 - m) * concentration;

  std::vector<double> mass(static_cast<std::size_t>(n) + 1);
  const auto cdf = [&](double x) { return incomplete_beta(fit.alpha, fit.beta, x); };
  const auto upper = [&](double x) {
    return x <= 0.0 ? 1.0 : (x >= 1.0 ? 0.0 : boost::math::ibetac(fit.alpha, fit.beta, x));
  };
  if (cells == BetaCells::kRounded) {
    for (int i = 0; i <= n; ++i) {
      const double lo = (i - 0.5) / n;
      const double hi = (i + 0.5) / n;
      // Evaluate each cell from the nearer tail to limit cancellation.
      mass[i] = (hi <= m) ? cdf(hi) - cdf(lo) : upper(lo) - upper(hi);
    }
  } else {
    for (int i = 0; i <= n; ++i) {
      const double lo = static_cast<double>(i) / (n + 1);
      const double hi = static_cast<double>(i + 1) / (n + 1);
      mass[i] = (hi <= m) ? cdf(hi) - cdf(lo) : upper(lo) - upper(hi);
    }
  }
  double total = 0.0;
  for (double& p : mass) {
    p = std::max(p, 0.0);
    total += p;
  }
  for (double& p : mass) p /= total;

  fit.pmf = Pmf(std::move(mass));
  fit.achieved_mean = fit.pmf.mean();
  fit.achieved_scv = fit.pmf.scv();
  return fit;
}

Pmf surplus_pmf(int base, const Pmf& income, const Pmf& capacity) {
  if (base < 0) throw ParameterError("surplus_pmf: base must be >= 0");
  const int top = base + income.support_max();
  std::vector<double> mass(static_cast<std::size_t>(top) + 1, 0.0);
  for (int i = 0; i <= income.support_max(); ++i) {
    const double pi = income[i];
    if (pi == 0.0) continue;
    for (int c = 0; c <= capacity.support_max(); ++c) {
      const double pc = capacity[c];
      if (pc == 0.0) continue;
      mass[std::max(0, base + i - c)] += pi * pc;
    }
  }
  return Pmf(std::move(mass));
}

SignedPmf difference_pmf(const Pmf& income, const Pmf& capacity) {
  SignedPmf out;
  out.min = -capacity.support_max();
  out.mass.assign(static_cast<std::size_t>(income.support_max() + capacity.support_max()) + 1, 0.0);
  for (int i = 0; i <= income.support_max(); ++i) {
    for (int c = 0; c <= capacity.support_max(); ++c) {
      out.mass[i - c - out.min] += income[i] * capacity[c];
    }
  }
  return out;
}

}  // namespace shipfee
