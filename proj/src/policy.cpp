#include "shipfee/policy.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "shipfee/errors.hpp"

namespace shipfee {

FeeStructure::FeeStructure(std::vector<double> fees) : fees_(std::move(fees)) {
  for (std::size_t i = 0; i < fees_.size(); ++i) {
    const double f = fees_[i];
    if (std::isnan(f) || f == -std::numeric_limits<double>::infinity()) {
      std::ostringstream msg;
      msg << "fee structure: fee at age " << i << " must be finite or +inf";
      throw ParameterError(msg.str());
    }
  }
}

int FeeStructure::effective_cutoff(const ChoiceModel& choice) const {
  for (int age = period_length() - 1; age >= 0; --age) {
    if (express_share(choice, fees_[age]) > 0.0) return age;
  }
  return -1;
}

FeeStructure to_fee_structure(int period_length, const CutoffPolicy& policy) {
  if (policy.cutoff < 0 || policy.cutoff >= period_length) {
    throw ParameterError("cutoff policy: cutoff outside [0, T-1]");
  }
  if (static_cast<int>(policy.fees.size()) != policy.cutoff + 1) {
    throw ParameterError("cutoff policy: expected cutoff + 1 fees");
  }
  std::vector<double> fees(period_length, std::numeric_limits<double>::infinity());
  std::copy(policy.fees.begin(), policy.fees.end(), fees.begin());
  return FeeStructure(std::move(fees));
}

FeeStructure canonicalize(int period_length, int cutoff, const std::vector<double>& partial_fees,
                          const ChoiceModel& choice) {
  if (cutoff < 0 || cutoff >= period_length) {
    std::ostringstream msg;
    msg << "canonicalize: cutoff " << cutoff << " outside [0, " << period_length - 1 << "]";
    throw ParameterError(msg.str());
  }
  if (static_cast<int>(partial_fees.size()) != cutoff + 1) {
    std::ostringstream msg;
    msg << "canonicalize: got " << partial_fees.size() << " fees for cutoff " << cutoff
        << ", expected " << cutoff + 1;
    throw ParameterError(msg.str());
  }
  std::vector<double> fees(period_length, choice.u_max);
  std::copy(partial_fees.begin(), partial_fees.end(), fees.begin());
  return FeeStructure(std::move(fees));
}

std::string_view family_name(Family family) {
  switch (family) {
    case Family::kCsp:
      return "CSP";
    case Family::kTspCf:
      return "TSP_CF";
    case Family::kTsp:
      return "TSP";
  }
  return "?";
}

Family family_of(const PolicyParams& params) {
  if (std::holds_alternative<ConstantFee>(params)) return Family::kCsp;
  if (std::holds_alternative<CutoffFee>(params)) return Family::kTspCf;
  return Family::kTsp;
}

namespace {

void check_age(int age, int period_length, const char* what) {
  if (age < 0 || age >= period_length) {
    std::ostringstream msg;
    msg << what << " " << age << " outside [0, " << period_length - 1 << "]";
    throw ParameterError(msg.str());
  }
}

void check_fee(double fee, const char* what) {
  if (!std::isfinite(fee)) {
    throw ParameterError(std::string(what) + " must be finite");
  }
}

}  // namespace

FeeStructure build_policy(int period_length, const PolicyParams& params, const ChoiceModel& choice) {
  if (period_length < 1) throw ParameterError("build_policy: period length must be >= 1");
  if (const auto* csp = std::get_if<ConstantFee>(&params)) {
    check_fee(csp->fee, "CSP fee");
    return FeeStructure(std::vector<double>(period_length, csp->fee));
  }
  if (const auto* cf = std::get_if<CutoffFee>(&params)) {
    check_fee(cf->fee, "TSP_CF fee");
    check_age(cf->cutoff_age, period_length, "TSP_CF cutoff age");
    return canonicalize(period_length, cf->cutoff_age,
                        std::vector<double>(cf->cutoff_age + 1, cf->fee), choice);
  }
  const auto& tsp = std::get<SimpleTspParams>(params);
  check_fee(tsp.express_fee, "TSP express fee");
  check_fee(tsp.lastminute_fee, "TSP last-minute fee");
  if (!(tsp.lastminute_fee > tsp.express_fee)) {
    std::ostringstream msg;
    msg << "TSP: last-minute fee " << tsp.lastminute_fee << " must exceed express fee "
        << tsp.express_fee;
    throw ParameterError(msg.str());
  }
  check_age(tsp.cutoff_age, period_length, "TSP cutoff age");
  check_age(tsp.switch_age, period_length, "TSP switch age");
  if (tsp.switch_age > tsp.cutoff_age) {
    throw ParameterError("TSP: switch age must not exceed cutoff age");
  }
  std::vector<double> partial(tsp.cutoff_age + 1);
  for (int age = 0; age <= tsp.cutoff_age; ++age) {
    partial[age] = age <= tsp.switch_age ? tsp.express_fee : tsp.lastminute_fee;
  }
  return canonicalize(period_length, tsp.cutoff_age, partial, choice);
}

std::string describe(const PolicyParams& params) {
  std::ostringstream out;
  if (const auto* csp = std::get_if<ConstantFee>(&params)) {
    out << "CSP(f=" << csp->fee << ")";
  } else if (const auto* cf = std::get_if<CutoffFee>(&params)) {
    out << "TSP_CF(f=" << cf->fee << ", tau_C=" << cf->cutoff_age << ")";
  } else {
    const auto& t = std::get<SimpleTspParams>(params);
    out << "TSP(f_E=" << t.express_fee << ", f_LE=" << t.lastminute_fee
        << ", tau_F=" << t.switch_age << ", tau_C=" << t.cutoff_age << ")";
  }
  return out.str();
}

CumulativeDemandProfile::CumulativeDemandProfile(std::vector<double> values_from_minus_one)
    : values_(std::move(values_from_minus_one)) {
  if (values_.empty() || values_.front() != 0.0) {
    throw ParameterError("demand profile: value at age -1 must be 0");
  }
}

double CumulativeDemandProfile::express_fraction(double lambda) const {
  if (!(lambda > 0.0)) throw ParameterError("express fraction: lambda must be > 0");
  return total() / (period_length() * lambda);
}

bool CumulativeDemandProfile::dominates(const CumulativeDemandProfile& other, double tol) const {
  if (other.period_length() != period_length()) return false;
  for (int age = 0; age < period_length(); ++age) {
    if (at(age) < other.at(age) - tol) return false;
  }
  return std::fabs(total() - other.total()) <= tol;
}

CumulativeDemandProfile demand_profile(const FeeStructure& policy, const ChoiceModel& choice,
                                       double lambda) {
  std::vector<double> values(policy.period_length() + 1, 0.0);
  for (int age = 0; age < policy.period_length(); ++age) {
    values[age + 1] = values[age] + lambda * express_share(choice, policy[age]);
  }
  return CumulativeDemandProfile(std::move(values));
}

bool is_monotone(const FeeStructure& policy) {
  for (int age = 1; age < policy.period_length(); ++age) {
    if (!(policy[age] > policy[age - 1])) return false;
  }
  return true;
}

bool is_weakly_monotone(const FeeStructure& policy) {
  for (int age = 1; age < policy.period_length(); ++age) {
    if (!(policy[age] >= policy[age - 1])) return false;
  }
  return true;
}

}  // namespace shipfee
