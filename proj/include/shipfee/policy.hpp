#pragma once

// Shipment policies. Downstream code sees a single representation: one
// express fee per age of the operating cycle. A fee equal to u_max (take rate
// 0) or +infinity means express is not offered at that age.

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "shipfee/choice.hpp"

namespace shipfee {

class FeeStructure {
 public:
  FeeStructure() = default;
  // Entries must be finite or +infinity.
  explicit FeeStructure(std::vector<double> fees);

  int period_length() const { return static_cast<int>(fees_.size()); }
  double operator[](int age) const { return fees_[age]; }
  const std::vector<double>& fees() const { return fees_; }

  // Last age whose fee yields a positive take rate; -1 when express is never
  // offered.
  int effective_cutoff(const ChoiceModel& choice) const;

  friend bool operator==(const FeeStructure&, const FeeStructure&) = default;
  friend auto operator<=>(const FeeStructure&, const FeeStructure&) = default;

 private:
  std::vector<double> fees_;
};

// Express offered with fees f_0..f_cutoff, not offered afterwards.
struct CutoffPolicy {
  int cutoff = 0;
  std::vector<double> fees;
};

// The cutoff form with +infinity after the cutoff.
FeeStructure to_fee_structure(int period_length, const CutoffPolicy& policy);

// Equivalent fee vector with cutoff T-1: ages after `cutoff` get u_max.
FeeStructure canonicalize(int period_length, int cutoff, const std::vector<double>& partial_fees,
                          const ChoiceModel& choice);

// Constant fee every age, no cutoff.
struct ConstantFee {
  double fee = 0.0;
};

// Constant fee up to the cutoff age, nothing after.
struct CutoffFee {
  double fee = 0.0;
  int cutoff_age = 0;
};

// Express fee up to switch_age, last-minute fee on (switch_age, cutoff_age],
// nothing after.
struct SimpleTspParams {
  double express_fee = 0.0;
  double lastminute_fee = 0.0;
  int switch_age = 0;
  int cutoff_age = 0;

  friend bool operator==(const SimpleTspParams&, const SimpleTspParams&) = default;
};

using PolicyParams = std::variant<ConstantFee, CutoffFee, SimpleTspParams>;

enum class Family { kCsp, kTspCf, kTsp };

std::string_view family_name(Family family);
Family family_of(const PolicyParams& params);

// Canonical fee vector for a benchmark family. Throws ParameterError on
// invariant violations (f_LE <= f_E, ages out of range).
FeeStructure build_policy(int period_length, const PolicyParams& params, const ChoiceModel& choice);

std::string describe(const PolicyParams& params);

// Expected cumulative express orders by age; index -1 holds 0.
class CumulativeDemandProfile {
 public:
  explicit CumulativeDemandProfile(std::vector<double> values_from_minus_one);

  double at(int age) const { return values_[age + 1]; }
  int period_length() const { return static_cast<int>(values_.size()) - 1; }
  double total() const { return values_.back(); }
  // Expected fraction of all orders placed as express.
  double express_fraction(double lambda) const;

  // Componentwise >= (within tol) with totals equal within tol.
  bool dominates(const CumulativeDemandProfile& other, double tol = 1e-9) const;

 private:
  std::vector<double> values_;
};

CumulativeDemandProfile demand_profile(const FeeStructure& policy, const ChoiceModel& choice,
                                       double lambda);

// Strictly increasing fees across all ages.
bool is_monotone(const FeeStructure& policy);

// Nondecreasing fees across all ages.
bool is_weakly_monotone(const FeeStructure& policy);

}  // namespace shipfee
