#pragma once

namespace shipfee {

// Customers pay the regular price p for regular shipment and p + fee for
// express; the extra utility U of express is uniform on [u_min, u_max].
struct ChoiceModel {
  double regular_price = 0.0;
  double u_min = 0.0;
  double u_max = 0.0;

  void validate() const;
};

// Fraction of customers choosing express at express price `price`:
// P(U > price - regular_price), clamped to 1 below p + u_min and 0 at or above
// p + u_max. With u_min == u_max it is a right-continuous step at the atom.
double take_rate(const ChoiceModel& model, double price);

// take_rate(model, regular_price + fee) without the round trip through the
// price, so fee == u_max yields exactly 0.
double express_share(const ChoiceModel& model, double fee);

// Smallest fee in [u_min, u_max] whose take rate is `rate` (rate in [0, 1]).
double fee_for_take_rate(const ChoiceModel& model, double rate);

struct ArrivalRates {
  double express = 0.0;
  double regular = 0.0;
};

// Poisson thinning of demand rate `lambda` at express fee `fee`. A fee of
// +infinity means express is not offered: (0, lambda).
ArrivalRates split_rates(const ChoiceModel& model, double lambda, double fee);

}  // namespace shipfee
