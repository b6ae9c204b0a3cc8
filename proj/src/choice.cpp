#include "shipfee/choice.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "shipfee/errors.hpp"

namespace shipfee {

void ChoiceModel::validate() const {
  if (!(regular_price >= 0.0) || !std::isfinite(regular_price)) {
    throw ParameterError("choice: regular_price must be finite and >= 0");
  }
  if (!(u_min >= 0.0) || !std::isfinite(u_min)) {
    throw ParameterError("choice: u_min must be finite and >= 0");
  }
  if (!(u_max >= u_min) || !std::isfinite(u_max)) {
    std::ostringstream msg;
    msg << "choice: u_max (" << u_max << ") must be finite and >= u_min (" << u_min << ")";
    throw ParameterError(msg.str());
  }
}

double take_rate(const ChoiceModel& model, double price) {
  return express_share(model, price - model.regular_price);
}

double express_share(const ChoiceModel& model, double surcharge) {
  if (std::isinf(surcharge)) return surcharge > 0.0 ? 0.0 : 1.0;
  if (model.u_max == model.u_min) return surcharge < model.u_min ? 1.0 : 0.0;
  if (surcharge <= model.u_min) return 1.0;
  if (surcharge >= model.u_max) return 0.0;
  return 1.0 - (surcharge - model.u_min) / (model.u_max - model.u_min);
}

double fee_for_take_rate(const ChoiceModel& model, double rate) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw ParameterError("fee_for_take_rate: rate outside [0, 1]");
  return model.u_min + (1.0 - rate) * (model.u_max - model.u_min);
}

ArrivalRates split_rates(const ChoiceModel& model, double lambda, double fee) {
  if (!(lambda >= 0.0)) throw ParameterError("split_rates: lambda must be >= 0");
  const double express = lambda * express_share(model, fee);
  return {express, lambda - express};
}

}  // namespace shipfee
