#include "shipfee/presets.hpp"

#include <cstdio>

#include "shipfee/errors.hpp"

namespace shipfee {

namespace {

struct Setting {
  const char* name;
  double utilization;
  double penalty;
};

constexpr Setting kSettings[] = {
    {"rho085_c8", 0.85, 8.0},  {"rho085_c12", 0.85, 12.0}, {"rho090_c8", 0.90, 8.0},
    {"rho090_c12", 0.90, 12.0}, {"rho095_c8", 0.95, 8.0},  {"rho095_c12", 0.95, 12.0},
};

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const Setting& s : kSettings) names.emplace_back(s.name);
  return names;
}

nlohmann::json preset_json(std::string_view name) {
  for (const Setting& s : kSettings) {
    if (name != s.name) continue;
    nlohmann::json fees = nlohmann::json::array();
    for (int k = 1; k <= 19; ++k) fees.push_back(k / 5.0);
    char description[96];
    std::snprintf(description, sizeof description, "utilization %.2f, penalty %g per backorder",
                  s.utilization, s.penalty);
    return {
        {"name", s.name},
        {"description", description},
        {"scenario",
         {{"period_length", 8},
          {"lambda", 5.0},
          {"utilization", s.utilization},
          {"scv", 0.5},
          {"capacity_support_max", 20},
          {"beta_cells", "rounded"},
          {"rejection_threshold", 0.023},
          {"rejection_decimals", 3},
          {"bound_step", 10}}},
        {"choice", {{"regular_price", 4.0}, {"u_min", 0.0}, {"u_max", 4.0}}},
        {"penalty", s.penalty},
        {"grid", {{"fee_values", fees}, {"cutoff_min", 1}, {"cutoff_max", 7}}},
        {"policy", {{"family", "CSP"}, {"fee", 2.0}}},
        {"optimize", {{"family", "TSP"}}},
        {"simulate", {{"cycles", 1001000}, {"warmup_cycles", 1000}, {"seed", 1}, {"batches", 100}}},
    };
  }
  std::string known;
  for (const Setting& s : kSettings) known += std::string(known.empty() ? "" : ", ") + s.name;
  throw ParameterError("unknown preset \"" + std::string(name) + "\" (known: " + known + ")");
}

ExperimentConfig preset(std::string_view name) { return parse_config(preset_json(name)); }

}  // namespace shipfee
