#pragma once

// The six published settings: T = 8, lambda = 5, scv[B] = 0.5 on {0..20},
// p = 4 with U ~ [0, 4], utilization in {0.85, 0.9, 0.95}, penalty in {8, 12}.

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "shipfee/io.hpp"

namespace shipfee {

std::vector<std::string> preset_names();
// Throws ParameterError for unknown names.
nlohmann::json preset_json(std::string_view name);
ExperimentConfig preset(std::string_view name);

}  // namespace shipfee
