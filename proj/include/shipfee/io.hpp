#pragma once

// Experiment configs (JSON in), reports (JSON and CSV out).

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "shipfee/chain.hpp"
#include "shipfee/measures.hpp"
#include "shipfee/optimize.hpp"
#include "shipfee/sim.hpp"
#include "shipfee/verify.hpp"

namespace shipfee {

struct ExperimentConfig {
  std::string name;
  Scenario scenario;
  // Set when the capacity law was fitted rather than given explicitly.
  std::optional<double> requested_utilization;
  std::optional<CapacityFit> capacity_fit;
  SearchGrid grid = SearchGrid::defaults();
  std::optional<PolicyParams> policy_params;
  std::optional<FeeStructure> policy;
  SearchFamily family = SearchFamily::kTsp;
  EvaluateOptions evaluate;
  SimConfig simulate;
  bool simulate_bound_from_search = true;
  VerifyOptions verify;
};

// Throws ParameterError whose message starts with the JSON path of the
// offending field, e.g. "$.scenario.utilization: ...".
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig parse_config_text(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const Scenario& scenario);
nlohmann::json to_json(const PolicyParams& params);
nlohmann::json to_json(const FeeStructure& policy);
nlohmann::json to_json(const PerformanceReport& report);
nlohmann::json to_json(const Optimum& optimum);
nlohmann::json to_json(const SimResult& result);
nlohmann::json to_json(const SuiteResult& result);

PerformanceReport report_from_json(const nlohmann::json& doc);

// Shortest decimal that parses back to the same double.
std::string format_double(double value);

// Comma-separated, '.' decimal point, header row first.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::vector<std::string> header);
  CsvWriter& cell(std::string_view text);
  CsvWriter& cell(double value);
  CsvWriter& cell(int value);
  CsvWriter& cell(long value);
  CsvWriter& empty();
  void end_row();

 private:
  std::ostream& out_;
  std::size_t columns_;
  std::size_t filled_ = 0;
};

}  // namespace shipfee
