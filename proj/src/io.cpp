#include "shipfee/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "shipfee/errors.hpp"

namespace shipfee {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  throw ParameterError(path + ": " + what);
}

// A JSON object together with its path, for diagnostics.
class Node {
 public:
  Node(const json& value, std::string path) : value_(value), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& value() const { return value_; }

  void expect_object() const {
    if (!value_.is_object()) bad(path_, "expected an object");
  }
  void allow_only(std::initializer_list<const char*> keys) const {
    expect_object();
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, _] : value_.items()) {
      if (!allowed.contains(key)) bad(path_ + "." + key, "unknown field");
    }
  }
  bool has(const char* key) const { return value_.contains(key) && !value_.at(key).is_null(); }
  Node child(const char* key) const {
    if (!has(key)) bad(path_ + "." + key, "required field is missing");
    return Node(value_.at(key), path_ + "." + key);
  }

  double number() const {
    if (!value_.is_number()) bad(path_, "expected a number");
    const double v = value_.get<double>();
    if (!std::isfinite(v)) bad(path_, "expected a finite number");
    return v;
  }
  long integer() const {
    if (!value_.is_number_integer()) bad(path_, "expected an integer");
    return value_.get<long>();
  }
  std::uint64_t unsigned_integer() const {
    if (value_.is_number_unsigned()) return value_.get<std::uint64_t>();
    if (!value_.is_number_integer() || value_.get<long>() < 0) bad(path_, "expected a nonnegative integer");
    return static_cast<std::uint64_t>(value_.get<long>());
  }
  bool boolean() const {
    if (!value_.is_boolean()) bad(path_, "expected true or false");
    return value_.get<bool>();
  }
  std::string string() const {
    if (!value_.is_string()) bad(path_, "expected a string");
    return value_.get<std::string>();
  }
  std::vector<double> numbers() const {
    if (!value_.is_array()) bad(path_, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < value_.size(); ++i) {
      out.push_back(Node(value_[i], path_ + "[" + std::to_string(i) + "]").number());
    }
    return out;
  }

  double number(const char* key, double fallback) const { return has(key) ? child(key).number() : fallback; }
  long integer(const char* key, long fallback) const { return has(key) ? child(key).integer() : fallback; }

 private:
  const json& value_;
  std::string path_;
};

// Re-throws library validation errors with the path of the enclosing block.
template <typename Fn>
void at_path(const std::string& path, Fn&& fn) {
  try {
    fn();
  } catch (const ParameterError& e) {
    bad(path, e.what());
  }
}

int positive_int(const Node& n, const char* key, long fallback, long min_value) {
  const long v = n.integer(key, fallback);
  if (v < min_value) bad(n.path() + "." + key, "must be >= " + std::to_string(min_value));
  if (v > 1'000'000'000L) bad(n.path() + "." + key, "is too large");
  return static_cast<int>(v);
}

PolicyParams parse_params(const Node& n, ExperimentConfig& cfg) {
  const std::string family = n.child("family").string();
  if (family == "CSP") {
    n.allow_only({"family", "fee"});
    return ConstantFee{n.child("fee").number()};
  }
  if (family == "TSP_CF") {
    n.allow_only({"family", "fee", "cutoff_age"});
    return CutoffFee{n.child("fee").number(), static_cast<int>(n.child("cutoff_age").integer())};
  }
  if (family == "TSP") {
    n.allow_only({"family", "express_fee", "lastminute_fee", "switch_age", "cutoff_age"});
    return SimpleTspParams{n.child("express_fee").number(), n.child("lastminute_fee").number(),
                           static_cast<int>(n.child("switch_age").integer()),
                           static_cast<int>(n.child("cutoff_age").integer())};
  }
  (void)cfg;
  bad(n.path() + ".family", "expected one of CSP, TSP_CF, TSP (got \"" + family + "\")");
}

SearchFamily parse_family(const Node& n) {
  const std::string s = n.string();
  if (s == "TSP_CF") return SearchFamily::kTspCf;
  if (s == "TSP_CF_star") return SearchFamily::kTspCfStar;
  if (s == "TSP") return SearchFamily::kTsp;
  bad(n.path(), "expected one of TSP_CF, TSP_CF_star, TSP (got \"" + s + "\")");
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  const Node root(doc, "$");
  root.allow_only({"name", "description", "scenario", "choice", "penalty", "grid", "policy",
                   "evaluate", "optimize", "simulate", "verify"});
  ExperimentConfig cfg;
  if (root.has("name")) cfg.name = root.child("name").string();

  const Node choice = root.child("choice");
  choice.allow_only({"regular_price", "u_min", "u_max"});
  cfg.scenario.choice = {choice.child("regular_price").number(), choice.child("u_min").number(),
                         choice.child("u_max").number()};
  at_path(choice.path(), [&] { cfg.scenario.choice.validate(); });

  const Node penalty = root.child("penalty");
  cfg.scenario.penalty = penalty.number();
  if (cfg.scenario.penalty < 0.0) bad(penalty.path(), "must be >= 0");

  const Node sc = root.child("scenario");
  sc.allow_only({"period_length", "lambda", "utilization", "mean_capacity", "capacity_pmf", "scv",
                 "capacity_support_max", "beta_cells", "rejection_threshold", "rejection_decimals",
                 "bound_step", "bound_cap"});
  cfg.scenario.period_length = positive_int(sc, "period_length", 8, 2);
  cfg.scenario.lambda = sc.child("lambda").number();
  if (cfg.scenario.lambda < 0.0) bad(sc.path() + ".lambda", "must be >= 0");
  cfg.scenario.rejection_threshold = sc.number("rejection_threshold", 0.023);
  if (sc.has("rejection_decimals")) cfg.scenario.rejection_decimals = positive_int(sc, "rejection_decimals", 0, 0);
  cfg.scenario.bound_step = positive_int(sc, "bound_step", 1, 1);
  cfg.scenario.bound_cap = positive_int(sc, "bound_cap", 2000, 1);

  const int given = int(sc.has("utilization")) + int(sc.has("mean_capacity")) + int(sc.has("capacity_pmf"));
  if (given != 1) {
    bad(sc.path(), "exactly one of utilization, mean_capacity, capacity_pmf is required (got " +
                       std::to_string(given) + ")");
  }
  if (sc.has("capacity_pmf")) {
    for (const char* key : {"scv", "capacity_support_max", "beta_cells"}) {
      if (sc.has(key)) bad(sc.path() + "." + key, "not allowed together with capacity_pmf");
    }
    const Node pmf = sc.child("capacity_pmf");
    at_path(pmf.path(), [&] { cfg.scenario.capacity = Pmf(pmf.numbers()); });
  } else {
    CapacitySpec spec;
    spec.support_max = positive_int(sc, "capacity_support_max", 20, 1);
    spec.scv = sc.child("scv").number();
    if (sc.has("utilization")) {
      const Node u = sc.child("utilization");
      const double rho = u.number();
      if (!(rho > 0.0 && rho < 1.0)) bad(u.path(), "must lie in (0, 1)");
      if (!(cfg.scenario.lambda > 0.0)) bad(sc.path() + ".lambda", "must be > 0 when utilization is given");
      cfg.requested_utilization = rho;
      spec.mean = cfg.scenario.lambda / rho;
    } else {
      spec.mean = sc.child("mean_capacity").number();
    }
    BetaCells cells = BetaCells::kRounded;
    if (sc.has("beta_cells")) {
      const Node c = sc.child("beta_cells");
      const std::string s = c.string();
      if (s == "rounded") {
        cells = BetaCells::kRounded;
      } else if (s == "equal_width") {
        cells = BetaCells::kEqualWidth;
      } else {
        bad(c.path(), "expected \"rounded\" or \"equal_width\"");
      }
    }
    at_path(sc.path(), [&] {
      cfg.capacity_fit = discretized_beta(spec, cells);
      cfg.scenario.capacity = cfg.capacity_fit->pmf;
    });
  }
  at_path(sc.path(), [&] { cfg.scenario.validate(); });

  if (root.has("grid")) {
    const Node g = root.child("grid");
    g.allow_only({"fee_values", "cutoff_min", "cutoff_max"});
    if (g.has("fee_values")) cfg.grid.fee_values = g.child("fee_values").numbers();
    cfg.grid.cutoff_min = static_cast<int>(g.integer("cutoff_min", cfg.grid.cutoff_min));
    cfg.grid.cutoff_max = static_cast<int>(g.integer("cutoff_max", cfg.grid.cutoff_max));
    at_path(g.path(), [&] { cfg.grid.validate(cfg.scenario.choice, cfg.scenario.period_length); });
  }

  if (root.has("policy")) {
    const Node p = root.child("policy");
    p.expect_object();
    if (p.has("fees")) {
      p.allow_only({"fees"});
      const Node fees = p.child("fees");
      std::vector<double> values;
      if (!fees.value().is_array()) bad(fees.path(), "expected an array");
      for (std::size_t i = 0; i < fees.value().size(); ++i) {
        const Node f(fees.value()[i], fees.path() + "[" + std::to_string(i) + "]");
        if (f.value().is_string() && f.string() == "inf") {
          values.push_back(INFINITY);
        } else {
          values.push_back(f.number());
        }
      }
      if (static_cast<int>(values.size()) != cfg.scenario.period_length) {
        bad(fees.path(), "length " + std::to_string(values.size()) + " differs from period_length " +
                             std::to_string(cfg.scenario.period_length));
      }
      at_path(fees.path(), [&] { cfg.policy = FeeStructure(values); });
    } else {
      cfg.policy_params = parse_params(p, cfg);
      at_path(p.path(), [&] {
        cfg.policy = build_policy(cfg.scenario.period_length, *cfg.policy_params, cfg.scenario.choice);
      });
    }
  }

  if (root.has("evaluate")) {
    const Node e = root.child("evaluate");
    e.allow_only({"bound", "convention", "cold_start"});
    if (e.has("bound")) cfg.evaluate.bound = positive_int(e, "bound", 0, 0);
    if (e.has("convention")) {
      const Node c = e.child("convention");
      const std::string s = c.string();
      if (s == "adjusted") {
        cfg.evaluate.convention = IncomeConvention::kAdjusted;
      } else if (s == "raw") {
        cfg.evaluate.convention = IncomeConvention::kRaw;
      } else {
        bad(c.path(), "expected \"adjusted\" or \"raw\"");
      }
    }
    if (e.has("cold_start")) cfg.evaluate.cold_start = e.child("cold_start").boolean();
  }

  if (root.has("optimize")) {
    const Node o = root.child("optimize");
    o.allow_only({"family"});
    if (o.has("family")) cfg.family = parse_family(o.child("family"));
  }

  if (root.has("simulate")) {
    const Node s = root.child("simulate");
    s.allow_only({"cycles", "warmup_cycles", "seed", "bound", "batches", "replications"});
    cfg.simulate.cycles = s.integer("cycles", cfg.simulate.cycles);
    cfg.simulate.warmup_cycles = s.integer("warmup_cycles", cfg.simulate.warmup_cycles);
    if (s.has("seed")) cfg.simulate.seed = s.child("seed").unsigned_integer();
    if (s.has("bound")) {
      cfg.simulate.bound = positive_int(s, "bound", 0, 0);
      cfg.simulate_bound_from_search = false;
    }
    cfg.simulate.batches = positive_int(s, "batches", cfg.simulate.batches, 2);
    cfg.simulate.replications = positive_int(s, "replications", cfg.simulate.replications, 1);
    at_path(s.path(), [&] { cfg.simulate.validate(); });
  }

  if (root.has("verify")) {
    const Node v = root.child("verify");
    v.allow_only({"seed", "small_period", "cutoff_form_cases", "dominance_cases", "monotone_argmax_cases",
                  "oracle_cases", "oracle_cycles", "invariance_cases"});
    if (v.has("seed")) cfg.verify.seed = v.child("seed").unsigned_integer();
    cfg.verify.small_period = positive_int(v, "small_period", cfg.verify.small_period, 2);
    cfg.verify.cutoff_form_cases = positive_int(v, "cutoff_form_cases", cfg.verify.cutoff_form_cases, 1);
    cfg.verify.dominance_cases = positive_int(v, "dominance_cases", cfg.verify.dominance_cases, 1);
    cfg.verify.monotone_argmax_cases = positive_int(v, "monotone_argmax_cases", cfg.verify.monotone_argmax_cases, 1);
    cfg.verify.oracle_cases = positive_int(v, "oracle_cases", cfg.verify.oracle_cases, 1);
    cfg.verify.oracle_cycles = v.integer("oracle_cycles", cfg.verify.oracle_cycles);
    cfg.verify.invariance_cases = positive_int(v, "invariance_cases", cfg.verify.invariance_cases, 1);
  }
  return cfg;
}

ExperimentConfig parse_config_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParameterError(std::string("$: malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot read config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_config_text(buffer.str());
  } catch (const ParameterError& e) {
    throw ParameterError(path.string() + ": " + e.what());
  }
}

namespace {

json fee_value(double f) { return std::isfinite(f) ? json(f) : json("inf"); }

}  // namespace

json to_json(const Scenario& s) {
  json capacity = json::array();
  for (double m : s.capacity.mass()) capacity.push_back(m);
  json out = {{"period_length", s.period_length},
              {"lambda", s.lambda},
              {"capacity_pmf", capacity},
              {"capacity_mean", s.capacity.mean()},
              {"capacity_scv", s.capacity.scv()},
              {"utilization", s.utilization()},
              {"penalty", s.penalty},
              {"choice", {{"regular_price", s.choice.regular_price}, {"u_min", s.choice.u_min}, {"u_max", s.choice.u_max}}},
              {"rejection_threshold", s.rejection_threshold},
              {"bound_step", s.bound_step}};
  if (s.rejection_decimals) out["rejection_decimals"] = *s.rejection_decimals;
  return out;
}

json to_json(const PolicyParams& params) {
  if (const auto* c = std::get_if<ConstantFee>(&params)) return {{"family", "CSP"}, {"fee", c->fee}};
  if (const auto* c = std::get_if<CutoffFee>(&params)) {
    return {{"family", "TSP_CF"}, {"fee", c->fee}, {"cutoff_age", c->cutoff_age}};
  }
  const auto& t = std::get<SimpleTspParams>(params);
  return {{"family", "TSP"},
          {"express_fee", t.express_fee},
          {"lastminute_fee", t.lastminute_fee},
          {"switch_age", t.switch_age},
          {"cutoff_age", t.cutoff_age}};
}

json to_json(const FeeStructure& policy) {
  json fees = json::array();
  for (double f : policy.fees()) fees.push_back(fee_value(f));
  return fees;
}

json to_json(const PerformanceReport& r) {
  return {{"expected_backorders", r.expected_backorders},
          {"expected_backorders_raw", r.expected_backorders_raw},
          {"variable_profit", r.variable_profit},
          {"express_revenue", r.express_revenue},
          {"express_revenue_adjusted", r.express_revenue_adjusted},
          {"fixed_profit", r.fixed_profit},
          {"rejection_probability", r.rejection_probability},
          {"expected_rejected_per_cycle", r.expected_rejected_per_cycle},
          {"mean_delay", r.mean_delay},
          {"per_age_express_rate", r.per_age_express_rate},
          {"bound", r.bound},
          {"utilization", r.utilization},
          {"residual", r.residual},
          {"iterations", r.iterations},
          {"convention", r.convention == IncomeConvention::kAdjusted ? "adjusted" : "raw"}};
}

PerformanceReport report_from_json(const json& doc) {
  const Node n(doc, "$");
  PerformanceReport r;
  r.expected_backorders = n.child("expected_backorders").number();
  r.expected_backorders_raw = n.child("expected_backorders_raw").number();
  r.variable_profit = n.child("variable_profit").number();
  r.express_revenue = n.child("express_revenue").number();
  r.express_revenue_adjusted = n.child("express_revenue_adjusted").number();
  r.fixed_profit = n.child("fixed_profit").number();
  r.rejection_probability = n.child("rejection_probability").number();
  r.expected_rejected_per_cycle = n.child("expected_rejected_per_cycle").number();
  r.mean_delay = n.child("mean_delay").number();
  r.per_age_express_rate = n.child("per_age_express_rate").numbers();
  r.bound = static_cast<int>(n.child("bound").integer());
  r.utilization = n.child("utilization").number();
  r.residual = n.child("residual").number();
  r.iterations = n.child("iterations").integer();
  const std::string convention = n.child("convention").string();
  if (convention != "adjusted" && convention != "raw") bad("$.convention", "expected \"adjusted\" or \"raw\"");
  r.convention = convention == "raw" ? IncomeConvention::kRaw : IncomeConvention::kAdjusted;
  return r;
}

json to_json(const Optimum& o) {
  json by_cutoff = json::array();
  for (const auto& [cutoff, c] : o.best_by_cutoff) {
    by_cutoff.push_back({{"cutoff_age", cutoff},
                         {"params", to_json(c.params)},
                         {"expected_backorders", c.expected_backorders},
                         {"variable_profit", c.variable_profit}});
  }
  return {{"params", to_json(o.params)},
          {"policy", to_json(o.policy)},
          {"report", to_json(o.report)},
          {"evaluations", o.evaluations},
          {"runner_up_gap", o.runner_up_gap},
          {"tie_broken", o.tie_broken},
          {"bound", o.bound},
          {"route_gap", o.route_gap},
          {"best_by_cutoff", by_cutoff}};
}

namespace {

json to_json(const Estimate& e) { return {{"mean", e.mean}, {"halfwidth", e.halfwidth}}; }

}  // namespace

json to_json(const SimResult& r) {
  json ages = json::array();
  for (const Estimate& e : r.per_age_express) ages.push_back(to_json(e));
  return {{"expected_backorders", to_json(r.expected_backorders)},
          {"variable_profit", to_json(r.variable_profit)},
          {"rejection_probability", to_json(r.rejection_probability)},
          {"rejected_per_cycle", to_json(r.rejected_per_cycle)},
          {"per_age_express", ages},
          {"measured_cycles", r.measured_cycles}};
}

json to_json(const SuiteResult& r) {
  return {{"name", r.name},
          {"passed", r.passed()},
          {"cases", r.cases},
          {"failures", r.failures},
          {"worst", r.worst},
          {"messages", r.messages}};
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::ostream& out, std::vector<std::string> header)
    : out_(out), columns_(header.size()) {
  for (const std::string& h : header) cell(h);
  end_row();
}

CsvWriter& CsvWriter::cell(std::string_view text) {
  if (filled_++ > 0) out_ << ',';
  if (text.find_first_of(",\"\n") == std::string_view::npos) {
    out_ << text;
  } else {
    out_ << '"';
    for (char ch : text) {
      if (ch == '"') out_ << '"';
      out_ << ch;
    }
    out_ << '"';
  }
  return *this;
}

CsvWriter& CsvWriter::cell(double value) { return cell(format_double(value)); }
CsvWriter& CsvWriter::cell(int value) { return cell(std::to_string(value)); }
CsvWriter& CsvWriter::cell(long value) { return cell(std::to_string(value)); }
CsvWriter& CsvWriter::empty() { return cell(std::string_view{}); }

void CsvWriter::end_row() {
  if (filled_ != columns_) {
    throw std::logic_error("csv: row has " + std::to_string(filled_) + " cells, header has " +
                           std::to_string(columns_));
  }
  out_ << '\n';
  filled_ = 0;
}

}  // namespace shipfee
