#pragma once

#include <string>

#include <json.hpp>

#include "csv.hpp"
#include "dataset.hpp"
#include "engine.hpp"
#include "harness/synthetic.hpp"

// JSON config fragments shared by the run layer and the C API. Every parser
// rejects unknown keys, naming the offending key and its location.
namespace opeid {

void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                const std::string& where);
double get_number(const nlohmann::json& j, const char* key, const std::string& where);
// L entries may be the string "inf" for the no-smoothness sentinel.
double parse_L(const nlohmann::json& j, const std::string& where);
DatasetSchema parse_schema(const nlohmann::json& j, const std::string& where);
Metric parse_metric(const nlohmann::json& j, int n, const std::string& where);
PartialOrder parse_order(const nlohmann::json& j, const std::string& where);
AssumptionSet parse_assumptions(const nlohmann::json& j, int n, const std::string& where);
EvaluateOptions parse_options(const nlohmann::json& j, const std::string& where);
SyntheticSpec parse_spec(const nlohmann::json& j, const std::string& where);
OutcomeBounds parse_box(const nlohmann::json& j, const std::string& where);

struct ResolvedDataset {
  LoggedDataset data;
  MuHat mu;  // fitted or loaded; zero-filled when absent
  bool has_mu = false;
};
ResolvedDataset parse_dataset(const nlohmann::json& j, const std::string& where);

nlohmann::json finite_or_null(double v);
nlohmann::json bound_result_json(const BoundResult& r);

}  // namespace opeid
