#include "run.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "config_parse.hpp"
#include "csv.hpp"
#include "engine.hpp"
#include "errors.hpp"
#include "harness/convert.hpp"
#include "harness/coverage.hpp"
#include "harness/fitters.hpp"
#include "harness/policy_study.hpp"
#include "harness/rate_study.hpp"
#include "harness/synthetic.hpp"

namespace opeid {

namespace {

using nlohmann::json;

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path.string());
  out << content;
}

std::string csv_num(double v) { return format_double(v); }

// ---- command implementations, each returns the results.json payload and
// ---- writes its CSV table(s).

json cmd_bounds(const json& cfg, const std::filesystem::path& out_dir) {
  check_keys(cfg, {"command", "seed", "out_dir", "dataset", "assumptions", "options"}, "config");
  auto ds = parse_dataset(cfg.at("dataset"), "config.dataset");
  auto assumptions = parse_assumptions(cfg.at("assumptions"), ds.data.n(), "config.assumptions");
  auto options = parse_options(cfg.value("options", json()), "config.options");
  const bool needs_mu = (assumptions.has_lipschitz() && !assumptions.lipschitz_is_sentinel()) ||
                        assumptions.has_monotone();
  if (needs_mu && !ds.has_mu)
    throw ParseError("config.dataset: smoothness or monotonicity assumptions need a mu_hat "
                     "column or a fit block");
  if (!ds.has_mu) ds.mu.fitted.assign(ds.data.n(), 0.0);

  auto result = evaluate(ds.data, ds.mu, assumptions, options);

  std::ostringstream csv;
  csv << "row,pe,per_point_lower,per_point_upper,arg_lower,arg_upper\n";
  for (std::size_t k = 0; k < result.psi2.rows.size(); ++k) {
    int i = result.psi2.rows[k];
    csv << i << "," << csv_num(ds.data.eval_prob[i]) << ","
        << csv_num(result.psi2.per_point_lower[k]) << ","
        << csv_num(result.psi2.per_point_upper[k]) << "," << result.psi2.arg_lower[k] << ","
        << result.psi2.arg_upper[k] << "\n";
  }
  write_file(out_dir / "per_point.csv", csv.str());

  json payload = bound_result_json(result);
  payload["command"] = "bounds";
  return payload;
}

json cmd_sweep(const json& cfg, const std::filesystem::path& out_dir) {
  check_keys(cfg, {"command", "seed", "out_dir", "dataset", "assumptions", "options", "L_grid"},
             "config");
  auto ds = parse_dataset(cfg.at("dataset"), "config.dataset");
  auto assumptions = parse_assumptions(cfg.at("assumptions"), ds.data.n(), "config.assumptions");
  auto options = parse_options(cfg.value("options", json()), "config.options");
  if (!cfg.contains("L_grid") || !cfg["L_grid"].is_array())
    throw ParseError("config.L_grid: expected an array");
  std::vector<double> grid;
  for (const auto& v : cfg["L_grid"]) grid.push_back(parse_L(v, "config.L_grid"));
  if (!ds.has_mu)
    throw ParseError("config.dataset: a sweep needs a mu_hat column or a fit block");

  auto sweep = sweep_L(ds.data, ds.mu, assumptions, grid, options);

  std::ostringstream csv;
  csv << "L,feasible,lower,upper,width,l_lower_bound,reason\n";
  json cells = json::array();
  for (const auto& cell : sweep.cells) {
    json c{{"L", cell.L},
           {"feasible", cell.feasible},
           {"l_lower_bound", cell.l_lower_bound},
           {"reason", cell.infeasible_reason}};
    csv << csv_num(cell.L) << "," << (cell.feasible ? 1 : 0) << ",";
    if (cell.result) {
      c["lower"] = finite_or_null(cell.result->lower);
      c["upper"] = finite_or_null(cell.result->upper);
      c["method_used"] = cell.result->method_used;
      csv << csv_num(cell.result->lower) << "," << csv_num(cell.result->upper) << ","
          << csv_num(cell.result->upper - cell.result->lower);
    } else {
      c["lower"] = nullptr;
      c["upper"] = nullptr;
      csv << ",,";
    }
    csv << "," << csv_num(cell.l_lower_bound) << ",\"" << cell.infeasible_reason << "\"\n";
    cells.push_back(std::move(c));
  }
  write_file(out_dir / "sweep.csv", csv.str());
  return json{{"command", "sweep"}, {"cells", cells}};
}

json cmd_multi(const json& cfg, const std::filesystem::path& out_dir) {
  check_keys(cfg, {"command", "seed", "out_dir", "datasets", "assumptions", "options"},
             "config");
  if (!cfg.contains("datasets") || !cfg["datasets"].is_array() || cfg["datasets"].empty())
    throw ParseError("config.datasets: expected a nonempty array");
  std::vector<LoggedDataset> datasets;
  std::vector<MuHat> mus;
  for (std::size_t a = 0; a < cfg["datasets"].size(); ++a) {
    auto ds = parse_dataset(cfg["datasets"][a], "config.datasets[" + std::to_string(a) + "]");
    if (!ds.has_mu) ds.mu.fitted.assign(ds.data.n(), 0.0);
    datasets.push_back(std::move(ds.data));
    mus.push_back(std::move(ds.mu));
  }
  std::vector<AssumptionSet> assumptions;
  for (const auto& d : datasets)
    assumptions.push_back(parse_assumptions(cfg.at("assumptions"), d.n(), "config.assumptions"));
  auto options = parse_options(cfg.value("options", json()), "config.options");

  auto result = evaluate_multi_action(datasets, mus, assumptions, options);

  std::ostringstream csv;
  csv << "action,psi_id,lower,upper,method,fraction_no_overlap\n";
  json per_action = json::array();
  for (std::size_t a = 0; a < result.per_action.size(); ++a) {
    const auto& r = result.per_action[a];
    per_action.push_back(bound_result_json(r));
    csv << a << "," << csv_num(r.psi_id.value) << "," << csv_num(r.lower) << ","
        << csv_num(r.upper) << "," << r.method_used << "," << csv_num(r.fraction_no_overlap)
        << "\n";
  }
  write_file(out_dir / "per_action.csv", csv.str());
  return json{{"command", "multi"},
              {"lower", finite_or_null(result.lower)},
              {"upper", finite_or_null(result.upper)},
              {"per_action", per_action}};
}

json cmd_coverage(const json& cfg, const std::filesystem::path& out_dir, std::uint64_t seed) {
  check_keys(cfg, {"command", "seed", "out_dir", "coverage"}, "config");
  const auto& c = cfg.at("coverage");
  check_keys(c, {"spec", "n_grid", "L_grid", "replications", "eps", "bounds"},
             "config.coverage");
  auto spec = parse_spec(c.at("spec"), "config.coverage.spec");
  auto n_grid = c.at("n_grid").get<std::vector<int>>();
  std::vector<double> L_grid;
  for (const auto& v : c.at("L_grid")) L_grid.push_back(parse_L(v, "config.coverage.L_grid"));
  int reps = c.value("replications", 200);
  double eps = c.value("eps", 0.01);
  auto bounds = parse_box(c.value("bounds", json()), "config.coverage.bounds");

  auto report = simulate_coverage(spec, n_grid, L_grid, reps, eps, bounds, seed);

  std::ostringstream csv;
  csv << "n,L,coverage,feasibility,replications\n";
  json cells = json::array();
  for (const auto& cell : report.cells) {
    csv << cell.n << "," << csv_num(cell.L) << "," << csv_num(cell.coverage) << ","
        << csv_num(cell.feasibility) << "," << cell.replications << "\n";
    cells.push_back(json{{"n", cell.n},
                         {"L", cell.L},
                         {"coverage", cell.coverage},
                         {"feasibility", cell.feasibility},
                         {"replications", cell.replications}});
  }
  write_file(out_dir / "coverage.csv", csv.str());
  return json{{"command", "coverage"},
              {"psi_true", report.psi_true},
              {"eps", report.eps},
              {"cells", cells}};
}

json cmd_policy_study(const json& cfg, const std::filesystem::path& out_dir,
                      std::uint64_t seed) {
  check_keys(cfg, {"command", "seed", "out_dir", "policy_study"}, "config");
  const auto& c = cfg.at("policy_study");
  check_keys(c, {"n", "T_grid", "L_grid", "n_actions", "b0", "b1", "b2"},
             "config.policy_study");
  ThresholdPolicySpec spec;
  spec.n_actions = c.value("n_actions", spec.n_actions);
  spec.b0 = c.value("b0", spec.b0);
  spec.b1 = c.value("b1", spec.b1);
  spec.b2 = c.value("b2", spec.b2);
  int n = c.value("n", 2000);
  auto T_grid = c.at("T_grid").get<std::vector<double>>();
  std::vector<double> L_grid;
  for (const auto& v : c.at("L_grid")) L_grid.push_back(parse_L(v, "config.policy_study.L_grid"));

  auto report = threshold_policy_study(spec, n, T_grid, L_grid, seed);

  std::ostringstream csv;
  csv << "T,L,lower,upper,width,manski_lower,manski_upper,manski_width,narrowing,imputation,"
         "oracle,psi_id,feasible\n";
  json rows = json::array();
  for (const auto& r : report.rows) {
    csv << csv_num(r.T) << "," << csv_num(r.L) << "," << csv_num(r.lower) << ","
        << csv_num(r.upper) << "," << csv_num(r.width) << "," << csv_num(r.manski_lower) << ","
        << csv_num(r.manski_upper) << "," << csv_num(r.manski_width) << ","
        << csv_num(r.narrowing) << "," << csv_num(r.imputation) << "," << csv_num(r.oracle)
        << "," << csv_num(r.psi_id) << "," << (r.feasible ? 1 : 0) << "\n";
    rows.push_back(json{{"T", r.T},
                        {"L", r.L},
                        {"lower", r.lower},
                        {"upper", r.upper},
                        {"width", r.width},
                        {"manski_width", r.manski_width},
                        {"narrowing", r.narrowing},
                        {"imputation", r.imputation},
                        {"oracle", r.oracle},
                        {"psi_id", r.psi_id},
                        {"feasible", r.feasible}});
  }
  write_file(out_dir / "policy_study.csv", csv.str());
  return json{{"command", "policy-study"}, {"rows", rows}};
}

json cmd_rate_study(const json& cfg, const std::filesystem::path& out_dir, std::uint64_t seed) {
  check_keys(cfg, {"command", "seed", "out_dir", "rate_study"}, "config");
  const auto& c = cfg.at("rate_study");
  check_keys(c, {"spec", "n_grid", "replications", "L", "bounds", "oracle_mu"},
             "config.rate_study");
  auto spec = parse_spec(c.at("spec"), "config.rate_study.spec");
  auto n_grid = c.at("n_grid").get<std::vector<int>>();
  int reps = c.value("replications", 200);
  double L = c.contains("L") ? parse_L(c["L"], "config.rate_study.L") : 1.0;
  auto bounds = parse_box(c.value("bounds", json()), "config.rate_study.bounds");
  bool oracle_mu = c.value("oracle_mu", false);

  auto report = rate_study(spec, n_grid, reps, L, bounds, oracle_mu, seed);

  std::ostringstream csv;
  csv << "n,mse\n";
  json rows = json::array();
  for (const auto& row : report.rows) {
    csv << row.n << "," << csv_num(row.mse) << "\n";
    rows.push_back(json{{"n", row.n}, {"mse", row.mse}});
  }
  write_file(out_dir / "rate.csv", csv.str());
  return json{{"command", "rate-study"},
              {"rows", rows},
              {"slope", report.slope},
              {"population_psi2_lower", report.population_psi2_lower},
              {"replications", report.replications}};
}

}  // namespace

int run_config(const std::string& config_path, const std::string& overrides_json,
               std::string* error) {
  auto started = std::chrono::steady_clock::now();
  try {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw ParseError("cannot open config " + config_path);
    json cfg = json::parse(in, nullptr, true, /*ignore_comments=*/false);

    if (!overrides_json.empty()) {
      json ov = json::parse(overrides_json);
      check_keys(ov, {"command", "L", "seed", "out_dir"}, "overrides");
      if (ov.contains("command")) {
        if (cfg.contains("command") && cfg["command"] != ov["command"])
          throw ParseError("config.command \"" + cfg["command"].get<std::string>() +
                           "\" does not match the requested command");
        cfg["command"] = ov["command"];
      }
      if (ov.contains("seed")) cfg["seed"] = ov["seed"];
      if (ov.contains("out_dir")) cfg["out_dir"] = ov["out_dir"];
      if (ov.contains("L")) {
        if (cfg.contains("assumptions") && cfg["assumptions"].contains("lipschitz"))
          cfg["assumptions"]["lipschitz"]["L"] = ov["L"];
        else if (cfg.contains("rate_study"))
          cfg["rate_study"]["L"] = ov["L"];
        else
          throw ParseError("overrides.L: config has no Lipschitz block to override");
      }
    }

    if (!cfg.contains("command")) throw ParseError("config: missing key \"command\"");
    std::string command = cfg["command"].get<std::string>();
    std::uint64_t seed = cfg.value("seed", 0ULL);
    std::filesystem::path out_dir = cfg.value("out_dir", std::string("."));
    std::filesystem::create_directories(out_dir);

    json payload;
    if (command == "bounds")
      payload = cmd_bounds(cfg, out_dir);
    else if (command == "sweep")
      payload = cmd_sweep(cfg, out_dir);
    else if (command == "multi")
      payload = cmd_multi(cfg, out_dir);
    else if (command == "coverage")
      payload = cmd_coverage(cfg, out_dir, seed);
    else if (command == "policy-study")
      payload = cmd_policy_study(cfg, out_dir, seed);
    else if (command == "rate-study")
      payload = cmd_rate_study(cfg, out_dir, seed);
    else
      throw ParseError("config.command: unknown command \"" + command + "\"");

    payload["schema_version"] = 1;
    payload["seed"] = seed;
    write_file(out_dir / "results.json", payload.dump(2) + "\n");

    auto wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - started)
                       .count();
    json manifest{{"version", kVersion},
                  {"config", cfg},
                  {"wall_time_ms", wall_ms},
                  {"written_unix_s",
                   std::chrono::duration_cast<std::chrono::seconds>(
                       std::chrono::system_clock::now().time_since_epoch())
                       .count()}};
    write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
    return kRunOk;
  } catch (const InfeasibleError& e) {
    if (error)
      *error = std::string(e.what()) +
               "\nhint: the data admit no Lipschitz constant below " +
               std::to_string(e.l_lower_bound);
    return kRunInfeasible;
  } catch (const std::exception& e) {
    if (error) *error = e.what();
    return kRunInputError;
  }
}

}  // namespace opeid
