#include "config_parse.hpp"

#include "errors.hpp"
#include "harness/fitters.hpp"

namespace opeid {

using nlohmann::json;

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  if (!j.is_object()) throw ParseError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) ok = true;
    if (!ok) throw ParseError(where + ": unknown key \"" + it.key() + "\"");
  }
}

double get_number(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ParseError(where + ": missing key \"" + key + "\"");
  if (!j[key].is_number()) throw ParseError(where + "." + key + ": expected a number");
  return j[key].get<double>();
}

// L entries may be the string "inf" for the no-smoothness sentinel.
double parse_L(const json& j, const std::string& where) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return kLipschitzInfinity;
    throw ParseError(where + ": expected a number or \"inf\"");
  }
  if (!j.is_number()) throw ParseError(where + ": expected a number or \"inf\"");
  return j.get<double>();
}

DatasetSchema parse_schema(const json& j, const std::string& where) {
  check_keys(j, {"covariates", "behavior_prob", "eval_prob", "action", "outcome", "mu_hat"},
             where);
  DatasetSchema s;
  if (!j.contains("covariates") || !j["covariates"].is_array())
    throw ParseError(where + ".covariates: expected an array of column names");
  for (const auto& c : j["covariates"]) s.covariates.push_back(c.get<std::string>());
  s.behavior_prob = j.at("behavior_prob").get<std::string>();
  s.eval_prob = j.at("eval_prob").get<std::string>();
  s.action = j.at("action").get<std::string>();
  s.outcome = j.at("outcome").get<std::string>();
  if (j.contains("mu_hat")) s.mu_hat = j["mu_hat"].get<std::string>();
  return s;
}

ResolvedDataset parse_dataset(const json& j, const std::string& where) {
  check_keys(j, {"path", "schema", "fit"}, where);
  if (!j.contains("path")) throw ParseError(where + ": missing key \"path\"");
  if (!j.contains("schema")) throw ParseError(where + ": missing key \"schema\"");
  auto loaded = load_dataset(j["path"].get<std::string>(), parse_schema(j["schema"], where + ".schema"));

  ResolvedDataset out;
  out.data = std::move(loaded.data);
  if (loaded.mu) {
    out.mu = std::move(*loaded.mu);
    out.has_mu = true;
  }
  if (j.contains("fit")) {
    const auto& f = j["fit"];
    check_keys(f, {"kind", "penalty", "k"}, where + ".fit");
    std::vector<int> train;
    for (int i = 0; i < out.data.n(); ++i)
      if (out.data.action_taken[i]) train.push_back(i);
    std::string kind = f.at("kind").get<std::string>();
    if (kind == "ridge")
      out.mu = ridge_fit(out.data.covariates, out.data.outcome, train,
                         f.value("penalty", 1.0));
    else if (kind == "knn")
      out.mu = knn_fit(out.data.covariates, out.data.outcome, train, f.value("k", 5));
    else
      throw ParseError(where + ".fit.kind: expected \"ridge\" or \"knn\"");
    out.has_mu = true;
  }
  return out;
}

Metric parse_metric(const json& j, int n, const std::string& where) {
  check_keys(j, {"kind", "weights", "path"}, where);
  std::string kind = j.value("kind", "euclidean");
  if (kind == "euclidean") return Metric::euclidean();
  if (kind == "weighted_euclidean") {
    if (!j.contains("weights")) throw ParseError(where + ": weighted metric needs weights");
    return Metric::weighted_euclidean(j["weights"].get<std::vector<double>>());
  }
  if (kind == "hamming") return Metric::hamming();
  if (kind == "precomputed") {
    if (!j.contains("path")) throw ParseError(where + ": precomputed metric needs a path");
    return load_precomputed_metric(j["path"].get<std::string>(), n);
  }
  throw ParseError(where + ".kind: unknown metric kind \"" + kind + "\"");
}

PartialOrder parse_order(const json& j, const std::string& where) {
  check_keys(j, {"kind", "coordinate", "pairs"}, where);
  std::string kind = j.value("kind", "coordinatewise");
  if (kind == "coordinatewise") return PartialOrder::coordinatewise();
  if (kind == "single_coordinate")
    return PartialOrder::single_coordinate(j.value("coordinate", 0));
  if (kind == "explicit") {
    std::vector<std::pair<int, int>> pairs;
    for (const auto& p : j.at("pairs"))
      pairs.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
    return PartialOrder::explicit_pairs(std::move(pairs));
  }
  throw ParseError(where + ".kind: unknown order kind \"" + kind + "\"");
}

AssumptionSet parse_assumptions(const json& j, int n, const std::string& where) {
  check_keys(j, {"bounds", "lipschitz", "monotone"}, where);
  AssumptionSet a;
  if (j.contains("bounds")) {
    check_keys(j["bounds"], {"lower", "upper"}, where + ".bounds");
    a.bounds = OutcomeBounds{get_number(j["bounds"], "lower", where + ".bounds"),
                             get_number(j["bounds"], "upper", where + ".bounds")};
  }
  if (j.contains("lipschitz")) {
    const auto& l = j["lipschitz"];
    check_keys(l, {"L", "metric"}, where + ".lipschitz");
    LipschitzAssumption lip;
    lip.L = l.contains("L") ? parse_L(l["L"], where + ".lipschitz.L") : kLipschitzInfinity;
    lip.metric = l.contains("metric") ? parse_metric(l["metric"], n, where + ".lipschitz.metric")
                                      : Metric::euclidean();
    a.lipschitz = std::move(lip);
  }
  if (j.contains("monotone")) a.monotone = parse_order(j["monotone"], where + ".monotone");
  return a;
}

EvaluateOptions parse_options(const json& j, const std::string& where) {
  EvaluateOptions o;
  if (j.is_null()) return o;
  check_keys(j, {"estimator", "mode", "clamp_mu", "full_triangle_check"}, where);
  std::string est = j.value("estimator", "self-normalized");
  if (est == "ipw")
    o.estimator = EstimatorKind::Ipw;
  else if (est == "self-normalized")
    o.estimator = EstimatorKind::SelfNormalized;
  else
    throw ParseError(where + ".estimator: expected \"ipw\" or \"self-normalized\"");
  std::string mode = j.value("mode", "exact");
  if (mode == "conservative")
    o.conservative = true;
  else if (mode != "exact")
    throw ParseError(where + ".mode: expected \"exact\" or \"conservative\"");
  o.clamp_mu = j.value("clamp_mu", false);
  o.full_triangle_check = j.value("full_triangle_check", false);
  return o;
}

SyntheticSpec parse_spec(const json& j, const std::string& where) {
  check_keys(j,
             {"family", "a0", "a1", "freq", "amp", "true_L", "noise_sd", "bernoulli", "eval_p",
              "behavior_p", "carve_threshold"},
             where);
  SyntheticSpec s;
  std::string family = j.value("family", "linear");
  if (family == "linear")
    s.family = MuFamily::Linear;
  else if (family == "sinusoid")
    s.family = MuFamily::Sinusoid;
  else if (family == "piecewise")
    s.family = MuFamily::Piecewise;
  else
    throw ParseError(where + ".family: unknown family \"" + family + "\"");
  s.a0 = j.value("a0", s.a0);
  s.a1 = j.value("a1", s.a1);
  s.freq = j.value("freq", s.freq);
  s.amp = j.value("amp", s.amp);
  s.true_L = j.value("true_L", s.true_L);
  s.noise_sd = j.value("noise_sd", s.noise_sd);
  s.bernoulli = j.value("bernoulli", s.bernoulli);
  s.eval_p = j.value("eval_p", s.eval_p);
  s.behavior_p = j.value("behavior_p", s.behavior_p);
  s.carve_threshold = j.value("carve_threshold", s.carve_threshold);
  return s;
}

OutcomeBounds parse_box(const json& j, const std::string& where) {
  if (j.is_null()) return {0.0, 1.0};
  check_keys(j, {"lower", "upper"}, where);
  return {get_number(j, "lower", where), get_number(j, "upper", where)};
}

json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

json bound_result_json(const BoundResult& r) {
  json f{{"feasible", r.feasibility.feasible},
         {"max_lipschitz_ratio", r.feasibility.max_lipschitz_ratio},
         {"has_ratio", r.feasibility.has_ratio},
         {"violation", r.feasibility.violation}};
  return json{{"psi_id", r.psi_id.value},
              {"psi_id_degenerate", r.psi_id.degenerate},
              {"n_overlap", r.psi_id.n_overlap},
              {"psi2_lower", finite_or_null(r.psi2.lower)},
              {"psi2_upper", finite_or_null(r.psi2.upper)},
              {"lower", finite_or_null(r.lower)},
              {"upper", finite_or_null(r.upper)},
              {"method_used", r.method_used},
              {"feasibility", f},
              {"fraction_no_overlap", r.fraction_no_overlap},
              {"empty_overlap", r.empty_overlap},
              {"per_point_lower_variance", finite_or_null(r.per_point_lower_variance)}};
}

}  // namespace opeid
