#include "opeid/opeid.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include <json.hpp>

#include "config_parse.hpp"
#include "csv.hpp"
#include "engine.hpp"
#include "errors.hpp"
#include "run.hpp"

using nlohmann::json;

struct opeid_dataset {
  opeid::LoggedDataset data;
  opeid::MuHat mu;
  bool has_mu = false;
};

struct opeid_result {
  opeid::BoundResult result;
};

namespace {

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void set_err(char** err, const std::string& message) {
  if (err) *err = dup_string(message);
}

template <typename Fn>
int guarded(char** err, Fn fn) {
  try {
    fn();
    return OPEID_OK;
  } catch (const opeid::InfeasibleError& e) {
    set_err(err, std::string(e.what()) + "\nhint: the data admit no Lipschitz constant below " +
                     std::to_string(e.l_lower_bound));
    return OPEID_ERR_INFEASIBLE;
  } catch (const std::exception& e) {
    set_err(err, e.what());
    return OPEID_ERR_INPUT;
  }
}

}  // namespace

extern "C" {

int opeid_dataset_from_arrays(int n, int p, const double* covariates,
                              const double* behavior_prob, const double* eval_prob,
                              const unsigned char* action, const double* outcome,
                              opeid_dataset** out, char** err) {
  return guarded(err, [&] {
    if (n < 1 || p < 1) throw opeid::InvariantError("n and p must be positive");
    if (!covariates || !behavior_prob || !eval_prob || !action || !outcome || !out)
      throw opeid::InvariantError("null pointer argument");
    auto d = std::make_unique<opeid_dataset>();
    d->data.covariates.n = n;
    d->data.covariates.p = p;
    d->data.covariates.values.assign(covariates,
                                     covariates + static_cast<std::size_t>(n) * p);
    d->data.behavior_prob.assign(behavior_prob, behavior_prob + n);
    d->data.eval_prob.assign(eval_prob, eval_prob + n);
    d->data.action_taken.assign(action, action + n);
    d->data.outcome.assign(outcome, outcome + n);
    d->data.validate();
    *out = d.release();
  });
}

int opeid_dataset_load_csv(const char* path, const char* schema_json, opeid_dataset** out,
                           char** err) {
  return guarded(err, [&] {
    if (!path || !schema_json || !out) throw opeid::InvariantError("null pointer argument");
    auto schema = opeid::parse_schema(json::parse(schema_json), "schema");
    auto loaded = opeid::load_dataset(path, schema);
    auto d = std::make_unique<opeid_dataset>();
    d->data = std::move(loaded.data);
    if (loaded.mu) {
      d->mu = std::move(*loaded.mu);
      d->has_mu = true;
    }
    *out = d.release();
  });
}

int opeid_dataset_n(const opeid_dataset* d) { return d ? d->data.n() : 0; }
int opeid_dataset_p(const opeid_dataset* d) { return d ? d->data.covariates.p : 0; }
int opeid_dataset_has_mu(const opeid_dataset* d) { return d && d->has_mu ? 1 : 0; }
void opeid_dataset_free(opeid_dataset* d) { delete d; }

int opeid_evaluate(const opeid_dataset* d, const double* mu, const char* assumptions_json,
                   const char* options_json, opeid_result** out, char** err) {
  return guarded(err, [&] {
    if (!d || !assumptions_json || !out) throw opeid::InvariantError("null pointer argument");
    auto assumptions =
        opeid::parse_assumptions(json::parse(assumptions_json), d->data.n(), "assumptions");
    opeid::EvaluateOptions options;
    if (options_json && *options_json)
      options = opeid::parse_options(json::parse(options_json), "options");

    opeid::MuHat mu_hat;
    if (mu)
      mu_hat.fitted.assign(mu, mu + d->data.n());
    else if (d->has_mu)
      mu_hat = d->mu;
    else
      mu_hat.fitted.assign(d->data.n(), 0.0);  // unread on boundedness-only routes

    auto r = std::make_unique<opeid_result>();
    r->result = opeid::evaluate(d->data, mu_hat, assumptions, options);
    *out = r.release();
  });
}

double opeid_result_lower(const opeid_result* r) { return r->result.lower; }
double opeid_result_upper(const opeid_result* r) { return r->result.upper; }
double opeid_result_psi_id(const opeid_result* r) { return r->result.psi_id.value; }
double opeid_result_l_lower_bound(const opeid_result* r) {
  return r->result.feasibility.max_lipschitz_ratio;
}
const char* opeid_result_method(const opeid_result* r) { return r->result.method_used.c_str(); }

char* opeid_result_to_json(const opeid_result* r) {
  return dup_string(opeid::bound_result_json(r->result).dump(2));
}

void opeid_result_free(opeid_result* r) { delete r; }

int opeid_run(const char* config_path, const char* overrides_json, char** err) {
  if (!config_path) {
    set_err(err, "null config path");
    return OPEID_ERR_INPUT;
  }
  std::string message;
  int status = opeid::run_config(config_path, overrides_json ? overrides_json : "", &message);
  if (status != opeid::kRunOk) set_err(err, message);
  return status;
}

void opeid_string_free(char* s) { std::free(s); }

const char* opeid_version(void) { return opeid::kVersion; }

}  // extern "C"
