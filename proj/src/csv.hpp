#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dataset.hpp"

namespace opeid {

// Column-name-to-role mapping for dataset ingestion. Every role except
// mu_hat is required. Covariate column order defines covariate order.
struct DatasetSchema {
  std::vector<std::string> covariates;
  std::string behavior_prob;
  std::string eval_prob;
  std::string action;
  std::string outcome;
  std::optional<std::string> mu_hat;
};

struct LoadedDataset {
  LoggedDataset data;
  std::optional<MuHat> mu;  // present when the schema names a mu_hat column
};

// Parses a headered CSV and validates the result. Missing outcomes are
// encoded as empty fields and are only legal on rows with action=0.
LoadedDataset load_dataset(const std::string& path, const DatasetSchema& schema);

// Writes a dataset back out with canonical column names (x1..xp, pb, pe, a, y
// and optionally mu). Finite values round-trip bit-exactly.
void save_dataset(const std::string& path, const LoggedDataset& data,
                  const MuHat* mu = nullptr);

// Default schema matching save_dataset output.
DatasetSchema canonical_schema(int p, bool with_mu);

// n x n distance matrix from a headerless CSV.
Metric load_precomputed_metric(const std::string& path, int n);

// Low-level cell grid (used by the multiclass converter for feature files).
std::vector<std::vector<std::string>> read_csv(const std::string& path);

// Shortest round-trippable representation of a double.
std::string format_double(double v);

}  // namespace opeid
