#pragma once

#include <string>

namespace opeid {

inline constexpr const char* kVersion = "1.0.0";

// Exit statuses shared by the C API and the CLI.
inline constexpr int kRunOk = 0;
inline constexpr int kRunInputError = 1;
inline constexpr int kRunInfeasible = 2;

// Executes a JSON run configuration and writes results.json, per-study CSV
// tables, and manifest.json into the output directory. The config schema is
// validated before any compute; unknown keys are rejected.
//
// overrides_json may carry {"L": number, "seed": integer, "out_dir": string}
// to replace the corresponding config fields.
//
// Returns kRunOk, kRunInputError or kRunInfeasible; on a nonzero status the
// diagnostic is appended to *error (when non-null). Result payloads carry no
// timestamps, so identical config and seed give byte-identical result files;
// wall time lives in the manifest only.
int run_config(const std::string& config_path, const std::string& overrides_json,
               std::string* error);

}  // namespace opeid
