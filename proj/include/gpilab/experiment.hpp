#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "gpilab/harness.hpp"
#include "gpilab/sigma_gen.hpp"

namespace gpilab::cli {

// Invalid or inconsistent configuration; maps to exit code 2 at the tool level.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Distribution block of a config:
//   {"two_alpha": .., "partition": [..],
//    "sigma": {"matrix": [[..]]} |
//             {"generator": "spd|spd-nonneg|signature-nonneg|singular", "p": n, "seed": s} |
//             {"generator": "equicorr", "p": n, "rho": r}}
tw::TraceWishartParams params_from_json(const nlohmann::json& dist);

struct RunOutput {
  std::vector<harness::GapReport> reports;
  nlohmann::json body;  // deterministic report body (no timestamps)
  std::string csv;      // populated when format == "csv" or for sweeps
  int exit_code = 0;
};

// Exit code over a set of verdicts: 0 all holds, 1 any violated,
// 3 inconclusive without violations.
int exit_code_for(const std::vector<harness::GapReport>& reports);

std::string config_fingerprint(const nlohmann::json& config);

// Dispatches the configured checker. Throws ConfigError on malformed input.
RunOutput run_check(const nlohmann::json& config);

// One instance per axis value; the axis must name a numeric config field
// (rho, two_alpha, q1, q2, m, d1). CSV columns:
// axis_value,lhs,rhs,gap,gap_stderr,verdict.
RunOutput run_sweep(const nlohmann::json& config, const std::string& axis,
                    const std::vector<double>& values);

// Randomized covariance search; config carries {"space": {...}, "budget": n}.
nlohmann::json run_hunt(const nlohmann::json& config);

tw::SampleMatrix run_sample(const nlohmann::json& config);

nlohmann::json run_laplace(const nlohmann::json& config);

}  // namespace gpilab::cli
