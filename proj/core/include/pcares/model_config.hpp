#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pcares/csv.hpp"
#include "pcares/regression.hpp"
#include "pcares/robust_cov.hpp"
#include "pcares/simulation.hpp"

namespace pcares {

struct ModelTerm {
  std::string column;
  int power = 1;

  std::string label() const;
  bool operator==(const ModelTerm&) const = default;
};

/// Which response, which covariate terms, which Omega estimators.
struct ModelConfig {
  std::string response;
  std::vector<ModelTerm> terms;
  bool intercept = true;
  std::vector<CovKind> estimators{CovKind::Homo};

  /// Throws InvalidArgument when an invariant is broken.
  void validate() const;

  /// Canonical JSON text; identical configs give identical text.
  std::string canonical_json() const;

  /// 64-bit FNV-1a of canonical_json(), as 16 hex digits.
  std::string hash() const;
};

/// JSON config:
///   {"response": "csat",
///    "terms": ["percent", "high", {"column": "percent", "power": 2}],
///    "intercept": true,
///    "estimators": ["homo", "hc0", "hc3"]}
/// Only "response" is required. "estimators" may also be a string such as
/// "homo,hc0..hc4".
ModelConfig parse_model_config(std::string_view json_text);
ModelConfig load_model_config(const std::filesystem::path& path);

/// Columns in order: intercept (if any), then terms with powers applied.
/// Throws MissingColumn and ConstantColumn.
std::pair<DesignMatrix, Vector> build_design(const Table& table, const ModelConfig& config);

std::uint64_t fnv1a64(std::string_view bytes);

/// Simulation scenario file (JSON, same conventions as model configs):
///   {"n": 200, "p": 3, "beta": [1, 2, 0], "seed": 7,
///    "variance": {"kind": "const", "sigma2": 1}
///              | {"kind": "exp_linear", "gamma": [0.5, 0]}
///              | {"kind": "step", "sigma2_a": 1, "sigma2_b": 9, "split": 0.5},
///    "design": {"kind": "iid_normal"} | {"kind": "with_leverage", "outliers": 2, "magnitude": 6},
///    "edf_grid": [0.25, 0.5, 0.75], "replications": 20000}
/// edf_grid/replications request the EDF covariance Monte Carlo.
struct ScenarioFile {
  SimScenario scenario;
  std::vector<double> edf_grid;
  std::size_t replications = 0;
};

ScenarioFile parse_scenario(std::string_view json_text);
ScenarioFile load_scenario(const std::filesystem::path& path);

}  // namespace pcares
