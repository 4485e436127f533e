#pragma once

#include "lqrlag/spatial_averaging.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace lqrlag {

enum class ScenarioMode { Stationary, SpatialAveraging };

struct StationarySpec {
  Mat A, B, F1, F2, F3;
  double lp_step = 0.0;     // 0: automatic
  double lp_horizon = 0.0;  // 0: automatic
  int coercivity_samples = 6;
};

struct DriverSpec {
  DriverKind kind = DriverKind::Periodic;
  double c0 = 0.0;
  std::vector<double> amplitudes, frequencies;
};

struct SASpec {
  SpectralModel model;
  double Lambda = 0.0, delta = 0.0;
  bool search = false;  // "N": "search"
  int k = 0, N = 0;
  ConditionSet condition_set = ConditionSet::Bundle;
  DriverSpec driver;
  double a_bound = -1.0;  // < 0: sup |a| of the driver
  double horizon = 0.0;   // 0: automatic
  int phases = 16;
  std::optional<TauChoice> taus;
};

struct Tolerances {
  double base = 1e-8;    // isotropy, Riccati residual
  double oracle = 1e-6;  // distance to the Schur oracle
};

struct Scenario {
  std::string name;
  ScenarioMode mode = ScenarioMode::Stationary;
  std::optional<StationarySpec> stationary;
  std::optional<SASpec> sa;
  Tolerances tol;
  nlohmann::json echo;  // the validated scenario with defaults filled in
};

/// Throws ParseError, MissingField, DimensionMismatch (and NotSymmetric for the forms).
Scenario load_scenario(const std::filesystem::path& path);
Scenario scenario_from_json(const nlohmann::json& j);

/// Row-major nested arrays; a bare number is a 1 x 1 matrix.
Mat matrix_from_json(const nlohmann::json& j, const std::string& field);
nlohmann::json matrix_to_json(const Mat& m);

}  // namespace lqrlag
