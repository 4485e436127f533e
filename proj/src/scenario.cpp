#include "lqrlag/scenario.hpp"

#include "lqrlag/errors.hpp"
#include "lqrlag/frequency.hpp"

#include <fstream>
#include <sstream>

namespace lqrlag {

namespace {

using nlohmann::json;

const json& require(const json& j, const std::string& field) {
  if (!j.is_object() || !j.contains(field)) throw Error(ErrorCode::MissingField, "missing field '" + field + "'");
  return j.at(field);
}

double number_field(const json& j, const std::string& field) {
  const json& x = require(j, field);
  if (!x.is_number()) throw Error(ErrorCode::ParseError, "field '" + field + "' must be a number");
  return x.get<double>();
}

template <class T>
T optional_field(const json& j, const std::string& field, T fallback) {
  if (!j.contains(field) || j.at(field).is_null()) return fallback;
  try {
    return j.at(field).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, "field '" + field + "': " + e.what());
  }
}

std::vector<double> number_list(const json& j, const std::string& field) {
  if (!j.contains(field)) return {};
  const json& x = j.at(field);
  if (x.is_number()) return {x.get<double>()};
  if (!x.is_array()) throw Error(ErrorCode::ParseError, "field '" + field + "' must be a list of numbers");
  std::vector<double> out;
  for (const json& e : x) {
    if (!e.is_number()) throw Error(ErrorCode::ParseError, "field '" + field + "' must be a list of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

StationarySpec parse_stationary(const json& j) {
  StationarySpec s;
  s.A = matrix_from_json(require(j, "A"), "A");
  s.B = matrix_from_json(require(j, "B"), "B");
  s.F1 = matrix_from_json(require(j, "F1"), "F1");
  s.F3 = matrix_from_json(require(j, "F3"), "F3");
  const int n = static_cast<int>(s.A.rows()), m = static_cast<int>(s.B.cols());
  s.F2 = j.contains("F2") ? matrix_from_json(j.at("F2"), "F2") : Mat::Zero(m, n);
  if (s.A.rows() != s.A.cols()) throw Error(ErrorCode::DimensionMismatch, "A must be square");
  if (s.B.rows() != n) throw Error(ErrorCode::DimensionMismatch, "B must have n rows");
  if (s.F1.rows() != n || s.F1.cols() != n) throw Error(ErrorCode::DimensionMismatch, "F1 must be n x n");
  if (s.F2.rows() != m || s.F2.cols() != n) throw Error(ErrorCode::DimensionMismatch, "F2 must be m x n");
  if (s.F3.rows() != m || s.F3.cols() != m) throw Error(ErrorCode::DimensionMismatch, "F3 must be m x m");
  make_form(s.F1, s.F2, s.F3);  // symmetry and definiteness
  if (j.contains("lp")) {
    s.lp_step = optional_field(j.at("lp"), "h", 0.0);
    s.lp_horizon = optional_field(j.at("lp"), "horizon", 0.0);
  }
  s.coercivity_samples = optional_field(j, "coercivity_samples", 6);
  return s;
}

SASpec parse_sa(const json& j) {
  SASpec s;
  s.model = spectral_model_from_json(require(j, "eigenvalues"));
  s.Lambda = number_field(j, "Lambda");
  s.delta = number_field(j, "delta");
  const json& N = require(j, "N");
  if (N.is_string()) {
    if (N.get<std::string>() != "search") throw Error(ErrorCode::ParseError, "N must be an integer or \"search\"");
    s.search = true;
  } else if (N.is_number_integer()) {
    s.N = N.get<int>();
    s.k = static_cast<int>(number_field(j, "k"));
  } else {
    throw Error(ErrorCode::ParseError, "N must be an integer or \"search\"");
  }
  s.condition_set = condition_set_from_string(optional_field<std::string>(j, "condition_set", "bundle"));
  const json& d = require(j, "driver");
  const std::string kind = optional_field<std::string>(d, "kind", "periodic");
  if (kind == "periodic")
    s.driver.kind = DriverKind::Periodic;
  else if (kind == "quasiperiodic")
    s.driver.kind = DriverKind::Quasiperiodic;
  else
    throw Error(ErrorCode::ParseError, "driver kind must be periodic or quasiperiodic");
  s.driver.c0 = optional_field(d, "c0", 0.0);
  s.driver.amplitudes = number_list(d, "amplitudes");
  s.driver.frequencies = number_list(d, "frequencies");
  if (s.driver.amplitudes.size() != s.driver.frequencies.size())
    throw Error(ErrorCode::DimensionMismatch, "driver amplitudes and frequencies differ in length");
  s.a_bound = optional_field(j, "a_bound", -1.0);
  s.horizon = optional_field(j, "horizon", 0.0);
  s.phases = optional_field(j, "phases", 16);
  if (s.phases < 1) throw Error(ErrorCode::InvalidConfig, "phases must be positive");
  if (j.contains("taus")) {
    const std::vector<double> t = number_list(j, "taus");
    if (t.size() != 3) throw Error(ErrorCode::DimensionMismatch, "taus has three entries");
    s.taus = TauChoice{t[0], t[1], t[2]};
  }
  return s;
}

}  // namespace

Mat matrix_from_json(const json& j, const std::string& field) {
  if (j.is_number()) return Mat::Constant(1, 1, j.get<double>());
  if (!j.is_array() || j.empty()) throw Error(ErrorCode::ParseError, "'" + field + "' must be a nested array");
  const size_t rows = j.size();
  const size_t cols = j.at(0).is_array() ? j.at(0).size() : 0;
  if (cols == 0) throw Error(ErrorCode::ParseError, "'" + field + "' rows must be arrays");
  Mat m(rows, cols);
  for (size_t r = 0; r < rows; ++r) {
    const json& row = j.at(r);
    if (!row.is_array()) throw Error(ErrorCode::ParseError, "'" + field + "' rows must be arrays");
    if (row.size() != cols) throw Error(ErrorCode::DimensionMismatch, "'" + field + "' is ragged");
    for (size_t c = 0; c < cols; ++c) {
      if (!row.at(c).is_number()) throw Error(ErrorCode::ParseError, "'" + field + "' has a non-number");
      m(r, c) = row.at(c).get<double>();
    }
  }
  return m;
}

json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

Scenario parse_scenario(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "scenario must be a JSON object");
  Scenario s;
  s.name = optional_field<std::string>(j, "name", "");
  if (s.name.empty()) throw Error(ErrorCode::MissingField, "missing field 'name'");
  const std::string mode = optional_field<std::string>(j, "mode", "stationary");
  if (j.contains("tolerances")) {
    s.tol.base = optional_field(j.at("tolerances"), "base", s.tol.base);
    s.tol.oracle = optional_field(j.at("tolerances"), "oracle", s.tol.oracle);
  }
  if (!(s.tol.base > 0.0) || !(s.tol.oracle > 0.0)) throw Error(ErrorCode::InvalidConfig, "tolerances must be positive");

  json echo = j;
  echo["tolerances"] = {{"base", s.tol.base}, {"oracle", s.tol.oracle}};
  if (mode == "stationary") {
    s.mode = ScenarioMode::Stationary;
    s.stationary = parse_stationary(j);
    echo["mode"] = "stationary";
    echo["F2"] = matrix_to_json(s.stationary->F2);
    echo["coercivity_samples"] = s.stationary->coercivity_samples;
  } else if (mode == "spatial-averaging") {
    s.mode = ScenarioMode::SpatialAveraging;
    s.sa = parse_sa(j);
    echo["condition_set"] = to_string(s.sa->condition_set);
    echo["phases"] = s.sa->phases;
    echo["horizon"] = s.sa->horizon;
  } else {
    throw Error(ErrorCode::ParseError, "mode must be stationary or spatial-averaging");
  }
  s.echo = std::move(echo);
  return s;
}

}  // namespace

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return scenario_from_json(j);
}

Scenario scenario_from_json(const json& j) {
  try {
    return parse_scenario(j);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

}  // namespace lqrlag
