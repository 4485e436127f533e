#include "lqrlag/spectral_model.hpp"

#include "lqrlag/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lqrlag {

SpectralModel make_spectral_model(const std::vector<double>& eigenvalues) {
  if (eigenvalues.empty()) throw Error(ErrorCode::NonPositiveEigenvalue, "empty eigenvalue sequence");
  for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
    if (!(eigenvalues[i] > 0.0))
      throw Error(ErrorCode::NonPositiveEigenvalue, "lambda_" + std::to_string(i + 1) + " <= 0");
    if (i > 0 && eigenvalues[i] < eigenvalues[i - 1])
      throw Error(ErrorCode::NotSorted, "lambda_" + std::to_string(i + 1) + " < lambda_" + std::to_string(i));
  }
  SpectralModel m;
  m.eigenvalues = Eigen::Map<const Vec>(eigenvalues.data(), static_cast<Eigen::Index>(eigenvalues.size()));
  return m;
}

SpectralModel power_model(int n, double p) {
  if (n < 1) throw Error(ErrorCode::IndexOutOfRange, "power generator needs n >= 1");
  std::vector<double> ev(static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j) ev[static_cast<std::size_t>(j - 1)] = std::pow(static_cast<double>(j), p);
  return make_spectral_model(ev);
}

SpectralModel sum_of_squares_2d_model(int n) {
  if (n < 1) throw Error(ErrorCode::IndexOutOfRange, "sum-of-squares-2d generator needs n >= 1");
  // m^2 + l^2 <= r^2 always contains at least n values once r^2 >= n.
  const int r = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n)))) + 1;
  std::vector<double> ev;
  for (int m = 0; m <= r; ++m)
    for (int l = 0; l <= r; ++l)
      if (m != 0 || l != 0) ev.push_back(static_cast<double>(m * m + l * l));
  std::sort(ev.begin(), ev.end());
  ev.resize(static_cast<std::size_t>(n));
  return make_spectral_model(ev);
}

SpectralModel spectral_model_from_json(const nlohmann::json& j) {
  if (j.is_array()) return make_spectral_model(j.get<std::vector<double>>());
  if (!j.is_object() || !j.contains("generator"))
    throw Error(ErrorCode::MissingField, "eigenvalues: expected array or object with 'generator'");
  const std::string gen = j.at("generator").get<std::string>();
  if (!j.contains("n")) throw Error(ErrorCode::MissingField, "eigenvalues.n");
  const int n = j.at("n").get<int>();
  if (gen == "power") return power_model(n, j.value("p", 2.0));
  if (gen == "sum-of-squares-2d") return sum_of_squares_2d_model(n);
  throw Error(ErrorCode::ParseError, "unknown eigenvalue generator '" + gen + "'");
}

nlohmann::json to_json(const SpectralModel& model) {
  return std::vector<double>(model.eigenvalues.data(), model.eigenvalues.data() + model.eigenvalues.size());
}

ModeProjectors mode_projectors(const SpectralModel& model, int k, int N) {
  const int n = model.n();
  if (N < 1 || N >= n) throw Error(ErrorCode::IndexOutOfRange, "need 1 <= N < n");
  if (k < 1) throw Error(ErrorCode::IndexOutOfRange, "need k >= 1");
  ModeProjectors p;
  p.k = k;
  p.N = N;
  p.P_low = Mat::Zero(n, n);
  p.Q_high = Mat::Zero(n, n);
  p.I_mid = Mat::Zero(n, n);
  const double lo = model.lambda(N) - k, hi = model.lambda(N) + k;
  for (int j = 1; j <= n; ++j) {
    const double lam = model.lambda(j);
    if (lam < lo) {
      p.P_low(j - 1, j - 1) = 1.0;
      p.low_modes.push_back(j);
    } else if (lam > hi) {
      p.Q_high(j - 1, j - 1) = 1.0;
      p.high_modes.push_back(j);
    } else {
      p.I_mid(j - 1, j - 1) = 1.0;
      p.mid_modes.push_back(j);
    }
  }
  return p;
}

Vec semigroup_apply(const Vec& diagonal, double t, const Vec& v) {
  if (t < 0.0) throw Error(ErrorCode::NegativeTime, "t = " + std::to_string(t));
  if (diagonal.size() != v.size()) throw Error(ErrorCode::DimensionMismatch, "generator and vector sizes differ");
  return ((t * diagonal.array()).exp() * v.array()).matrix();
}

CVec resolvent_apply(const Mat& a, cplx z, const CVec& v, double tol) {
  if (a.rows() != a.cols() || a.rows() != v.size())
    throw Error(ErrorCode::DimensionMismatch, "resolvent operand sizes differ");
  const CMat shifted = a.cast<cplx>() - z * CMat::Identity(a.rows(), a.cols());
  if (linalg::min_singular_value(shifted) <= tol) throw Error(ErrorCode::SingularShift, "A - zI is singular");
  return shifted.partialPivLu().solve(v);
}

FractionalScale fractional_scale(const SpectralModel& model, double beta) {
  if (beta < 0.0) throw Error(ErrorCode::NegativeBeta, "beta = " + std::to_string(beta));
  return {beta, model.eigenvalues.array().pow(beta).matrix()};
}

double fractional_inner_product(const SpectralModel& model, double beta, const Vec& v, const Vec& w) {
  if (beta < 0.0) throw Error(ErrorCode::NegativeBeta, "beta = " + std::to_string(beta));
  if (v.size() != model.n() || w.size() != model.n())
    throw Error(ErrorCode::DimensionMismatch, "vector length differs from model dimension");
  const Vec weights = model.eigenvalues.array().pow(2.0 * beta).matrix();
  return (weights.array() * v.array() * w.array()).sum();
}

}  // namespace lqrlag
