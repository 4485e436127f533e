#pragma once

#include "lqrlag/linalg.hpp"

#include <json.hpp>

#include <vector>

namespace lqrlag {

/// Diagonal positive self-adjoint operator held by its ascending eigenvalues.
struct SpectralModel {
  Vec eigenvalues;

  int n() const { return static_cast<int>(eigenvalues.size()); }
  /// 1-based access, matching the mode labels lambda_1 <= lambda_2 <= ...
  double lambda(int j) const { return eigenvalues(j - 1); }
};

SpectralModel make_spectral_model(const std::vector<double>& eigenvalues);

/// lambda_j = j^p, j = 1..n.
SpectralModel power_model(int n, double p);
/// The n smallest values of m^2 + l^2 over m, l >= 0 not both zero, with multiplicity.
SpectralModel sum_of_squares_2d_model(int n);

/// Accepts a bare JSON array or {"generator": "power"|"sum-of-squares-2d", "n": .., "p": ..}.
SpectralModel spectral_model_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SpectralModel& model);

/// Orthogonal projectors P (lambda_j < lambda_N - k), Q (lambda_j > lambda_N + k)
/// and I = Id - P - Q. Ties stay in I.
struct ModeProjectors {
  Mat P_low, Q_high, I_mid;
  int k = 0;
  int N = 0;
  std::vector<int> low_modes, mid_modes, high_modes;  // 1-based mode labels
};

ModeProjectors mode_projectors(const SpectralModel& model, int k, int N);

/// Exact semigroup of a diagonal generator: componentwise exp(t * d).
Vec semigroup_apply(const Vec& diagonal, double t, const Vec& v);

/// (A - zI)^{-1} v, refusing shifts whose smallest singular value is below tol.
CVec resolvent_apply(const Mat& a, cplx z, const CVec& v, double tol = 1e-12);

struct FractionalScale {
  double beta = 0.0;
  Vec weights;  // lambda_j^beta
};

FractionalScale fractional_scale(const SpectralModel& model, double beta);

/// sum_j lambda_j^{2 beta} v_j w_j
double fractional_inner_product(const SpectralModel& model, double beta, const Vec& v, const Vec& w);

}  // namespace lqrlag
