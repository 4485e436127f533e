#pragma once

#include "lqrlag/linalg.hpp"

#include <string>
#include <vector>

namespace lqrlag {

/// F(v, xi) = (F1 v, v) + 2 (F2 v, xi) + (F3 xi, xi).
struct QuadraticFormTriple {
  Mat F1, F2, F3;
  double delta_floor = 1e-8;

  int n() const { return static_cast<int>(F1.rows()); }
  int m() const { return static_cast<int>(F3.rows()); }
  double evaluate(const Vec& v, const Vec& xi) const;
};

/// Validates symmetry (1e-12 relative), shapes, and lambda_min(F3) >= delta_floor.
QuadraticFormTriple make_form(const Mat& f1, const Mat& f2, const Mat& f3, double delta_floor = 1e-8);

/// Symmetric grid; the tail bound covers |omega| > omega_max when certified.
struct FrequencyGrid {
  std::vector<double> omegas;
  double omega_max = 0.0;
  bool tail_certified = false;
  double tail_margin_lower = 0.0;  // lower bound for the margin beyond omega_max

  std::vector<double> nonnegative() const;
};

struct GridOptions {
  int base_points = 1024;
  int log_points = 192;
  int refine_rounds = 30;
  int max_doublings = 12;
};

/// 10 (|A| + |B| + |F1| + |F2| + |F3|), doubled until the tail bound certifies
/// positivity (or the doubling budget runs out).
FrequencyGrid make_frequency_grid(const Mat& a, const Mat& b, const QuadraticFormTriple& form,
                                  const GridOptions& opts = {});

/// M(w) = F3^{-1} F2 (A - iw)^{-1} B + F3^{-1} B^T (-A^T - iw)^{-1} (F1 (A - iw)^{-1} B - F2^T).
CMat transfer_M(const Mat& a, const Mat& b, const QuadraticFormTriple& form, double omega);

/// Upper bound on |M(w)| valid for |w| >= omega > |A|.
double tail_M_bound(const Mat& a, const Mat& b, const QuadraticFormTriple& form, double omega);

/// ||F3 M(w) - (F3 M(w))^*||.
double self_adjoint_defect(const Mat& a, const Mat& b, const QuadraticFormTriple& form, double omega);

struct MarginScan {
  std::vector<double> omega, min_eig, inverse_norm, m_norm;
  double delta_star = 0.0;
  double omega_argmin = 0.0;
  double max_skew_defect = 0.0;
  double max_inverse_norm = 0.0;
  double max_m_norm = 0.0;

  std::string to_csv() const;
};

/// Evaluates lambda_min of the symmetric part of F3 (I - M(w)) on the nonnegative half of the grid.
MarginScan frequency_margin_scan(const Mat& a, const Mat& b, const QuadraticFormTriple& form,
                                 const FrequencyGrid& grid);

/// delta* over the grid; throws TailNotCertified if the grid's tail is not certified.
double frequency_condition_margin(const Mat& a, const Mat& b, const QuadraticFormTriple& form,
                                  const FrequencyGrid& grid);

struct SmithResult {
  bool holds = false;
  double sup = 0.0;
  double tail = 0.0;
};

/// sup_w ||C (A - iw)^{-1} B|| over the grid, locally refined near the maximum,
/// combined with the tail bound |C||B| / (omega_max - |A|).
SmithResult smith_condition(const Mat& a, const Mat& b, const Mat& c, double lambda, const FrequencyGrid& grid);

/// sup_w ||(A - iw)^{-1} B|| with the same refinement and tail handling.
double resolvent_sup(const Mat& a, const Mat& b, const FrequencyGrid& grid);

struct InverseNormCertificate {
  double max_inverse_norm = 0.0;
  double bound = 0.0;  // |F3| / delta*
  double worst_ratio = 0.0;
  bool holds = false;
};

/// Checks ||(I - M(w))^{-1}|| <= |F3| / delta* on the grid; throws ConditionFailed if delta* <= 0.
InverseNormCertificate inverse_norm_certificate(const Mat& a, const Mat& b, const QuadraticFormTriple& form,
                                                const FrequencyGrid& grid);

}  // namespace lqrlag
