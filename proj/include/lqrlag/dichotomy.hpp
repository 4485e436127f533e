#pragma once

#include "lqrlag/linalg.hpp"
#include "lqrlag/symplectic.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lqrlag {

/// Stable/unstable spectral splitting of a hyperbolic generator.
struct DichotomySplit {
  Mat generator;
  Subspace stable, unstable;
  int rank_j = 0;           // number of eigenvalues with Re > 0
  double M_const = 1.0;     // sampled lower estimate of the dichotomy constant
  double eps_rate = 0.0;    // min |Re lambda|
  Mat pi_stable, pi_unstable;
  Mat frame, frame_inv;     // frame = [S U] with S, U the stable/unstable bases
  Mat a_ss, a_uu;           // generator in frame coordinates, block diagonal

  int n() const { return static_cast<int>(generator.rows()); }
  int stable_dim() const { return n() - rank_j; }
};

DichotomySplit dichotomy_split(const Mat& a, double axis_tol = 1e-10);

/// F(t,s) = e^{(t-s)A} Pi_s for t > s and -e^{(t-s)A} Pi_u for t < s.
Mat green_kernel(const DichotomySplit& split, double t, double s);

/// Samples on a uniform time grid; values are dim x nodes.
struct GridFunction {
  Vec times;
  Mat values;

  GridFunction() = default;
  GridFunction(Vec t, Mat v);
  static GridFunction uniform(double t0, double t1, int nodes, int dim);

  int nodes() const { return static_cast<int>(times.size()); }
  int dim() const { return static_cast<int>(values.rows()); }
  double step() const { return nodes() > 1 ? times(1) - times(0) : 0.0; }

  std::string to_csv() const;
  static GridFunction from_csv(const std::string& text);
};

/// Exact one-step map of y' = X y + f for f linear on the step:
/// y1 = E y0 + W0 f0 + W1 f1.
struct ExpStep {
  Mat E, W0, W1;
};
ExpStep exp_step(const Mat& x, double h);

/// Half-line / line Lyapunov-Perron operator on a uniform grid with step h.
/// Stable coordinates integrate forward from zero at the first node; unstable
/// coordinates integrate backward from zero at the last node. An optional shift
/// replaces the generator by A + shift*I (requires |shift| < eps_rate).
class LyapunovPerronOperator {
public:
  LyapunovPerronOperator(const DichotomySplit& split, double h, double shift = 0.0);

  /// f and result in original coordinates, n x nodes.
  Mat apply(const Mat& f) const;
  /// f and result in frame coordinates.
  Mat apply_coords(const Mat& fc) const;

  const DichotomySplit& split() const { return *split_; }
  const ExpStep& forward_step() const { return fwd_; }
  /// Backward step: y_i = E y_{i+1} + W0 f_i + W1 f_{i+1} for the unstable block.
  const ExpStep& backward_step() const { return bwd_; }

private:
  const DichotomySplit* split_;
  double h_;
  ExpStep fwd_, bwd_;
};

struct LPResult {
  GridFunction z;
  double horizon = 0.0;     // half-width T of the grid
  double tail_bound = 0.0;  // M e^{-eps T} sup|f|
};

/// z = integral of F(t,s) f(s) ds over the grid [-T, T] with exponential-integrator
/// weights against the piecewise-linear interpolant of f.
LPResult lyapunov_perron_apply(const DichotomySplit& split, const GridFunction& f, double min_horizon = 0.0);

/// Ratio of ||Pi z|| to (M_const / eps_rate) ||Pi f|| in the grid L2 norm, maximized over the
/// stable and unstable projectors, with z = LP(f).
double lp_l2_bound_ratio(const DichotomySplit& split, const GridFunction& f);

/// max over retained frequencies of |i w z^ - A z^ - f^| / |f^| with z = LP(f).
/// Without explicit frequencies, a grid of multiples of pi/T up to 20 is used and
/// frequencies where |f^| < 1e-2 max|f^| are dropped.
double fourier_resolvent_check(const DichotomySplit& split, const GridFunction& f,
                               const std::optional<std::vector<double>>& omegas = std::nullopt);

/// The kernels of A and -A^T satisfy F_{-A^T}(t,s) = -F_A(s,t)^T.
/// Returns max over sampled t != s of || F_{-A^T}(t,s) + F_A(s,t)^T ||.
double adjoint_kernel_defect(const DichotomySplit& split_a, const DichotomySplit& split_minus_at, int samples = 200);

}  // namespace lqrlag
