#pragma once

#include "lqrlag/hamiltonian.hpp"

#include <vector>

namespace lqrlag {

struct LPOptions {
  double h = 0.0;        // 0 picks min(0.06, 1 / max(1, |R|)) with R = H - diag(A, -A^T)
  double horizon = 0.0;  // 0 picks max(10 / eps_A, 20 / eps) with eps the smaller dichotomy rate of H and diag(A, -A^T)
  bool richardson = true;
  double shift = 0.0;    // generators A + shift, -A^T + shift; needs |shift| below both rates
  bool picard = false;   // iterate xi = T xi + T0 g instead of the direct solve
  int picard_max_iterations = 2000;
  double picard_tol = 1e-13;
  bool keep_trajectories = false;
  double delta_star = std::numeric_limits<double>::quiet_NaN();  // precomputed frequency margin
};

struct LPDiagnostics {
  double h = 0.0, horizon = 0.0;
  int nodes = 0;
  double delta_star = 0.0;
  bool conditioning_warning = false;  // delta* < 1e-4
  int picard_iterations = 0;
  bool picard_converged = false;
  double richardson_change = 0.0;     // |M_h - M_{h/2}|
  double invariance_defect = 0.0;     // |(I - P_L) H P_L| / |H|
  double isotropy_defect = 0.0;
  double fixed_point_residual = 0.0;  // of the discrete single-input equation at step h
};

struct StableLagrangeResult {
  Subspace L_plus;
  GraphOperator M_plus;  // over (stable(A) x stable(-A^T), unstable(A) x unstable(-A^T))
  double eps0 = 0.0;
  double M_eps = 0.0;
  LPDiagnostics diag;
  std::vector<GridFunction> trajectories;  // z(t) from each basis vector of the sharp part, step h
};

/// The discretized half-line problem on [0, T] for one step size. Frame coordinates
/// x = (x_s, x_u) split each of Delta v, Delta eta into stable and unstable parts.
class StationaryLPSystem {
public:
  StationaryLPSystem(const Hamiltonian& h, const DichotomySplit& split_a, const DichotomySplit& split_m,
                     double step, double horizon, double shift = 0.0);

  int n() const { return n_; }
  int nodes() const { return nodes_; }
  double step() const { return h_; }
  const Mat& sharp_basis() const { return hs_; }  // 2n x n, orthonormal
  const Mat& flat_basis() const { return hu_; }

  /// Delta z(0) in flat coordinates for each sharp basis column of zeta (n x k).
  Mat solve_initial(const Mat& zeta) const;
  /// Full trajectory z(t) for one sharp coordinate vector.
  GridFunction trajectory(const Vec& zeta) const;
  /// Delta z at all nodes in frame coordinates (2n x nodes).
  Mat solve_frame(const Vec& zeta) const;

  /// Single-input operators on grid functions xi (m x nodes).
  Mat apply_T(const Mat& xi) const;
  Mat apply_T0(const Vec& zeta) const;
  /// xi = -F3^{-1} F2 Delta v + F3^{-1} B^T Delta eta from a frame-coordinate solution.
  Mat control_from_frame(const Mat& x) const;
  /// Delta z (frame coordinates) from a control xi of the single-input equation.
  Mat frame_from_control(const Mat& xi, const Vec& zeta) const;

  struct PicardResult {
    Mat x;
    int iterations = 0;
    bool converged = false;
  };
  PicardResult picard(const Vec& zeta, int max_iter, double tol) const;
  /// Test-only: iteration of the paired map Delta z -> L(R(Delta z + g)) with two inputs.
  PicardResult naive_paired(const Vec& zeta, int max_iter, double tol) const;

private:
  Mat g_frame(const Vec& zeta) const;  // free trajectory in frame coordinates, 2n x nodes
  Mat lp_frame(const Mat& forcing_frame) const;

  const Hamiltonian* ham_;
  int n_ = 0, nodes_ = 0;
  double h_ = 0.0, shift_ = 0.0;
  Mat phi_, phi_inv_, hs_, hu_, rc_;
  Mat xs_gen_, xu_gen_;
  ExpStep fwd_, bwd_;
  // Block-tridiagonal elimination: node i couples x_{i-1}, x_i, x_{i+1}.
  Mat lower_, upper_;
  std::vector<Eigen::PartialPivLU<Mat>> pivots_;
  std::vector<Mat> sweep_;  // pivots_[i]^{-1} * upper block
};

/// Builds the stable Lagrange subspace from the single-input fixed-point equation.
/// Throws FrequencyConditionFailed if the frequency margin is not positive.
StableLagrangeResult stable_lagrange_lp(const Mat& a, const Mat& b, const QuadraticFormTriple& form,
                                        const DichotomySplit& split, const LPOptions& opts = {});

/// |(I - P_L) H P_L| / max(1, |H|).
double invariance_defect(const Subspace& l, const Mat& h);

}  // namespace lqrlag
