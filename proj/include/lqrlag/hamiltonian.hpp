#pragma once

#include "lqrlag/dichotomy.hpp"
#include "lqrlag/frequency.hpp"
#include "lqrlag/symplectic.hpp"

#include <vector>

namespace lqrlag {

/// H = [[A_hat, H3], [H2, -A_hat^T]] with A_hat = A - B F3^{-1} F2 = H1,
/// H2 = F1 - F2^T F3^{-1} F2 and H3 = B F3^{-1} B^T.
struct Hamiltonian {
  Mat A, B;
  QuadraticFormTriple form;
  Mat H, A_hat, H1, H2, H3;

  int n() const { return static_cast<int>(A.rows()); }
  /// ||J H + H^T J||.
  double symplectic_defect() const;
};

Hamiltonian assemble_hamiltonian(const Mat& a, const Mat& b, const QuadraticFormTriple& form);

/// Invariant subspace of H for Re < 0 via ordered Schur; must be Lagrange.
Subspace stable_lagrange_schur(const Hamiltonian& h);

struct NonoscillationResult {
  Mat P;
  Mat K;  // -F3^{-1} F2 - F3^{-1} B^T P
  double riccati_residual = 0.0;
};

/// L = {(v, -P v)}; throws Oscillating on a nontrivial vertical intersection.
Mat nonoscillation_operator(const Subspace& l_plus);
NonoscillationResult extract_nonoscillation(const Subspace& l_plus, const Hamiltonian& h);

/// || -P H3 P + P H1 + H1^T P + H2 ||.
double riccati_residual(const Mat& p, const Mat& a, const Mat& b, const QuadraticFormTriple& form);
Mat feedback(const Mat& p, const Mat& b, const QuadraticFormTriple& form);

/// State v and control xi sampled on a common uniform grid.
struct ControlTrajectory {
  GridFunction v, xi;
};

/// Exact solution of v' = A v + B xi for xi piecewise linear between nodes.
ControlTrajectory integrate_control_system(const Mat& a, const Mat& b, const Vec& v0, const GridFunction& xi);

/// Largest one-step defect of the exact update between consecutive nodes, over max(1, max|v|).
double trajectory_residual(const Mat& a, const Mat& b, const ControlTrajectory& tr);

/// Quadrature of integral F(v, xi) dt. Midpoint states come from exact half steps, so
/// Simpson's rule is applied to a smooth integrand on each step.
double cost_integral(const Mat& a, const Mat& b, const QuadraticFormTriple& form, const ControlTrajectory& tr);

/// |V_P(v(T)) - V_P(v(0)) + int F - int <F3 (xi - K v), xi - K v>| divided by the sum of the
/// magnitudes of the terms (or 1 if they vanish). Throws NotATrajectory if the residual > tol.
double riccati_integral_check(const Mat& p, const Mat& a, const Mat& b, const QuadraticFormTriple& form,
                              const ControlTrajectory& tr, double tol = 1e-8);

/// Hautus test on eigenvalues with Re >= 0.
bool l2_controllability(const Mat& a, const Mat& b, double rel_tol = 1e-9);

struct CoercivityReport {
  double delta = 0.0;      // frequency margin
  double M = 0.0;          // sup ||(A - iw)^{-1} B||
  double c_printed = 0.0;  // delta / (delta M^2 + 1)
  double c_valid = 0.0;    // delta / (M^2 + 1), implied by J >= delta ||xi||^2 and ||v|| <= M ||xi||
  double worst_ratio_printed = 0.0;
  double worst_ratio_valid = 0.0;
};

/// Evaluates J_F / (c (||v||^2 + ||xi||^2)) over samples with v(0) = 0 that have decayed
/// by the end of the grid (|v(T)| <= 1e-8 max|v|, else SampleNotInM0).
CoercivityReport coercivity_check(const Mat& a, const Mat& b, const QuadraticFormTriple& form,
                                  const std::vector<ControlTrajectory>& samples, const FrequencyGrid& grid);

/// F_eps = F - eps (|v|^2 + |xi|^2).
QuadraticFormTriple shifted_form(const QuadraticFormTriple& form, double eps);

struct LyapunovInequalityReport {
  bool holds = false;
  double min_slack = 0.0;  // min over trajectories of lhs - rhs, normalized
  Mat P_eps;
};

/// Builds P_eps from F_eps and checks the dissipation inequality on every trajectory.
/// Throws EpsilonTooLarge if the shifted frequency margin is not positive.
LyapunovInequalityReport lyapunov_inequality_check(const Mat& a, const Mat& b, const QuadraticFormTriple& form,
                                                   double eps, const std::vector<ControlTrajectory>& trajectories);

struct Eps0Estimate {
  double eps_crit = 0.0;  // largest tested shift with positive margin for A + eps I and A - eps I
  double eps0 = 0.0;      // eps_crit / 2
  double eps_axis = 0.0;  // min |Re lambda(A)|
  double eps_hamiltonian = 0.0;  // min |Re lambda(H)|; L+ is unchanged only for shifts below it
};

/// Bisection on the frequency margin of the shifted generators A +- eps I over
/// [0, min(eps_axis, eps_hamiltonian)).
Eps0Estimate estimate_eps0(const Mat& a, const Mat& b, const QuadraticFormTriple& form, int iterations = 30);

}  // namespace lqrlag
