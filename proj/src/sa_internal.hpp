#pragma once

#include "lqrlag/spatial_averaging.hpp"

#include <vector>

namespace lqrlag::detail {

/// One scalar exponential-integrator step for y' = x y + f with f linear on the step.
/// Forward: y_{i+1} = E y_i + W0 f_i + W1 f_{i+1}; backward: y_i = E y_{i+1} + W0 f_i + W1 f_{i+1}.
struct ScalarStep {
  double E = 1.0, W0 = 0.0, W1 = 0.0;
};
ScalarStep forward_step(double x, double h);
ScalarStep backward_step(double x, double h);

/// A scalar linear recurrence over a time grid, decaying in its integration direction.
class ScalarSolve {
public:
  ScalarSolve() = default;
  /// Generator x_i on step i; integrates forward when all x_i < 0, backward otherwise.
  ScalarSolve(const Vec& times, const Vec& x_steps, bool forward);

  Vec apply(const Vec& f) const;
  Vec apply_transpose(const Vec& g) const;
  bool forward() const { return forward_; }

private:
  std::vector<ScalarStep> steps_;
  bool forward_ = true;
};

/// The mode-j chain f -> eta: v' = x v + c f, eta' = -x eta + d v, each with its decaying
/// boundary condition, on a given grid. x_i = A_j - [pq] abar_i with abar_i the step mean of a.
class ModeChain {
public:
  ModeChain(const ModeCoefficients& mc, const Driver& driver, const Phase& q, const Vec& times);

  const ModeCoefficients& coeffs() const { return mc_; }
  const Vec& times() const { return times_; }
  const Vec& a_nodes() const { return a_nodes_; }

  Vec solve_v(const Vec& f) const { return sv_.apply(f); }
  Vec solve_eta(const Vec& f) const { return se_.apply(f); }
  Vec apply_T(const Vec& f) const;
  Vec apply_T_transpose(const Vec& g) const;
  const ScalarSolve& v_solve() const { return sv_; }

private:
  ModeCoefficients mc_;
  Vec times_, a_nodes_;
  ScalarSolve sv_, se_;
};

Vec trapezoid_weights(const Vec& times);

/// sup |W^{1/2} S W^{-1/2} x| / |x| by power iteration on the normal operator.
/// The estimate approaches the operator norm from below.
double power_norm(const std::function<Vec(const Vec&)>& apply, const std::function<Vec(const Vec&)>& apply_t,
                  const Vec& weights, int max_iterations, double tol, unsigned seed = 7);

}  // namespace lqrlag::detail
