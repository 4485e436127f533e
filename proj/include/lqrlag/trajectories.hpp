#pragma once

#include "lqrlag/dichotomy.hpp"
#include "lqrlag/symplectic.hpp"

#include <vector>

namespace lqrlag {

/// Default step for exact-exponential integration: min(0.01, 0.1 / |H|).
double default_flow_step(const Mat& h);

/// z(t_i) = e^{t_i H} z0 on a uniform grid, one exact step per node.
GridFunction integrate_linear(const Mat& h, const Vec& z0, double horizon, double step = 0.0);

/// max_t |<z1(t), J z2(t)> - <z1(0), J z2(0)>| / (|z1(0)| |z2(0)|).
double symplectic_pairing_drift(const Mat& h, const Vec& z1, const Vec& z2, double horizon, double step = 0.0);

struct DecayFit {
  double rate = 0.0;       // -slope of log |Z(t)| on the fitted window
  double prefactor = 0.0;  // sup_t |Z(t)| e^{rate t}
  double r_squared = 0.0;
  double t_start = 0.0, t_end = 0.0;
};

/// Least-squares fit of log(norms) ~ c - rate t over t in [t_start, t_end]; norms must be positive.
/// Samples at which the norm falls below floor are excluded from the fit window.
DecayFit fit_exponential_decay(const std::vector<double>& times, const std::vector<double>& norms,
                               double t_start, double t_end, double floor = 1e-13);

/// Norm of the flow restricted to L: |e^{tH} Q| with Q an orthonormal basis of L. After each
/// step the states are re-anchored onto L along `complement` (keeps roundoff growth along the
/// unstable directions out of the fit). Returns times and norms.
struct RestrictedFlow {
  std::vector<double> times, norms;
};
RestrictedFlow restricted_flow_norms(const Mat& h, const Subspace& l, const Subspace& complement, double horizon,
                                     double step = 0.0);

/// Sampled sup_t |e^{tH}|_L| e^{eps t}.
double sampled_M_eps(const RestrictedFlow& flow, double eps);

}  // namespace lqrlag
