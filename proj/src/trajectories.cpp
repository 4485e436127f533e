#include "lqrlag/trajectories.hpp"

#include "lqrlag/errors.hpp"

#include <algorithm>
#include <cmath>

namespace lqrlag {

double default_flow_step(const Mat& h) { return std::min(0.01, 0.1 / std::max(1e-300, linalg::spectral_norm(h))); }

namespace {

int step_count(double horizon, double& step, const Mat& h) {
  if (!(horizon > 0.0)) throw Error(ErrorCode::NegativeTime, "horizon must be positive");
  if (!(step > 0.0)) step = default_flow_step(h);
  const int steps = std::max(1, static_cast<int>(std::ceil(horizon / step - 1e-9)));
  step = horizon / steps;
  return steps;
}

}  // namespace

GridFunction integrate_linear(const Mat& h, const Vec& z0, double horizon, double step) {
  if (z0.size() != h.rows()) throw Error(ErrorCode::DimensionMismatch, "initial state size");
  const int steps = step_count(horizon, step, h);
  const Mat e = linalg::expm(step * h);
  Mat v(h.rows(), steps + 1);
  v.col(0) = z0;
  for (int i = 0; i < steps; ++i) v.col(i + 1) = e * v.col(i);
  return GridFunction(Vec::LinSpaced(steps + 1, 0.0, horizon), v);
}

double symplectic_pairing_drift(const Mat& h, const Vec& z1, const Vec& z2, double horizon, double step) {
  const GridFunction a = integrate_linear(h, z1, horizon, step), b = integrate_linear(h, z2, horizon, step);
  const Mat j = J_matrix(static_cast<int>(h.rows() / 2));
  const double ref = a.values.col(0).dot(j * b.values.col(0));
  const double scale = std::max(1e-300, z1.norm() * z2.norm());
  double drift = 0.0;
  for (int i = 0; i < a.nodes(); ++i) drift = std::max(drift, std::abs(a.values.col(i).dot(j * b.values.col(i)) - ref));
  return drift / scale;
}

DecayFit fit_exponential_decay(const std::vector<double>& t, const std::vector<double>& y, double t0, double t1,
                               double floor) {
  if (t.size() != y.size()) throw Error(ErrorCode::DimensionMismatch, "times and norms differ in length");
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  int cnt = 0;
  DecayFit fit;
  fit.t_start = t0;
  fit.t_end = t0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t0 || t[i] > t1 || !(y[i] > floor)) continue;
    const double ly = std::log(y[i]);
    sx += t[i];
    sy += ly;
    sxx += t[i] * t[i];
    sxy += t[i] * ly;
    syy += ly * ly;
    fit.t_end = std::max(fit.t_end, t[i]);
    ++cnt;
  }
  if (cnt < 3) throw Error(ErrorCode::InvalidConfig, "decay fit needs at least three samples above the floor");
  const double vx = sxx - sx * sx / cnt, vy = syy - sy * sy / cnt, cxy = sxy - sx * sy / cnt;
  const double slope = cxy / vx;
  fit.rate = -slope;
  fit.r_squared = vy > 0.0 ? cxy * cxy / (vx * vy) : 1.0;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] <= fit.t_end) fit.prefactor = std::max(fit.prefactor, y[i] * std::exp(fit.rate * t[i]));
  return fit;
}

RestrictedFlow restricted_flow_norms(const Mat& h, const Subspace& l, const Subspace& complement, double horizon,
                                     double step) {
  const int m = l.ambient();
  if (complement.ambient() != m || l.dim() + complement.dim() != m)
    throw Error(ErrorCode::NotADirectSum, "complement does not fit");
  const int steps = step_count(horizon, step, h);
  Mat frame(m, m);
  frame << l.basis(), complement.basis();
  const Eigen::PartialPivLU<Mat> lu(frame);
  const Mat e = linalg::expm(step * h);
  Mat z = l.basis();
  RestrictedFlow f;
  f.times.push_back(0.0);
  f.norms.push_back(1.0);
  for (int i = 1; i <= steps; ++i) {
    z = e * z;
    z = l.basis() * lu.solve(z).topRows(l.dim());
    f.times.push_back(i * step);
    f.norms.push_back(linalg::spectral_norm(z));
  }
  return f;
}

double sampled_M_eps(const RestrictedFlow& flow, double eps) {
  double m = 0.0;
  for (std::size_t i = 0; i < flow.times.size(); ++i) m = std::max(m, flow.norms[i] * std::exp(eps * flow.times[i]));
  return m;
}

}  // namespace lqrlag
