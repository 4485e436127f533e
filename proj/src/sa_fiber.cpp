#include "lqrlag/errors.hpp"
#include "lqrlag/spatial_averaging.hpp"
#include "sa_internal.hpp"

#include <algorithm>
#include <cmath>

namespace lqrlag {

namespace {

// Index of the stable / unstable coordinate of mode j (1-based) in H x H.
int stable_index(const SAConfig& cfg, int j) { return cfg.v_stable(j) ? j - 1 : cfg.n() + j - 1; }
int unstable_index(const SAConfig& cfg, int j) { return cfg.v_stable(j) ? cfg.n() + j - 1 : j - 1; }

double contraction_factor(const SAConfig& cfg) {
  // The intermediate and outer analytic bounds; both must be below one for the iteration.
  const TauChoice& t = cfg.taus;
  const double L2 = cfg.Lambda * cfg.Lambda, d2 = cfg.delta * cfg.delta;
  const double gap = cfg.mu_bar + cfg.k - cfg.a_bound;
  const double mid = (1.0 / t.t1 + 1.0 / t.t3) * (t.t1 * d2 + t.t2 * L2) / (cfg.mu_bar * cfg.mu_bar);
  const double high = gap > 0.0 ? (1.0 / t.t2 + 1.0 / t.t3) * t.t3 * L2 / (gap * gap) : 2.0;
  return std::max(mid, high);
}

Vec refine(const Vec& t) {
  Vec r(2 * t.size() - 1);
  for (int i = 0; i + 1 < t.size(); ++i) {
    r(2 * i) = t(i);
    r(2 * i + 1) = 0.5 * (t(i) + t(i + 1));
  }
  r(r.size() - 1) = t(t.size() - 1);
  return r;
}

struct ModeSolution {
  double m = 0.0;
  int iterations = 0;
  bool converged = false;
  Vec zs, zu;
};

// Delta z = z - g with g(t) the free flow of diag(A, -A) from the stable basis vector; the
// remainder R = H - diag(A, -A) forces Delta z. Picard on Delta eta through the mode chain.
ModeSolution solve_mode(const ModeCoefficients& mc, const Driver& driver, const Phase& q, const Vec& times,
                        int max_iterations, double tol, bool keep) {
  const detail::ModeChain chain(mc, driver, q, times);
  const int nodes = static_cast<int>(times.size());
  const Vec& a = chain.a_nodes();
  const double pq = mc.pq ? 1.0 : 0.0;
  Vec gv = Vec::Zero(nodes), ge = Vec::Zero(nodes);
  for (int i = 0; i < nodes; ++i) {
    if (mc.v_stable)
      gv(i) = std::exp(mc.A_j * times(i));
    else
      ge(i) = std::exp(-mc.A_j * times(i));
  }
  const Vec rv = (-pq * a.array() * gv.array() + mc.c * ge.array()).matrix();
  const Vec re = (mc.d * gv.array() + pq * a.array() * ge.array()).matrix();
  const Vec w = detail::trapezoid_weights(times);
  auto wnorm = [&](const Vec& f) { return std::sqrt((w.array() * f.array().square()).sum()); };

  ModeSolution s;
  Vec eta = Vec::Zero(nodes), v;
  double first = 0.0;
  for (int it = 1; it <= max_iterations; ++it) {
    v = chain.solve_v(mc.c * eta + rv);
    Vec next = chain.solve_eta(mc.d * v + re);
    const double diff = wnorm(next - eta);
    if (it == 1) first = wnorm(next);
    eta = std::move(next);
    s.iterations = it;
    if (diff <= tol * first || first == 0.0) {
      s.converged = true;
      break;
    }
  }
  v = chain.solve_v(mc.c * eta + rv);
  s.m = mc.v_stable ? eta(0) : v(0);
  if (keep) {
    s.zs = mc.v_stable ? Vec(gv + v) : Vec(ge + eta);
    s.zu = mc.v_stable ? eta : v;
  }
  return s;
}

}  // namespace

Subspace sa_sharp_subspace(const SAConfig& cfg) {
  const int n = cfg.n();
  Mat s = Mat::Zero(2 * n, n);
  for (int j = 1; j <= n; ++j) s(stable_index(cfg, j), j - 1) = 1.0;
  return Subspace(s);
}

Subspace sa_flat_subspace(const SAConfig& cfg) {
  const int n = cfg.n();
  Mat u = Mat::Zero(2 * n, n);
  for (int j = 1; j <= n; ++j) u(unstable_index(cfg, j), j - 1) = 1.0;
  return Subspace(u);
}

Vec graded_grid(double horizon, double h_min, double h_max, double growth) {
  if (!(horizon > 0.0) || !(h_min > 0.0) || !(h_max >= h_min) || !(growth >= 1.0))
    throw Error(ErrorCode::InvalidConfig, "graded grid needs T > 0, 0 < h_min <= h_max, growth >= 1");
  std::vector<double> t{0.0};
  double h = h_min;
  while (t.back() + h < horizon * (1.0 - 1e-12)) {
    t.push_back(t.back() + h);
    h = std::min(h * growth, h_max);
  }
  if (horizon - t.back() < 0.25 * h && t.size() > 1) t.back() = 0.5 * (t[t.size() - 2] + horizon);
  t.push_back(horizon);
  return Eigen::Map<const Vec>(t.data(), static_cast<Eigen::Index>(t.size()));
}

double default_fiber_horizon(const SAConfig& cfg, const Driver& driver) {
  double rate = std::numeric_limits<double>::infinity();
  const double lo = driver.min_value(), hi = driver.max_value();
  for (int j = 1; j <= cfg.n(); ++j) {
    const ModeCoefficients mc = mode_coefficients(cfg, j);
    for (int i = 0; i <= 8; ++i) {
      const double a = lo + (hi - lo) * i / 8.0;
      const double x = mc.A_j - (mc.pq ? a : 0.0);
      const double disc = x * x + mc.c * mc.d;
      rate = std::min(rate, disc > 0.0 ? std::sqrt(disc) : 0.0);
    }
  }
  if (!(rate > 0.0)) throw Error(ErrorCode::SpectrumOnAxis, "a frozen Hamiltonian in the driver range is not hyperbolic");
  return std::max(10.0 / cfg.mu_bar, 32.0 / rate);
}

FiberResult build_fiber(const SAConfig& cfg, const Driver& driver, const Phase& q, const FiberOptions& opts) {
  if (static_cast<int>(q.size()) != driver.dim()) throw Error(ErrorCode::DimensionMismatch, "phase dimension");
  if (opts.beta < 0.0) throw Error(ErrorCode::NegativeBeta, "beta must be nonnegative");
  if (!(contraction_factor(cfg) < 1.0))
    throw Error(ErrorCode::ContractionFailed, "the contraction bounds fail for this configuration");
  const double T = opts.horizon > 0.0 ? opts.horizon : default_fiber_horizon(cfg, driver);
  if (T < 10.0 / cfg.mu_bar) throw Error(ErrorCode::HorizonTooShort, "need T >= 10 / mu_bar");

  const int n = cfg.n();
  double fastest = 0.0;
  for (int j = 1; j <= n; ++j) fastest = std::max(fastest, std::abs(cfg.alpha - cfg.model.lambda(j)) + cfg.a_bound);
  const double h_min = opts.h_min > 0.0 ? opts.h_min : std::min(opts.h_max, 0.02 / std::max(1.0, fastest));
  const Vec coarse = graded_grid(T, h_min, opts.h_max, opts.growth);
  const Vec fine = opts.richardson ? refine(coarse) : coarse;

  FiberResult r;
  r.q = q;
  r.beta = opts.beta;
  r.horizon = T;
  r.nodes = static_cast<int>(fine.size());
  r.m = Vec::Zero(n);
  r.converged = true;
  if (opts.keep_trajectories) r.trajectories = FiberTrajectories{fine, Mat::Zero(n, fine.size()), Mat::Zero(n, fine.size())};
  for (int j = 1; j <= n; ++j) {
    const ModeCoefficients mc = mode_coefficients(cfg, j);
    const ModeSolution f = solve_mode(mc, driver, q, fine, opts.max_iterations, opts.tol, opts.keep_trajectories);
    double m = f.m;
    int its = f.iterations;
    bool ok = f.converged;
    if (opts.richardson) {
      const ModeSolution c = solve_mode(mc, driver, q, coarse, opts.max_iterations, opts.tol, false);
      m = (4.0 * f.m - c.m) / 3.0;
      its = std::max(its, c.iterations);
      ok = ok && c.converged;
      r.richardson_change = std::max(r.richardson_change, std::abs(f.m - c.m));
    }
    if (!ok)
      throw Error(ErrorCode::ContractionFailed, "Picard iteration did not converge on mode " + std::to_string(j));
    r.m(j - 1) = m;
    r.max_picard_iterations = std::max(r.max_picard_iterations, its);
    if (opts.keep_trajectories) {
      r.trajectories->zs.row(j - 1) = f.zs.transpose();
      r.trajectories->zu.row(j - 1) = f.zu.transpose();
    }
  }

  // L = span{ e_s(j) + m_j e_u(j) } in H_beta coordinates (v, eta) -> (lambda^beta v, lambda^beta eta).
  Vec scale(2 * n);
  for (int j = 1; j <= n; ++j) scale(j - 1) = scale(n + j - 1) = std::pow(cfg.model.lambda(j), opts.beta);
  Mat basis = Mat::Zero(2 * n, n);
  for (int j = 1; j <= n; ++j) {
    basis(stable_index(cfg, j), j - 1) = 1.0;
    basis(unstable_index(cfg, j), j - 1) = r.m(j - 1);
  }
  r.L_plus = Subspace(scale.asDiagonal() * basis);
  r.M_plus = graph_over(r.L_plus, sa_sharp_subspace(cfg), sa_flat_subspace(cfg));
  r.isotropy_defect = isotropy_defect(r.L_plus);
  r.vertical_intersection = intersection_dimension(r.L_plus, vertical_subspace(n));
  try {
    r.P = nonoscillation_operator(r.L_plus);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Oscillating) throw;
  }
  return r;
}

std::vector<ContinuityRow> fiber_continuity(const SAConfig& cfg, const Driver& driver, const Phase& q,
                                            const std::vector<Phase>& q_sequence, const FiberOptions& opts) {
  const FiberResult ref = build_fiber(cfg, driver, q, opts);
  std::vector<ContinuityRow> rows;
  for (const Phase& qm : q_sequence) {
    const FiberResult f = build_fiber(cfg, driver, qm, opts);
    rows.push_back({Driver::phase_distance(qm, q), linalg::spectral_norm(Mat(f.M_plus.M - ref.M_plus.M)),
                    grassmann_distance(f.L_plus, ref.L_plus)});
  }
  return rows;
}

namespace {

// e^{h K} for K = [[x, c], [d, -x]] (trace free): cosh(h s) I + sinh(h s)/s K with s^2 = x^2 + c d.
Eigen::Matrix2d exp_traceless(double x, double c, double d, double h) {
  const double s2 = x * x + c * d;
  double ch, sh_over_s;
  if (std::abs(s2) * h * h < 1e-8) {
    const double z = s2 * h * h;
    ch = 1.0 + z / 2.0 + z * z / 24.0;
    sh_over_s = h * (1.0 + z / 6.0 + z * z / 120.0);
  } else if (s2 > 0.0) {
    const double s = std::sqrt(s2);
    ch = std::cosh(h * s);
    sh_over_s = std::sinh(h * s) / s;
  } else {
    const double s = std::sqrt(-s2);
    ch = std::cos(h * s);
    sh_over_s = std::sin(h * s) / s;
  }
  Eigen::Matrix2d e;
  e << ch + sh_over_s * x, sh_over_s * c, sh_over_s * d, ch - sh_over_s * x;
  return e;
}

}  // namespace

SADecay exp_decay_fit(const SAConfig& cfg, const Driver& driver, const FiberResult& fiber, const Mat& Z0,
                      double t_start, double t_end) {
  const int n = cfg.n();
  if (!fiber.trajectories) throw Error(ErrorCode::InvalidConfig, "fiber built without trajectories");
  if (fiber.beta != 0.0) throw Error(ErrorCode::InvalidConfig, "decay fits use the beta = 0 fiber");
  if (Z0.rows() != 2 * n) throw Error(ErrorCode::DimensionMismatch, "Z0 must have 2n rows");
  const FiberTrajectories& tr = *fiber.trajectories;
  if (t_end <= 0.0) t_end = 0.5 * fiber.horizon;

  SADecay out;
  out.eps0 = sa_eps0(cfg).eps0;
  const double z0n = Z0.size() ? linalg::spectral_norm(Z0) : 0.0;
  if (z0n == 0.0) {
    out.fit.rate = std::numeric_limits<double>::infinity();
    return out;
  }
  const Mat proj = fiber.L_plus.projector();
  if ((Z0 - proj * Z0).norm() > 1e-8 * Z0.norm()) throw Error(ErrorCode::NotInFiber, "Z0 leaves L+(q)");

  // Per mode, the fiber line at time t is spanned by (zs(t), zu(t)); the column coefficients are
  // the stable coordinates of Z0 (the fiber trajectories start from a unit stable coordinate).
  Mat coef(n, Z0.cols());
  for (int j = 1; j <= n; ++j) coef.row(j - 1) = Z0.row(stable_index(cfg, j));

  const Vec& t = tr.times;
  int last = 0;
  while (last + 1 < t.size() && t(last + 1) <= t_end + 1e-12) ++last;
  Mat s = Mat::Zero(n, last + 1), u = Mat::Zero(n, last + 1);
  for (int j = 1; j <= n; ++j) {
    const ModeCoefficients mc = mode_coefficients(cfg, j);
    const int is = cfg.v_stable(j) ? 0 : 1;
    Eigen::Vector2d z;
    z(is) = 1.0;
    z(1 - is) = fiber.m(j - 1);
    s(j - 1, 0) = 1.0;
    u(j - 1, 0) = fiber.m(j - 1);
    for (int i = 0; i < last; ++i) {
      const double h = t(i + 1) - t(i);
      const double hnorm = std::abs(mc.A_j) + cfg.a_bound + std::abs(mc.c) + std::abs(mc.d);
      const int sub = std::max(1, static_cast<int>(std::ceil(h * hnorm / 0.01)));
      const double hs = h / sub;
      for (int k = 0; k < sub; ++k) {
        const double tm = t(i) + (k + 0.5) * hs;
        const double x = mc.A_j - (mc.pq ? driver.evaluate(fiber.q, tm) : 0.0);
        // state ordered (v, eta)
        z = exp_traceless(x, mc.c, mc.d, hs) * z;
      }
      // Re-anchor: keep the stable coordinate, take the unstable one from the fiber line.
      const double zs_ref = tr.zs(j - 1, i + 1), zu_ref = tr.zu(j - 1, i + 1);
      z(1 - is) = z(is) * zu_ref / zs_ref;
      s(j - 1, i + 1) = z(is);
      u(j - 1, i + 1) = z(1 - is);
    }
  }
  for (int i = 0; i <= last; ++i) {
    Mat g = Mat::Zero(Z0.cols(), Z0.cols());
    for (int j = 0; j < n; ++j) {
      const Vec cj = coef.row(j).transpose();
      g += (s(j, i) * s(j, i) + u(j, i) * u(j, i)) * cj * cj.transpose();
    }
    const double nrm = std::sqrt(std::max(0.0, Eigen::SelfAdjointEigenSolver<Mat>(g).eigenvalues().maxCoeff()));
    out.times.push_back(t(i));
    out.norms.push_back(nrm / z0n);
    out.M_eps = std::max(out.M_eps, nrm / z0n * std::exp(out.eps0 * t(i)));
  }
  out.fit = fit_exponential_decay(out.times, out.norms, t_start, t_end);
  return out;
}

}  // namespace lqrlag
