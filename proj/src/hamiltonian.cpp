#include "lqrlag/hamiltonian.hpp"

#include "lqrlag/errors.hpp"

#include <algorithm>
#include <cmath>

namespace lqrlag {

namespace {

Mat f3_solve(const QuadraticFormTriple& f, const Mat& rhs) { return f.F3.ldlt().solve(rhs); }

// Integrals over one step [0, h] of the three quadratic integrands via Simpson with an exact midpoint.
struct StepSamples {
  Vec v0, vm, v1, x0, xm, x1;
};

StepSamples step_samples(const ExpStep& half, const Mat& b, const Vec& v0, const Vec& v1, const Vec& x0, const Vec& x1) {
  StepSamples s{v0, Vec(), v1, x0, 0.5 * (x0 + x1), x1};
  s.vm = half.E * v0 + half.W0 * (b * x0) + half.W1 * (b * s.xm);
  return s;
}

template <class Fn>
double simpson(double h, const StepSamples& s, Fn&& fn) {
  return h / 6.0 * (fn(s.v0, s.x0) + 4.0 * fn(s.vm, s.xm) + fn(s.v1, s.x1));
}

void require_trajectory(const Mat& a, const Mat& b, const ControlTrajectory& tr) {
  if (tr.v.nodes() != tr.xi.nodes() || tr.v.dim() != a.rows() || tr.xi.dim() != b.cols())
    throw Error(ErrorCode::DimensionMismatch, "trajectory shapes differ from the system");
  if (tr.v.nodes() < 2) throw Error(ErrorCode::NotATrajectory, "trajectory needs two nodes");
}

}  // namespace

double Hamiltonian::symplectic_defect() const {
  const Mat j = J_matrix(n());
  return linalg::spectral_norm(Mat(j * H + H.transpose() * j));
}

Hamiltonian assemble_hamiltonian(const Mat& a, const Mat& b, const QuadraticFormTriple& f) {
  if (a.rows() != a.cols() || b.rows() != a.rows() || f.n() != a.rows() || f.m() != b.cols())
    throw Error(ErrorCode::DimensionMismatch, "system and form shapes differ");
  const double l3 = f.m() > 0 ? linalg::min_eigenvalue_sym(f.F3) : 1.0;
  if (!(l3 > 1e-14 * std::max(1.0, linalg::spectral_norm(f.F3)))) throw Error(ErrorCode::SingularF3, "F3 is singular");
  Hamiltonian h;
  h.A = a;
  h.B = b;
  h.form = f;
  const int n = static_cast<int>(a.rows());
  h.A_hat = a - b * f3_solve(f, f.F2);
  h.H1 = h.A_hat;
  h.H2 = linalg::symmetric_part(Mat(f.F1 - f.F2.transpose() * f3_solve(f, f.F2)));
  h.H3 = linalg::symmetric_part(Mat(b * f3_solve(f, b.transpose())));
  h.H.resize(2 * n, 2 * n);
  h.H << h.A_hat, h.H3, h.H2, -h.A_hat.transpose();
  return h;
}

Subspace stable_lagrange_schur(const Hamiltonian& h) {
  const CVec ev = linalg::eigenvalues(h.H);
  const double tol = 1e-10 * std::max(1.0, linalg::spectral_norm(h.H));
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (std::abs(ev(i).real()) <= tol) throw Error(ErrorCode::SpectrumOnAxis, "Hamiltonian has an eigenvalue on the axis");
  const Subspace l(linalg::invariant_subspace(h.H, [](cplx z) { return z.real() < 0.0; }));
  if (l.dim() != h.n()) throw Error(ErrorCode::NotLagrange, "stable subspace has the wrong dimension");
  if (!is_lagrange(l).is_lagrange) throw Error(ErrorCode::NotLagrange, "stable subspace is not isotropic");
  return l;
}

Mat nonoscillation_operator(const Subspace& l) {
  const int n = l.ambient() / 2;
  if (l.dim() != n || l.ambient() != 2 * n) throw Error(ErrorCode::NotLagrange, "not a half-dimensional subspace");
  if (intersection_dimension(l, vertical_subspace(n)) > 0)
    throw Error(ErrorCode::Oscillating, "subspace meets the vertical subspace");
  const Mat x = l.basis().topRows(n), y = l.basis().bottomRows(n);
  if (n == 0) return Mat(0, 0);
  const Mat p = -y * x.inverse();
  return linalg::symmetric_part(p);
}

Mat feedback(const Mat& p, const Mat& b, const QuadraticFormTriple& f) {
  return -f3_solve(f, f.F2) - f3_solve(f, Mat(b.transpose() * p));
}

double riccati_residual(const Mat& p, const Mat& a, const Mat& b, const QuadraticFormTriple& f) {
  const Hamiltonian h = assemble_hamiltonian(a, b, f);
  return linalg::spectral_norm(Mat(-p * h.H3 * p + p * h.H1 + h.H1.transpose() * p + h.H2));
}

NonoscillationResult extract_nonoscillation(const Subspace& l, const Hamiltonian& h) {
  NonoscillationResult r;
  r.P = nonoscillation_operator(l);
  r.K = feedback(r.P, h.B, h.form);
  r.riccati_residual = riccati_residual(r.P, h.A, h.B, h.form);
  return r;
}

ControlTrajectory integrate_control_system(const Mat& a, const Mat& b, const Vec& v0, const GridFunction& xi) {
  if (v0.size() != a.rows() || xi.dim() != b.cols()) throw Error(ErrorCode::DimensionMismatch, "v0 or xi shape");
  const ExpStep st = exp_step(a, xi.step());
  Mat v(a.rows(), xi.nodes());
  v.col(0) = v0;
  for (int i = 0; i + 1 < xi.nodes(); ++i)
    v.col(i + 1) = st.E * v.col(i) + st.W0 * (b * xi.values.col(i)) + st.W1 * (b * xi.values.col(i + 1));
  return {GridFunction(xi.times, v), xi};
}

double trajectory_residual(const Mat& a, const Mat& b, const ControlTrajectory& tr) {
  require_trajectory(a, b, tr);
  const ExpStep st = exp_step(a, tr.xi.step());
  const Mat& v = tr.v.values;
  const Mat bx = b * tr.xi.values;
  double worst = 0.0;
  for (int i = 0; i + 1 < tr.v.nodes(); ++i)
    worst = std::max(worst, (v.col(i + 1) - st.E * v.col(i) - st.W0 * bx.col(i) - st.W1 * bx.col(i + 1))
                                .cwiseAbs().maxCoeff());
  return worst / std::max(1.0, v.cwiseAbs().maxCoeff());
}

double cost_integral(const Mat& a, const Mat& b, const QuadraticFormTriple& f, const ControlTrajectory& tr) {
  require_trajectory(a, b, tr);
  const double h = tr.v.step();
  const ExpStep half = exp_step(a, 0.5 * h);
  double acc = 0.0;
  for (int i = 0; i + 1 < tr.v.nodes(); ++i) {
    const StepSamples s = step_samples(half, b, tr.v.values.col(i), tr.v.values.col(i + 1), tr.xi.values.col(i),
                                       tr.xi.values.col(i + 1));
    acc += simpson(h, s, [&](const Vec& v, const Vec& x) { return f.evaluate(v, x); });
  }
  return acc;
}

double riccati_integral_check(const Mat& p, const Mat& a, const Mat& b, const QuadraticFormTriple& f,
                              const ControlTrajectory& tr, double tol) {
  require_trajectory(a, b, tr);
  if (trajectory_residual(a, b, tr) > tol) throw Error(ErrorCode::NotATrajectory, "v does not solve v' = Av + B xi");
  const Mat k = feedback(p, b, f);
  const double h = tr.v.step();
  const ExpStep half = exp_step(a, 0.5 * h);
  double jf = 0.0, jk = 0.0, jf_abs = 0.0;
  for (int i = 0; i + 1 < tr.v.nodes(); ++i) {
    const StepSamples s = step_samples(half, b, tr.v.values.col(i), tr.v.values.col(i + 1), tr.xi.values.col(i),
                                       tr.xi.values.col(i + 1));
    jf += simpson(h, s, [&](const Vec& v, const Vec& x) { return f.evaluate(v, x); });
    jf_abs += simpson(h, s, [&](const Vec& v, const Vec& x) {
      return std::abs(v.dot(f.F1 * v)) + 2.0 * std::abs(x.dot(f.F2 * v)) + x.dot(f.F3 * x);
    });
    jk += simpson(h, s, [&](const Vec& v, const Vec& x) {
      const Vec w = x - k * v;
      return w.dot(f.F3 * w);
    });
  }
  const Vec vt = tr.v.values.col(tr.v.nodes() - 1), v0 = tr.v.values.col(0);
  const double vpt = vt.dot(p * vt), vp0 = v0.dot(p * v0);
  const double scale = std::abs(vpt) + std::abs(vp0) + jf_abs + jk;
  const double defect = std::abs(vpt - vp0 + jf - jk);
  return scale > 0.0 ? defect / scale : defect;
}

bool l2_controllability(const Mat& a, const Mat& b, double rel_tol) {
  const CVec ev = linalg::eigenvalues(a);
  const int n = static_cast<int>(a.rows());
  const double scale = std::max(1.0, linalg::spectral_norm(a) + linalg::spectral_norm(b));
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i).real() < 0.0) continue;
    CMat m(n, n + b.cols());
    m << a.cast<cplx>() - ev(i) * CMat::Identity(n, n), b.cast<cplx>();
    Eigen::JacobiSVD<CMat> svd(m);
    if (svd.singularValues()(n - 1) <= rel_tol * scale) return false;
  }
  return true;
}

CoercivityReport coercivity_check(const Mat& a, const Mat& b, const QuadraticFormTriple& f,
                                  const std::vector<ControlTrajectory>& samples, const FrequencyGrid& grid) {
  CoercivityReport r;
  r.delta = frequency_condition_margin(a, b, f, grid);
  r.M = resolvent_sup(a, b, grid);
  r.c_printed = r.delta / (r.delta * r.M * r.M + 1.0);
  r.c_valid = r.delta / (r.M * r.M + 1.0);
  r.worst_ratio_printed = r.worst_ratio_valid = std::numeric_limits<double>::infinity();
  for (const ControlTrajectory& s : samples) {
    require_trajectory(a, b, s);
    const double vmax = s.v.values.cwiseAbs().maxCoeff();
    if (s.v.values.col(0).norm() > 1e-12 * std::max(1.0, vmax))
      throw Error(ErrorCode::SampleNotInM0, "sample does not start at zero");
    if (s.v.values.col(s.v.nodes() - 1).norm() > 1e-8 * std::max(vmax, 1e-300))
      throw Error(ErrorCode::SampleNotInM0, "sample has not decayed by the end of the grid");
    const double h = s.v.step();
    const ExpStep half = exp_step(a, 0.5 * h);
    double j = 0.0, l2 = 0.0;
    for (int i = 0; i + 1 < s.v.nodes(); ++i) {
      const StepSamples st = step_samples(half, b, s.v.values.col(i), s.v.values.col(i + 1), s.xi.values.col(i),
                                          s.xi.values.col(i + 1));
      j += simpson(h, st, [&](const Vec& v, const Vec& x) { return f.evaluate(v, x); });
      l2 += simpson(h, st, [&](const Vec& v, const Vec& x) { return v.squaredNorm() + x.squaredNorm(); });
    }
    if (l2 == 0.0) continue;
    r.worst_ratio_printed = std::min(r.worst_ratio_printed, j / (r.c_printed * l2));
    r.worst_ratio_valid = std::min(r.worst_ratio_valid, j / (r.c_valid * l2));
  }
  if (std::isinf(r.worst_ratio_valid)) r.worst_ratio_printed = r.worst_ratio_valid = 1.0;
  return r;
}

QuadraticFormTriple shifted_form(const QuadraticFormTriple& f, double eps) {
  QuadraticFormTriple g = f;
  g.F1 -= eps * Mat::Identity(f.n(), f.n());
  g.F3 -= eps * Mat::Identity(f.m(), f.m());
  return g;
}

LyapunovInequalityReport lyapunov_inequality_check(const Mat& a, const Mat& b, const QuadraticFormTriple& f,
                                                   double eps, const std::vector<ControlTrajectory>& trajectories) {
  if (eps < 0.0) throw Error(ErrorCode::InvalidConfig, "eps must be nonnegative");
  const QuadraticFormTriple fe = shifted_form(f, eps);
  if (fe.m() > 0 && linalg::min_eigenvalue_sym(fe.F3) <= 0.0)
    throw Error(ErrorCode::EpsilonTooLarge, "F3 - eps I is not positive definite");
  const FrequencyGrid grid = make_frequency_grid(a, b, fe);
  double margin = -1.0;
  try {
    margin = frequency_condition_margin(a, b, fe, grid);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::TailNotCertified) throw;
  }
  if (!(margin > 0.0)) throw Error(ErrorCode::EpsilonTooLarge, "shifted frequency margin is not positive");
  LyapunovInequalityReport r;
  const Hamiltonian h = assemble_hamiltonian(a, b, fe);
  r.P_eps = nonoscillation_operator(stable_lagrange_schur(h));
  r.min_slack = std::numeric_limits<double>::infinity();
  for (const ControlTrajectory& tr : trajectories) {
    require_trajectory(a, b, tr);
    const double dt = tr.v.step();
    const ExpStep half = exp_step(a, 0.5 * dt);
    double jf = 0.0, l2 = 0.0;
    for (int i = 0; i + 1 < tr.v.nodes(); ++i) {
      const StepSamples s = step_samples(half, b, tr.v.values.col(i), tr.v.values.col(i + 1), tr.xi.values.col(i),
                                         tr.xi.values.col(i + 1));
      jf += simpson(dt, s, [&](const Vec& v, const Vec& x) { return f.evaluate(v, x); });
      l2 += simpson(dt, s, [&](const Vec& v, const Vec& x) { return v.squaredNorm() + x.squaredNorm(); });
    }
    const Vec vt = tr.v.values.col(tr.v.nodes() - 1), v0 = tr.v.values.col(0);
    const double lhs = vt.dot(r.P_eps * vt) - v0.dot(r.P_eps * v0) + jf;
    const double scale = std::max(1.0, std::abs(lhs) + eps * l2);
    r.min_slack = std::min(r.min_slack, (lhs - eps * l2) / scale);
  }
  if (trajectories.empty()) r.min_slack = 0.0;
  r.holds = r.min_slack >= -1e-9;
  return r;
}

Eps0Estimate estimate_eps0(const Mat& a, const Mat& b, const QuadraticFormTriple& f, int iterations) {
  Eps0Estimate e;
  const CVec ev = linalg::eigenvalues(a);
  e.eps_axis = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < ev.size(); ++i) e.eps_axis = std::min(e.eps_axis, std::abs(ev(i).real()));
  const Mat id = Mat::Identity(a.rows(), a.cols());
  GridOptions coarse;
  coarse.base_points = 256;
  coarse.log_points = 64;
  coarse.refine_rounds = 16;
  auto passes = [&](double eps) {
    for (double s : {1.0, -1.0}) {
      const Mat as = a + s * eps * id;
      try {
        const FrequencyGrid g = make_frequency_grid(as, b, f, coarse);
        if (!(frequency_condition_margin(as, b, f, g) > 0.0)) return false;
      } catch (const Error&) {
        return false;
      }
    }
    return true;
  };
  e.eps_hamiltonian = std::numeric_limits<double>::infinity();
  const CVec hev = linalg::eigenvalues(assemble_hamiltonian(a, b, f).H);
  for (Eigen::Index i = 0; i < hev.size(); ++i) e.eps_hamiltonian = std::min(e.eps_hamiltonian, std::abs(hev(i).real()));
  double lo = 0.0, hi = std::min(e.eps_axis, e.eps_hamiltonian);
  if (!passes(0.0)) return e;
  for (int it = 0; it < iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    (passes(mid) ? lo : hi) = mid;
  }
  e.eps_crit = lo;
  e.eps0 = 0.5 * lo;
  return e;
}

}  // namespace lqrlag
