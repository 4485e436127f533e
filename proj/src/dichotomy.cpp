#include "lqrlag/dichotomy.hpp"

#include "lqrlag/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <iomanip>
#include <random>
#include <sstream>

namespace lqrlag {

namespace {

double sampled_dichotomy_constant(const DichotomySplit& d) {
  const int s = d.stable_dim(), j = d.rank_j;
  const Mat fs = d.frame.leftCols(s), fu = d.frame.rightCols(j);
  const Mat gs = d.frame_inv.topRows(s), gu = d.frame_inv.bottomRows(j);
  const double eps = d.eps_rate;
  double m = std::max(s > 0 ? linalg::spectral_norm(Mat(fs * gs)) : 0.0,
                      j > 0 ? linalg::spectral_norm(Mat(fu * gu)) : 0.0);
  const int samples = 120;
  const double t0 = 1e-3 / eps, t1 = 10.0 / eps;
  for (int k = 0; k < samples; ++k) {
    const double t = t0 * std::pow(t1 / t0, static_cast<double>(k) / (samples - 1));
    const double w = std::exp(eps * t);
    if (s > 0) m = std::max(m, w * linalg::spectral_norm(Mat(fs * linalg::expm(t * d.a_ss) * gs)));
    if (j > 0) m = std::max(m, w * linalg::spectral_norm(Mat(fu * linalg::expm(-t * d.a_uu) * gu)));
  }
  return m;
}

}  // namespace

DichotomySplit dichotomy_split(const Mat& a, double axis_tol) {
  if (a.rows() != a.cols()) throw Error(ErrorCode::DimensionMismatch, "generator must be square");
  const int n = static_cast<int>(a.rows());
  const CVec ev = linalg::eigenvalues(a);
  double eps = std::numeric_limits<double>::infinity();
  int j = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    const double re = ev(i).real();
    if (std::abs(re) <= axis_tol) throw Error(ErrorCode::SpectrumOnAxis, "eigenvalue with |Re| <= tol");
    eps = std::min(eps, std::abs(re));
    if (re > 0.0) ++j;
  }
  DichotomySplit d;
  d.generator = a;
  d.rank_j = j;
  d.eps_rate = n > 0 ? eps : 0.0;
  const Mat s = linalg::invariant_subspace(a, [](cplx z) { return z.real() < 0.0; });
  const Mat u = linalg::invariant_subspace(a, [](cplx z) { return z.real() > 0.0; });
  if (s.cols() != n - j || u.cols() != j)
    throw Error(ErrorCode::SpectrumOnAxis, "invariant subspace dimensions inconsistent with spectrum");
  d.stable = Subspace(s);
  d.unstable = Subspace(u);
  d.frame.resize(n, n);
  d.frame << d.stable.basis(), d.unstable.basis();
  d.frame_inv = d.frame.inverse();
  const Mat ac = d.frame_inv * a * d.frame;
  d.a_ss = ac.topLeftCorner(n - j, n - j);
  d.a_uu = ac.bottomRightCorner(j, j);
  d.pi_stable = d.frame.leftCols(n - j) * d.frame_inv.topRows(n - j);
  d.pi_unstable = d.frame.rightCols(j) * d.frame_inv.bottomRows(j);
  if (n > 0) d.M_const = sampled_dichotomy_constant(d);
  return d;
}

Mat green_kernel(const DichotomySplit& d, double t, double s) {
  if (t == s) throw Error(ErrorCode::DiagonalOfKernel, "kernel undefined at t = s");
  const int ns = d.stable_dim(), j = d.rank_j;
  if (t > s) {
    if (ns == 0) return Mat::Zero(d.n(), d.n());
    return d.frame.leftCols(ns) * linalg::expm((t - s) * d.a_ss) * d.frame_inv.topRows(ns);
  }
  if (j == 0) return Mat::Zero(d.n(), d.n());
  return -d.frame.rightCols(j) * linalg::expm((t - s) * d.a_uu) * d.frame_inv.bottomRows(j);
}

GridFunction::GridFunction(Vec t, Mat v) : times(std::move(t)), values(std::move(v)) {
  if (values.cols() != times.size()) throw Error(ErrorCode::DimensionMismatch, "values/time count differ");
  if (times.size() > 1) {
    const double h = times(1) - times(0);
    if (!(h > 0.0)) throw Error(ErrorCode::NotSorted, "grid must be strictly increasing");
    for (Eigen::Index i = 1; i < times.size(); ++i) {
      const double hi = times(i) - times(i - 1);
      if (!(hi > 0.0)) throw Error(ErrorCode::NotSorted, "grid must be strictly increasing");
      if (std::abs(hi - h) > 1e-9 * std::max(1.0, std::abs(h)))
        throw Error(ErrorCode::DimensionMismatch, "grid step is not uniform");
    }
  }
}

GridFunction GridFunction::uniform(double t0, double t1, int nodes, int dim) {
  return GridFunction(Vec::LinSpaced(nodes, t0, t1), Mat::Zero(dim, nodes));
}

std::string GridFunction::to_csv() const {
  std::ostringstream os;
  os << "time";
  for (int c = 0; c < dim(); ++c) os << ",c" << c;
  os << "\n" << std::setprecision(17);
  for (int i = 0; i < nodes(); ++i) {
    os << times(i);
    for (int c = 0; c < dim(); ++c) os << "," << values(c, i);
    os << "\n";
  }
  return os.str();
}

GridFunction GridFunction::from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorCode::ParseError, "empty CSV");
  const int dim = static_cast<int>(std::count(line.begin(), line.end(), ','));
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw Error(ErrorCode::ParseError, "bad CSV cell '" + cell + "'");
      }
    }
    if (static_cast<int>(row.size()) != dim + 1) throw Error(ErrorCode::ParseError, "ragged CSV row");
    rows.push_back(std::move(row));
  }
  Vec t(static_cast<Eigen::Index>(rows.size()));
  Mat v(dim, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    t(static_cast<Eigen::Index>(i)) = rows[i][0];
    for (int c = 0; c < dim; ++c) v(c, static_cast<Eigen::Index>(i)) = rows[i][static_cast<std::size_t>(c + 1)];
  }
  return GridFunction(t, v);
}

ExpStep exp_step(const Mat& x, double h) {
  const linalg::PhiSet p = linalg::phi_functions(h * x);
  return {p.E, h * (p.phi1 - p.phi2), h * p.phi2};
}

LyapunovPerronOperator::LyapunovPerronOperator(const DichotomySplit& split, double h, double shift)
    : split_(&split), h_(h) {
  if (std::abs(shift) >= split.eps_rate && split.n() > 0)
    throw Error(ErrorCode::SpectrumOnAxis, "shift destroys the dichotomy");
  const int ns = split.stable_dim(), j = split.rank_j;
  if (ns > 0) fwd_ = exp_step(split.a_ss + shift * Mat::Identity(ns, ns), h);
  if (j > 0) {
    // Reverse time: w(tau) = y(T - tau) solves w' = -X w - f.
    const ExpStep r = exp_step(-(split.a_uu + shift * Mat::Identity(j, j)), h);
    bwd_ = {r.E, -r.W1, -r.W0};
  }
}

Mat LyapunovPerronOperator::apply_coords(const Mat& fc) const {
  const int ns = split_->stable_dim(), j = split_->rank_j;
  const Eigen::Index nodes = fc.cols();
  Mat y = Mat::Zero(fc.rows(), nodes);
  if (ns > 0) {
    for (Eigen::Index i = 0; i + 1 < nodes; ++i)
      y.col(i + 1).head(ns) = fwd_.E * y.col(i).head(ns) + fwd_.W0 * fc.col(i).head(ns) +
                              fwd_.W1 * fc.col(i + 1).head(ns);
  }
  if (j > 0) {
    for (Eigen::Index i = nodes - 2; i >= 0; --i)
      y.col(i).tail(j) = bwd_.E * y.col(i + 1).tail(j) + bwd_.W0 * fc.col(i).tail(j) +
                         bwd_.W1 * fc.col(i + 1).tail(j);
  }
  return y;
}

Mat LyapunovPerronOperator::apply(const Mat& f) const {
  return split_->frame * apply_coords(split_->frame_inv * f);
}

LPResult lyapunov_perron_apply(const DichotomySplit& split, const GridFunction& f, double min_horizon) {
  if (f.dim() != split.n()) throw Error(ErrorCode::DimensionMismatch, "forcing dimension differs");
  if (f.nodes() < 2) throw Error(ErrorCode::HorizonTooShort, "grid needs at least two nodes");
  const double half = 0.5 * (f.times(f.nodes() - 1) - f.times(0));
  const double required = std::max(10.0 / split.eps_rate, min_horizon);
  if (half < required * (1.0 - 1e-12))
    throw Error(ErrorCode::HorizonTooShort, "half-width " + std::to_string(half) + " < " + std::to_string(required));
  LyapunovPerronOperator op(split, f.step());
  LPResult r;
  r.z = GridFunction(f.times, op.apply(f.values));
  r.horizon = half;
  r.tail_bound = split.M_const * std::exp(-split.eps_rate * half) * f.values.cwiseAbs().maxCoeff();
  return r;
}

namespace {

double grid_l2(const GridFunction& g, const Mat& proj) {
  const double h = g.step();
  double acc = 0.0;
  for (int i = 0; i < g.nodes(); ++i) {
    const double w = (i == 0 || i == g.nodes() - 1) ? 0.5 * h : h;
    acc += w * (proj * g.values.col(i)).squaredNorm();
  }
  return std::sqrt(acc);
}

}  // namespace

double lp_l2_bound_ratio(const DichotomySplit& split, const GridFunction& f) {
  const LPResult lp = lyapunov_perron_apply(split, f);
  const double c = split.M_const / split.eps_rate;
  double worst = 0.0;
  for (const Mat* p : {&split.pi_stable, &split.pi_unstable}) {
    const double nf = grid_l2(f, *p);
    if (nf > 0.0) worst = std::max(worst, grid_l2(lp.z, *p) / (c * nf));
  }
  return worst;
}

namespace {

CVec trapezoid_fourier(const GridFunction& g, double omega) {
  const double h = g.step();
  CVec acc = CVec::Zero(g.dim());
  for (int i = 0; i < g.nodes(); ++i) {
    const double w = (i == 0 || i == g.nodes() - 1) ? 0.5 * h : h;
    acc += (w * std::exp(cplx(0.0, -omega * g.times(i)))) * g.values.col(i).cast<cplx>();
  }
  return acc;
}

}  // namespace

double fourier_resolvent_check(const DichotomySplit& split, const GridFunction& f,
                               const std::optional<std::vector<double>>& omegas) {
  const LPResult lp = lyapunov_perron_apply(split, f);
  std::vector<double> ws;
  bool filter = false;
  if (omegas) {
    ws = *omegas;
  } else {
    const double dw = M_PI / lp.horizon;
    for (double w = 0.0; w <= 20.0; w += dw) ws.push_back(w);
    filter = true;
  }
  std::vector<CVec> fh;
  double fmax = 0.0;
  for (double w : ws) {
    fh.push_back(trapezoid_fourier(f, w));
    fmax = std::max(fmax, fh.back().norm());
  }
  if (fmax == 0.0) return 0.0;
  const CMat a = split.generator.cast<cplx>();
  double worst = 0.0;
  for (std::size_t k = 0; k < ws.size(); ++k) {
    const double fn = fh[k].norm();
    if (fn == 0.0 || (filter && fn < 1e-2 * fmax)) continue;
    const CVec zh = trapezoid_fourier(lp.z, ws[k]);
    const CVec res = cplx(0.0, ws[k]) * zh - a * zh - fh[k];
    worst = std::max(worst, res.norm() / fn);
  }
  return worst;
}

double adjoint_kernel_defect(const DichotomySplit& sa, const DichotomySplit& sm, int samples) {
  if (sa.n() != sm.n()) throw Error(ErrorCode::DimensionMismatch, "splits have different dimension");
  std::mt19937_64 rng(20240917u);
  std::uniform_real_distribution<double> base(-5.0, 5.0), gap(0.05, 5.0), sign(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double s = base(rng);
    const double t = s + (sign(rng) < 0.5 ? -1.0 : 1.0) * gap(rng);
    const Mat d = green_kernel(sm, t, s) + green_kernel(sa, s, t).transpose();
    worst = std::max(worst, linalg::spectral_norm(d));
  }
  return worst;
}

}  // namespace lqrlag
