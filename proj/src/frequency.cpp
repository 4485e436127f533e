#include "lqrlag/frequency.hpp"

#include "lqrlag/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

namespace lqrlag {

namespace {

void require_symmetric(const Mat& x, const char* name) {
  const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
  if ((x - x.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw Error(ErrorCode::NotSymmetric, std::string(name) + " is not symmetric");
}

Eigen::PartialPivLU<CMat> shifted_lu(const Mat& a, double omega) {
  CMat s = a.cast<cplx>();
  s.diagonal().array() -= cplx(0.0, omega);
  Eigen::PartialPivLU<CMat> lu(s);
  if (!(lu.rcond() > 1e-13))
    throw Error(ErrorCode::SingularShift, "i*omega is (numerically) in the spectrum, omega = " + std::to_string(omega));
  return lu;
}

CMat shifted_solve(const Mat& a, double omega, const CMat& rhs) { return shifted_lu(a, omega).solve(rhs); }

struct PointEval {
  double min_eig, inverse_norm, m_norm, skew;
};

PointEval evaluate_point(const Mat& a, const Mat& b, const QuadraticFormTriple& f, double omega) {
  const CMat m = transfer_M(a, b, f, omega);
  const CMat f3m = f.F3.cast<cplx>() * m;
  const CMat g = f.F3.cast<cplx>() - f3m;
  const Eigen::Index k = m.rows();
  PointEval p;
  p.min_eig = linalg::min_eigenvalue_herm(linalg::hermitian_part(g));
  p.skew = linalg::spectral_norm(CMat(f3m - f3m.adjoint()));
  p.m_norm = linalg::spectral_norm(m);
  const CMat im = CMat::Identity(k, k) - m;
  const double s = linalg::min_singular_value(im);
  p.inverse_norm = s > 0.0 ? 1.0 / s : std::numeric_limits<double>::infinity();
  return p;
}

double norm_sum(const Mat& a, const Mat& b, const QuadraticFormTriple& f) {
  return linalg::spectral_norm(a) + linalg::spectral_norm(b) + linalg::spectral_norm(f.F1) +
         linalg::spectral_norm(f.F2) + linalg::spectral_norm(f.F3);
}

std::vector<double> base_nonnegative_grid(const Mat& a, double omega_max, const GridOptions& o) {
  std::vector<double> w;
  for (int i = 0; i < o.base_points; ++i) w.push_back(omega_max * i / (o.base_points - 1));
  const double lo = std::max(1e-6, 1e-4 * omega_max);
  for (int i = 0; i < o.log_points; ++i)
    w.push_back(lo * std::pow(omega_max / lo, static_cast<double>(i) / (o.log_points - 1)));
  const CVec ev = linalg::eigenvalues(a);
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    const double im = std::abs(ev(i).imag()), re = std::abs(ev(i).real());
    for (double c : {0.0, 0.05, 0.2, 0.5, 1.0, 2.0}) {
      for (double s : {-1.0, 1.0}) {
        const double x = im + s * c * re;
        if (x >= 0.0 && x <= omega_max) w.push_back(x);
      }
    }
  }
  std::sort(w.begin(), w.end());
  w.erase(std::unique(w.begin(), w.end(), [](double x, double y) { return std::abs(x - y) <= 1e-14 * std::max(1.0, y); }),
          w.end());
  return w;
}

std::vector<double> symmetric_from(const std::vector<double>& pos) {
  std::vector<double> out;
  for (auto it = pos.rbegin(); it != pos.rend(); ++it)
    if (*it > 0.0) out.push_back(-*it);
  for (double x : pos) out.push_back(x);
  return out;
}

template <class F>
double refine_maximum(F&& f, const std::vector<double>& w, std::vector<double>& vals) {
  double best = *std::max_element(vals.begin(), vals.end());
  std::vector<std::size_t> idx(w.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return vals[x] > vals[y]; });
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  for (std::size_t r = 0; r < std::min<std::size_t>(3, idx.size()); ++r) {
    const std::size_t i = idx[r];
    double lo = w[i > 0 ? i - 1 : i], hi = w[i + 1 < w.size() ? i + 1 : i];
    if (hi <= lo) continue;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 60; ++it) {
      if (f1 > f2) {
        hi = x2; x2 = x1; f2 = f1; x1 = hi - gr * (hi - lo); f1 = f(x1);
      } else {
        lo = x1; x1 = x2; f1 = f2; x2 = lo + gr * (hi - lo); f2 = f(x2);
      }
    }
    best = std::max({best, f1, f2});
  }
  return best;
}

}  // namespace

double QuadraticFormTriple::evaluate(const Vec& v, const Vec& xi) const {
  return v.dot(F1 * v) + 2.0 * xi.dot(F2 * v) + xi.dot(F3 * xi);
}

QuadraticFormTriple make_form(const Mat& f1, const Mat& f2, const Mat& f3, double delta_floor) {
  if (f1.rows() != f1.cols() || f3.rows() != f3.cols() || f2.rows() != f3.rows() || f2.cols() != f1.rows())
    throw Error(ErrorCode::DimensionMismatch, "form blocks have inconsistent shapes");
  require_symmetric(f1, "F1");
  require_symmetric(f3, "F3");
  if (!(delta_floor > 0.0)) throw Error(ErrorCode::InvalidConfig, "delta_floor must be positive");
  if (f3.rows() > 0 && linalg::min_eigenvalue_sym(f3) < delta_floor)
    throw Error(ErrorCode::NotPositiveDefinite, "lambda_min(F3) below delta_floor");
  return {f1, f2, f3, delta_floor};
}

std::vector<double> FrequencyGrid::nonnegative() const {
  std::vector<double> w;
  for (double x : omegas)
    if (x >= 0.0) w.push_back(x);
  return w;
}

CMat transfer_M(const Mat& a, const Mat& b, const QuadraticFormTriple& f, double omega) {
  if (a.rows() != b.rows() || f.n() != a.rows() || f.m() != b.cols())
    throw Error(ErrorCode::DimensionMismatch, "system and form shapes differ");
  // -A^T - iw = -(A - iw)^H, so one factorization serves both solves.
  const Eigen::PartialPivLU<CMat> lu = shifted_lu(a, omega);
  const CMat r = lu.solve(b.cast<cplx>());
  const CMat inner = f.F1.cast<cplx>() * r - f.F2.transpose().cast<cplx>();
  const CMat s = -CMat(lu.transpose().solve(CMat(inner.conjugate()))).conjugate();
  const CMat rhs = f.F2.cast<cplx>() * r + b.transpose().cast<cplx>() * s;
  return f.F3.cast<cplx>().ldlt().solve(rhs);
}

double tail_M_bound(const Mat& a, const Mat& b, const QuadraticFormTriple& f, double omega) {
  const double na = linalg::spectral_norm(a);
  if (omega <= na) return std::numeric_limits<double>::infinity();
  const double r = 1.0 / (omega - na);
  const double nb = linalg::spectral_norm(b), n1 = linalg::spectral_norm(f.F1), n2 = linalg::spectral_norm(f.F2);
  const double f3inv = 1.0 / linalg::min_eigenvalue_sym(f.F3);
  return f3inv * (n2 * nb * r + nb * r * (n1 * nb * r + n2));
}

double self_adjoint_defect(const Mat& a, const Mat& b, const QuadraticFormTriple& f, double omega) {
  return evaluate_point(a, b, f, omega).skew;
}

FrequencyGrid make_frequency_grid(const Mat& a, const Mat& b, const QuadraticFormTriple& f, const GridOptions& o) {
  FrequencyGrid g;
  const double l3 = linalg::min_eigenvalue_sym(f.F3), n3 = linalg::spectral_norm(f.F3);
  double wmax = 10.0 * norm_sum(a, b, f);
  if (wmax <= 0.0) wmax = 1.0;
  for (int d = 0;; ++d) {
    g.tail_margin_lower = l3 - n3 * tail_M_bound(a, b, f, wmax);
    if (g.tail_margin_lower > 0.0 || d >= o.max_doublings) break;
    wmax *= 2.0;
  }
  g.omega_max = wmax;
  g.tail_certified = g.tail_margin_lower > 0.0;

  std::map<double, double> margin;
  for (double w : base_nonnegative_grid(a, wmax, o)) margin[w] = evaluate_point(a, b, f, w).min_eig;
  // Bisect around every discrete local minimum that lies below twice the global minimum.
  for (int round = 0; round < o.refine_rounds; ++round) {
    double mn = std::numeric_limits<double>::infinity();
    for (const auto& [w, m] : margin) mn = std::min(mn, m);
    const double thr = mn + std::max(std::abs(mn), 1e-12);
    std::vector<std::pair<double, double>> pts(margin.begin(), margin.end());
    std::vector<double> fresh;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double m = pts[i].second;
      const double noise = 1e-12 * std::max(1.0, std::abs(m));
      const bool left_ok = i == 0 || pts[i - 1].second > m + noise;
      const bool right_ok = i + 1 == pts.size() || pts[i + 1].second > m + noise;
      if (!(left_ok && right_ok) || m >= thr) continue;
      for (std::size_t k : {i - 1, i + 1}) {
        if (k >= pts.size()) continue;
        const double gap = std::abs(pts[k].first - pts[i].first);
        if (gap > 1e-9 * wmax) fresh.push_back(0.5 * (pts[k].first + pts[i].first));
      }
    }
    if (fresh.empty()) break;
    if (fresh.size() > 256) fresh.resize(256);
    for (double w : fresh) margin[w] = evaluate_point(a, b, f, w).min_eig;
  }
  std::vector<double> pos;
  for (const auto& kv : margin) pos.push_back(kv.first);
  g.omegas = symmetric_from(pos);
  return g;
}

MarginScan frequency_margin_scan(const Mat& a, const Mat& b, const QuadraticFormTriple& f, const FrequencyGrid& grid) {
  MarginScan s;
  s.delta_star = std::numeric_limits<double>::infinity();
  for (double w : grid.nonnegative()) {
    const PointEval p = evaluate_point(a, b, f, w);
    s.omega.push_back(w);
    s.min_eig.push_back(p.min_eig);
    s.inverse_norm.push_back(p.inverse_norm);
    s.m_norm.push_back(p.m_norm);
    if (p.min_eig < s.delta_star) {
      s.delta_star = p.min_eig;
      s.omega_argmin = w;
    }
    s.max_skew_defect = std::max(s.max_skew_defect, p.skew);
    s.max_inverse_norm = std::max(s.max_inverse_norm, p.inverse_norm);
    s.max_m_norm = std::max(s.max_m_norm, p.m_norm);
  }
  return s;
}

std::string MarginScan::to_csv() const {
  std::ostringstream os;
  os << "omega,min_eig,inverse_norm\n" << std::setprecision(17);
  for (std::size_t i = 0; i < omega.size(); ++i) os << omega[i] << "," << min_eig[i] << "," << inverse_norm[i] << "\n";
  return os.str();
}

double frequency_condition_margin(const Mat& a, const Mat& b, const QuadraticFormTriple& f, const FrequencyGrid& grid) {
  if (!grid.tail_certified)
    throw Error(ErrorCode::TailNotCertified, "tail bound does not certify positivity beyond omega_max");
  return frequency_margin_scan(a, b, f, grid).delta_star;
}

double resolvent_sup(const Mat& a, const Mat& b, const FrequencyGrid& grid) {
  return smith_condition(a, b, Mat::Identity(a.rows(), a.rows()), 0.0, grid).sup;
}

SmithResult smith_condition(const Mat& a, const Mat& b, const Mat& c, double lambda, const FrequencyGrid& grid) {
  if (c.cols() != a.rows() || b.rows() != a.rows()) throw Error(ErrorCode::DimensionMismatch, "C, A, B shapes differ");
  auto val = [&](double w) {
    return linalg::spectral_norm(CMat(c.cast<cplx>() * shifted_solve(a, w, b.cast<cplx>())));
  };
  const std::vector<double> w = grid.nonnegative();
  std::vector<double> vals;
  for (double x : w) vals.push_back(val(x));
  SmithResult r;
  r.sup = vals.empty() ? 0.0 : refine_maximum(val, w, vals);
  const double na = linalg::spectral_norm(a);
  r.tail = grid.omega_max > na ? linalg::spectral_norm(c) * linalg::spectral_norm(b) / (grid.omega_max - na)
                               : std::numeric_limits<double>::infinity();
  r.sup = std::max(r.sup, r.tail);
  r.holds = lambda <= 0.0 ? true : r.sup < 1.0 / lambda;
  if (lambda > 0.0 && r.sup == 0.0) r.holds = true;
  return r;
}

InverseNormCertificate inverse_norm_certificate(const Mat& a, const Mat& b, const QuadraticFormTriple& f,
                                                const FrequencyGrid& grid) {
  const MarginScan s = frequency_margin_scan(a, b, f, grid);
  if (!(s.delta_star > 0.0)) throw Error(ErrorCode::ConditionFailed, "frequency margin is not positive");
  InverseNormCertificate c;
  c.max_inverse_norm = s.max_inverse_norm;
  c.bound = linalg::spectral_norm(f.F3) / s.delta_star;
  for (std::size_t i = 0; i < s.omega.size(); ++i) {
    const double local = linalg::spectral_norm(f.F3) / s.min_eig[i];
    c.worst_ratio = std::max(c.worst_ratio, s.inverse_norm[i] / local);
  }
  c.holds = c.max_inverse_norm <= c.bound * (1.0 + 1e-10);
  return c;
}

}  // namespace lqrlag
