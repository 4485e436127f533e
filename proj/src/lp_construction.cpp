#include "lqrlag/lp_construction.hpp"

#include "lqrlag/errors.hpp"

#include <algorithm>
#include <cmath>

namespace lqrlag {

namespace {

Mat block_diag(const Mat& x, const Mat& y) {
  Mat d = Mat::Zero(x.rows() + y.rows(), x.cols() + y.cols());
  d.topLeftCorner(x.rows(), x.cols()) = x;
  d.bottomRightCorner(y.rows(), y.cols()) = y;
  return d;
}

double min_abs_real(const CVec& ev) {
  double m = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < ev.size(); ++i) m = std::min(m, std::abs(ev(i).real()));
  return m;
}

}  // namespace

StationaryLPSystem::StationaryLPSystem(const Hamiltonian& h, const DichotomySplit& sa, const DichotomySplit& sm,
                                       double step, double horizon, double shift)
    : ham_(&h), n_(h.n()), shift_(shift) {
  if (sa.n() != n_ || sm.n() != n_) throw Error(ErrorCode::DimensionMismatch, "splits do not match the Hamiltonian");
  if (sm.stable_dim() != sa.rank_j)
    throw Error(ErrorCode::DimensionMismatch, "split of -A^T is not dual to the split of A");
  if (!(step > 0.0) || !(horizon > 0.0)) throw Error(ErrorCode::InvalidConfig, "step and horizon must be positive");
  const int steps = std::max(1, static_cast<int>(std::ceil(horizon / step - 1e-9)));
  nodes_ = steps + 1;
  h_ = horizon / steps;

  hs_ = block_diag(sa.stable.basis(), sm.stable.basis());
  hu_ = block_diag(sa.unstable.basis(), sm.unstable.basis());
  phi_.resize(2 * n_, 2 * n_);
  phi_ << hs_, hu_;
  phi_inv_ = phi_.inverse();
  Mat breve = block_diag(h.A, Mat(-h.A.transpose()));
  rc_ = phi_inv_ * (h.H - breve) * phi_;
  const Mat id = Mat::Identity(n_, n_);
  xs_gen_ = block_diag(sa.a_ss, sm.a_ss) + shift * id;
  xu_gen_ = block_diag(sa.a_uu, sm.a_uu) + shift * id;
  fwd_ = exp_step(xs_gen_, h_);
  const ExpStep r = exp_step(Mat(-xu_gen_), h_);
  bwd_ = {r.E, -r.W1, -r.W0};

  const int d = 2 * n_;
  const Mat rs = rc_.topRows(n_), ru = rc_.bottomRows(n_);
  Mat sel_s = Mat::Zero(n_, d), sel_u = Mat::Zero(n_, d);
  sel_s.leftCols(n_) = id;
  sel_u.rightCols(n_) = id;
  lower_ = Mat::Zero(d, d);
  upper_ = Mat::Zero(d, d);
  lower_.topRows(n_) = -fwd_.E * sel_s - fwd_.W0 * rs;
  upper_.bottomRows(n_) = -bwd_.E * sel_u - bwd_.W1 * ru;
  Mat diag_first(d, d), diag_mid(d, d), diag_last(d, d);
  diag_mid << sel_s - fwd_.W1 * rs, sel_u - bwd_.W0 * ru;
  diag_first << sel_s, sel_u - bwd_.W0 * ru;
  diag_last << sel_s - fwd_.W1 * rs, sel_u;
  pivots_.reserve(static_cast<std::size_t>(nodes_));
  sweep_.reserve(static_cast<std::size_t>(nodes_));
  for (int i = 0; i < nodes_; ++i) {
    Mat g = i == 0 ? diag_first : (i == nodes_ - 1 ? diag_last : diag_mid);
    if (nodes_ == 1) g << sel_s, sel_u;
    if (i > 0) g -= lower_ * sweep_.back();
    pivots_.emplace_back(g);
    sweep_.push_back(i + 1 < nodes_ ? Mat(pivots_.back().solve(upper_)) : Mat());
  }
}

Mat StationaryLPSystem::g_frame(const Vec& zeta) const {
  Mat g = Mat::Zero(2 * n_, nodes_);
  Vec cur = zeta;
  for (int i = 0; i < nodes_; ++i) {
    g.col(i).head(n_) = cur;
    cur = fwd_.E * cur;
  }
  return g;
}

Mat StationaryLPSystem::solve_frame(const Vec& zeta) const {
  const int d = 2 * n_;
  const Mat g = g_frame(zeta);
  const Mat rg = rc_ * g;
  Vec rhs = Vec::Zero(static_cast<Eigen::Index>(nodes_) * d);
  for (int i = 0; i < nodes_; ++i) {
    const Eigen::Index row = static_cast<Eigen::Index>(i) * d;
    if (i > 0)
      rhs.segment(row, n_) = fwd_.W0 * rg.col(i - 1).head(n_) + fwd_.W1 * rg.col(i).head(n_);
    if (i < nodes_ - 1)
      rhs.segment(row + n_, n_) = bwd_.W0 * rg.col(i).tail(n_) + bwd_.W1 * rg.col(i + 1).tail(n_);
  }
  Mat w(d, nodes_);
  for (int i = 0; i < nodes_; ++i) {
    Vec r = rhs.segment(static_cast<Eigen::Index>(i) * d, d);
    if (i > 0) r -= lower_ * w.col(i - 1);
    w.col(i) = pivots_[static_cast<std::size_t>(i)].solve(r);
  }
  for (int i = nodes_ - 2; i >= 0; --i) w.col(i) -= sweep_[static_cast<std::size_t>(i)] * w.col(i + 1);
  return w;
}

Mat StationaryLPSystem::solve_initial(const Mat& zeta) const {
  Mat out(n_, zeta.cols());
  for (Eigen::Index k = 0; k < zeta.cols(); ++k) out.col(k) = solve_frame(zeta.col(k)).col(0).tail(n_);
  return out;
}

GridFunction StationaryLPSystem::trajectory(const Vec& zeta) const {
  const Mat x = solve_frame(zeta) + g_frame(zeta);
  return GridFunction(Vec::LinSpaced(nodes_, 0.0, h_ * (nodes_ - 1)), phi_ * x);
}

Mat StationaryLPSystem::lp_frame(const Mat& f) const {
  Mat y = Mat::Zero(2 * n_, nodes_);
  for (int i = 0; i + 1 < nodes_; ++i)
    y.col(i + 1).head(n_) = fwd_.E * y.col(i).head(n_) + fwd_.W0 * f.col(i).head(n_) + fwd_.W1 * f.col(i + 1).head(n_);
  for (int i = nodes_ - 2; i >= 0; --i)
    y.col(i).tail(n_) = bwd_.E * y.col(i + 1).tail(n_) + bwd_.W0 * f.col(i).tail(n_) + bwd_.W1 * f.col(i + 1).tail(n_);
  return y;
}

Mat StationaryLPSystem::control_from_frame(const Mat& x) const {
  const Mat z = phi_ * x;
  const QuadraticFormTriple& f = ham_->form;
  const Mat rhs = -f.F2 * z.topRows(n_) + ham_->B.transpose() * z.bottomRows(n_);
  return f.F3.ldlt().solve(rhs);
}

namespace {

// Delta z in frame coordinates given the total control and the free v-trajectory (original coordinates).
Mat chain(const StationaryLPSystem& s, const Mat& phi, const Mat& phi_inv, const Hamiltonian& h, const Mat& xi_total,
          const Mat& gv, const std::function<Mat(const Mat&)>& lp) {
  const int n = s.n();
  Mat forcing = Mat::Zero(2 * n, xi_total.cols());
  forcing.topRows(n) = h.B * xi_total;
  const Mat xv = lp(phi_inv * forcing);
  const Mat dv = (phi * xv).topRows(n);
  Mat fe = Mat::Zero(2 * n, xi_total.cols());
  fe.bottomRows(n) = h.form.F1 * (gv + dv) + h.form.F2.transpose() * xi_total;
  const Mat xe = lp(phi_inv * fe);
  return xv + xe;
}

}  // namespace

Mat StationaryLPSystem::apply_T(const Mat& xi) const {
  auto lp = [this](const Mat& f) { return lp_frame(f); };
  return control_from_frame(chain(*this, phi_, phi_inv_, *ham_, xi, Mat::Zero(n_, xi.cols()), lp));
}

Mat StationaryLPSystem::frame_from_control(const Mat& xi, const Vec& zeta) const {
  const Mat g = g_frame(zeta);
  const Mat xi_g = control_from_frame(g);
  const Mat gv = (phi_ * g).topRows(n_);
  auto lp = [this](const Mat& f) { return lp_frame(f); };
  return chain(*this, phi_, phi_inv_, *ham_, Mat(xi + xi_g), gv, lp);
}

Mat StationaryLPSystem::apply_T0(const Vec& zeta) const {
  return control_from_frame(frame_from_control(Mat::Zero(ham_->B.cols(), nodes_), zeta));
}

StationaryLPSystem::PicardResult StationaryLPSystem::picard(const Vec& zeta, int max_iter, double tol) const {
  const Mat t0 = apply_T0(zeta);
  Mat xi = t0;
  PicardResult r;
  const double scale = std::max(1.0, t0.cwiseAbs().maxCoeff());
  for (r.iterations = 1; r.iterations <= max_iter; ++r.iterations) {
    const Mat next = apply_T(xi) + t0;
    const double change = (next - xi).cwiseAbs().maxCoeff();
    xi = next;
    if (!std::isfinite(change)) break;
    if (change <= tol * scale) {
      r.converged = true;
      break;
    }
  }
  r.x = frame_from_control(xi, zeta);
  return r;
}

StationaryLPSystem::PicardResult StationaryLPSystem::naive_paired(const Vec& zeta, int max_iter, double tol) const {
  const Mat g = g_frame(zeta);
  Mat x = Mat::Zero(2 * n_, nodes_);
  PicardResult r;
  for (r.iterations = 1; r.iterations <= max_iter; ++r.iterations) {
    const Mat next = lp_frame(rc_ * (x + g));
    const double change = (next - x).cwiseAbs().maxCoeff();
    x = next;
    if (!std::isfinite(change)) break;
    if (change <= tol * std::max(1.0, x.cwiseAbs().maxCoeff())) {
      r.converged = true;
      break;
    }
  }
  r.x = x;
  return r;
}

double invariance_defect(const Subspace& l, const Mat& h) {
  const Mat q = l.basis();
  const Mat hq = h * q;
  return linalg::spectral_norm(Mat(hq - q * (q.transpose() * hq))) / std::max(1.0, linalg::spectral_norm(h));
}

StableLagrangeResult stable_lagrange_lp(const Mat& a, const Mat& b, const QuadraticFormTriple& form,
                                        const DichotomySplit& split, const LPOptions& opts) {
  if (split.n() != a.rows()) throw Error(ErrorCode::DimensionMismatch, "split does not match A");
  const Hamiltonian h = assemble_hamiltonian(a, b, form);
  const DichotomySplit sm = dichotomy_split(Mat(-a.transpose()));
  StableLagrangeResult res;
  LPDiagnostics& dg = res.diag;
  if (std::isnan(opts.delta_star)) {
    const FrequencyGrid grid = make_frequency_grid(a, b, form);
    if (!grid.tail_certified) throw Error(ErrorCode::FrequencyConditionFailed, "frequency tail not certified");
    dg.delta_star = frequency_condition_margin(a, b, form, grid);
  } else {
    dg.delta_star = opts.delta_star;
  }
  if (!(dg.delta_star > 0.0)) throw Error(ErrorCode::FrequencyConditionFailed, "frequency margin is not positive");
  dg.conditioning_warning = dg.delta_star < 1e-4;

  const int n = h.n();
  const double eps_a = split.eps_rate;
  const double eps_h = min_abs_real(linalg::eigenvalues(h.H));
  const double eps = std::min(eps_a, eps_h) - std::abs(opts.shift);
  if (!(eps > 0.0)) throw Error(ErrorCode::SpectrumOnAxis, "shift crosses the spectrum");
  const double required = 10.0 / eps_a;
  if (opts.horizon > 0.0 && opts.horizon < required * (1.0 - 1e-12))
    throw Error(ErrorCode::HorizonTooShort, "horizon below 10 / eps_rate");
  dg.horizon = opts.horizon > 0.0 ? opts.horizon : std::max(required, 20.0 / eps);
  const Mat breve = block_diag(a, Mat(-a.transpose()));
  const double rn = linalg::spectral_norm(Mat(h.H - breve));
  const double step = opts.h > 0.0 ? opts.h : std::min(0.06, 1.0 / std::max(1.0, rn));

  const StationaryLPSystem sys(h, split, sm, step, dg.horizon, opts.shift);
  dg.h = sys.step();
  dg.nodes = sys.nodes();
  const Mat id = Mat::Identity(n, n);

  auto solve_all = [&](const StationaryLPSystem& s) {
    if (!opts.picard) return s.solve_initial(id);
    Mat out(n, n);
    dg.picard_converged = true;
    for (int k = 0; k < n; ++k) {
      const auto pr = s.picard(id.col(k), opts.picard_max_iterations, opts.picard_tol);
      dg.picard_iterations = std::max(dg.picard_iterations, pr.iterations);
      dg.picard_converged = dg.picard_converged && pr.converged;
      out.col(k) = pr.x.col(0).tail(n);
    }
    return out;
  };

  Mat m_flat = solve_all(sys);
  if (opts.richardson) {
    // Two Romberg levels on h, h/2, h/4; the error expands in even powers of h.
    const Mat m_fine = solve_all(StationaryLPSystem(h, split, sm, 0.5 * dg.h, dg.horizon, opts.shift));
    const Mat m_finest = solve_all(StationaryLPSystem(h, split, sm, 0.25 * dg.h, dg.horizon, opts.shift));
    dg.richardson_change = (m_fine - m_flat).cwiseAbs().maxCoeff();
    const Mat r1 = (4.0 * m_fine - m_flat) / 3.0;
    const Mat r2 = (4.0 * m_finest - m_fine) / 3.0;
    m_flat = (16.0 * r2 - r1) / 15.0;
  }
  res.L_plus = Subspace(Mat(sys.sharp_basis() + sys.flat_basis() * m_flat));
  res.M_plus = graph_over(res.L_plus, Subspace(sys.sharp_basis()), Subspace(sys.flat_basis()));
  dg.invariance_defect = invariance_defect(res.L_plus, h.H);
  dg.isotropy_defect = isotropy_defect(res.L_plus);

  for (int k = 0; k < n; ++k) {
    const Mat x = sys.solve_frame(id.col(k));
    const Mat xi = sys.control_from_frame(x);
    const Mat r = xi - sys.apply_T(xi) - sys.apply_T0(id.col(k));
    dg.fixed_point_residual =
        std::max(dg.fixed_point_residual, r.cwiseAbs().maxCoeff() / std::max(1.0, xi.cwiseAbs().maxCoeff()));
  }
  if (opts.keep_trajectories)
    for (int k = 0; k < n; ++k) res.trajectories.push_back(sys.trajectory(id.col(k)));
  return res;
}

}  // namespace lqrlag
