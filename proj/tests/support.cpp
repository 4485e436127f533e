#include "support.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace support {

Mat gaussian(Rng& rng, int rows, int cols, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  Mat m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = g(rng);
  return m;
}

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

Mat random_generator(Rng& rng, int n, int j, double min_rate) {
  Mat d = Mat::Zero(n, n);
  int i = 0;
  auto real_part = [&](bool unstable) {
    const double r = uniform(rng, min_rate, min_rate + 2.0);
    return unstable ? r : -r;
  };
  // Unstable eigenvalues come first; a rotation block never straddles the split.
  while (i < n) {
    const bool unstable = i < j;
    const int left = unstable ? j - i : n - i;
    if (left >= 2 && uniform(rng, 0.0, 1.0) < 0.4) {
      const double re = real_part(unstable), im = uniform(rng, 0.2, 2.0);
      d(i, i) = re;
      d(i + 1, i + 1) = re;
      d(i, i + 1) = im;
      d(i + 1, i) = -im;
      i += 2;
    } else {
      d(i, i) = real_part(unstable);
      ++i;
    }
  }
  const Mat s = Mat::Identity(n, n) + gaussian(rng, n, n, 0.3 / std::sqrt(double(n)));
  return s * d * s.inverse();
}

System random_system(Rng& rng, int n, int m, int j, double min_margin) {
  System sys;
  sys.j = j;
  sys.A = random_generator(rng, n, j);
  sys.B = gaussian(rng, n, m);
  const Mat r = gaussian(rng, m, m, 0.3);
  const Mat f3 = Mat::Identity(m, m) + r * r.transpose();
  // With |C| R < 1, R = sup |(A - iw)^{-1} B|, the term -|Cv|^2 cannot cancel |xi|^2.
  const auto grid0 = lqrlag::make_frequency_grid(sys.A, sys.B, lqrlag::make_form(Mat::Zero(n, n), Mat::Zero(m, n), f3));
  const double res = lqrlag::resolvent_sup(sys.A, sys.B, grid0);
  const Mat c0 = gaussian(rng, n, n);
  Mat c = c0 * (uniform(rng, 0.4, 0.9) / (res * lqrlag::linalg::spectral_norm(c0)));
  const Mat f2 = gaussian(rng, m, n, 0.1 / (1.0 + res));
  const Mat g = gaussian(rng, n, n, 0.2);
  for (;;) {
    const Mat f1 = lqrlag::linalg::symmetric_part(Mat(-c.transpose() * c + g * g.transpose()));
    sys.form = lqrlag::make_form(f1, f2, f3);
    const auto grid = lqrlag::make_frequency_grid(sys.A, sys.B, sys.form);
    if (grid.tail_certified) {
      sys.margin = lqrlag::frequency_condition_margin(sys.A, sys.B, sys.form, grid);
      if (sys.margin > min_margin) return sys;
    }
    c *= 0.5;
  }
}

Mat hamiltonian_oracle(const Mat& A, const Mat& B, const Mat& F1, const Mat& F2, const Mat& F3) {
  const Mat f3i = F3.inverse();
  const Mat ahat = A - B * f3i * F2;
  const int n = static_cast<int>(A.rows());
  Mat h(2 * n, 2 * n);
  h.topLeftCorner(n, n) = ahat;
  h.topRightCorner(n, n) = B * f3i * B.transpose();
  h.bottomLeftCorner(n, n) = F1 - F2.transpose() * f3i * F2;
  h.bottomRightCorner(n, n) = -ahat.transpose();
  return h;
}

Mat stable_eigenspace(const Mat& h) {
  Eigen::EigenSolver<Mat> es(h);
  Mat span(h.rows(), 0);
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    if (es.eigenvalues()(i).real() >= 0.0) continue;
    const Eigen::VectorXcd v = es.eigenvectors().col(i);
    span.conservativeResize(Eigen::NoChange, span.cols() + 2);
    span.col(span.cols() - 2) = v.real();
    span.col(span.cols() - 1) = v.imag();
  }
  Eigen::JacobiSVD<Mat> svd(span, Eigen::ComputeThinU);
  int rank = 0;
  const double top = svd.singularValues()(0);
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > 1e-9 * top) ++rank;
  return svd.matrixU().leftCols(rank);
}

double projector_gap(const Mat& a, const Mat& b) {
  const Mat d = a * a.transpose() - b * b.transpose();
  return Eigen::JacobiSVD<Mat>(d).singularValues()(0);
}

double isotropy(const Mat& q) {
  const int n = static_cast<int>(q.rows() / 2);
  Mat j = Mat::Zero(2 * n, 2 * n);
  j.topRightCorner(n, n) = -Mat::Identity(n, n);
  j.bottomLeftCorner(n, n) = Mat::Identity(n, n);
  return (q.transpose() * j * q).cwiseAbs().maxCoeff();
}

double s1_closed_form() {
  Mat h(2, 2);
  h << -2.0, 1.0, -1.0, 2.0;
  const Mat q = stable_eigenspace(h);
  return -q(1, 0) / q(0, 0);
}

std::vector<double> observed_orders(const std::vector<double>& errors) {
  std::vector<double> out;
  for (size_t i = 0; i + 1 < errors.size(); ++i) out.push_back(std::log2(errors[i] / errors[i + 1]));
  return out;
}

lqrlag::SAConfig standard_sa_config(int k) {
  return lqrlag::make_sa_config(lqrlag::power_model(10, 2.0), 1.0, 1.0, k, 2, 2.0);
}

lqrlag::Driver standard_driver() {
  return lqrlag::driver_make(lqrlag::DriverKind::Periodic, 1.5, {0.5}, {1.0}, 2.0);
}

std::string source_dir() { return LQRLAG_SOURCE_DIR; }

}  // namespace support
