#include "lqrlag/linalg.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>

namespace lqrlag::linalg {

double spectral_norm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues()(0);
}

double spectral_norm(const CMat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMat> svd(a);
  return svd.singularValues()(0);
}

double min_singular_value(const CMat& a) {
  Eigen::JacobiSVD<CMat> svd(a);
  const auto& s = svd.singularValues();
  return s.size() == 0 ? 0.0 : s(s.size() - 1);
}

double min_eigenvalue_sym(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetric_part(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double min_eigenvalue_herm(const CMat& a) {
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

Mat orthonormalize(const Mat& spanning, double rel_tol) {
  const Eigen::Index rows = spanning.rows();
  if (spanning.cols() == 0 || rows == 0) return Mat(rows, 0);
  Eigen::ColPivHouseholderQR<Mat> qr(spanning);
  const Mat r = qr.matrixR().template triangularView<Eigen::Upper>();
  const double top = std::abs(r(0, 0));
  Eigen::Index rank = 0;
  const Eigen::Index kmax = std::min(rows, spanning.cols());
  if (top > 0.0) {
    while (rank < kmax && std::abs(r(rank, rank)) > rel_tol * top) ++rank;
  }
  Mat q = qr.householderQ() * Mat::Identity(rows, rank);
  return q;
}

Mat orthogonal_complement(const Mat& basis, double rel_tol) {
  const Eigen::Index n = basis.rows();
  if (basis.cols() == 0) return Mat::Identity(n, n);
  Eigen::JacobiSVD<Mat> svd(basis, Eigen::ComputeFullU);
  const auto& s = svd.singularValues();
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > rel_tol * s(0)) ++rank;
  return svd.matrixU().rightCols(n - rank);
}

int numerical_rank(const Mat& a, double rel_tol) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(a);
  const auto& s = svd.singularValues();
  if (s(0) == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > rel_tol * s(0)) ++rank;
  return rank;
}

Mat expm(const Mat& a) { return a.exp(); }

PhiSet phi_functions(const Mat& x) {
  const Eigen::Index n = x.rows();
  Mat aug = Mat::Zero(3 * n, 3 * n);
  aug.topLeftCorner(n, n) = x;
  aug.block(0, n, n, n).setIdentity();
  aug.block(n, 2 * n, n, n).setIdentity();
  const Mat e = aug.exp();
  return {e.topLeftCorner(n, n), e.block(0, n, n, n), e.block(0, 2 * n, n, n)};
}

double phi1(double x) {
  if (std::abs(x) < 1e-5) return 1.0 + x / 2.0 + x * x / 6.0;
  return std::expm1(x) / x;
}

double phi2(double x) {
  if (std::abs(x) < 0.1) {
    // Taylor series sum_k x^k/(k+2)!, truncated where the tail is below 1e-18.
    double term = 0.5, sum = 0.0;
    for (int k = 0; k < 12; ++k) {
      sum += term;
      term *= x / static_cast<double>(k + 3);
    }
    return sum;
  }
  return (std::expm1(x) - x) / (x * x);
}

CVec eigenvalues(const Mat& a) {
  Eigen::EigenSolver<Mat> es(a, false);
  return es.eigenvalues();
}

namespace {

// Swap diagonal entries k, k+1 of the upper triangular t with a unitary
// rotation, keeping A = U T U^H.
void swap_adjacent(CMat& t, CMat& u, Eigen::Index k) {
  const cplx a = t(k, k), b = t(k + 1, k + 1), x = t(k, k + 1);
  const cplx d = b - a;
  const double r = std::sqrt(std::norm(x) + std::norm(d));
  if (r == 0.0) return;
  const cplx q1 = x / r, q2 = d / r;
  Eigen::Matrix2cd g;
  g << std::conj(q1), std::conj(q2), -q2, q1;
  const Eigen::Index n = t.rows();
  Eigen::Matrix<cplx, 2, Eigen::Dynamic> rows(2, n);
  rows.row(0) = t.row(k);
  rows.row(1) = t.row(k + 1);
  rows = g * rows;
  t.row(k) = rows.row(0);
  t.row(k + 1) = rows.row(1);
  const Eigen::Matrix2cd gh = g.adjoint();
  Eigen::Matrix<cplx, Eigen::Dynamic, 2> cols(n, 2);
  cols.col(0) = t.col(k);
  cols.col(1) = t.col(k + 1);
  cols = cols * gh;
  t.col(k) = cols.col(0);
  t.col(k + 1) = cols.col(1);
  t(k + 1, k) = 0.0;
  Eigen::Matrix<cplx, Eigen::Dynamic, 2> uc(u.rows(), 2);
  uc.col(0) = u.col(k);
  uc.col(1) = u.col(k + 1);
  uc = uc * gh;
  u.col(k) = uc.col(0);
  u.col(k + 1) = uc.col(1);
}

}  // namespace

int ordered_complex_schur(const Mat& a, const std::function<bool(cplx)>& select, CMat& t, CMat& u) {
  const Eigen::Index n = a.rows();
  if (n == 0) {
    t = CMat(0, 0);
    u = CMat(0, 0);
    return 0;
  }
  Eigen::ComplexSchur<CMat> cs(a.cast<cplx>());
  t = cs.matrixT();
  u = cs.matrixU();
  // Strictly lower part is zero in exact arithmetic; clear roundoff.
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j + 1; i < n; ++i) t(i, j) = 0.0;
  Eigen::Index placed = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!select(t(j, j))) continue;
    for (Eigen::Index k = j; k > placed; --k) swap_adjacent(t, u, k - 1);
    ++placed;
  }
  return static_cast<int>(placed);
}

Mat invariant_subspace(const Mat& a, const std::function<bool(cplx)>& select) {
  CMat t, u;
  const int k = ordered_complex_schur(a, select, t, u);
  const Eigen::Index n = a.rows();
  if (k == 0) return Mat(n, 0);
  const CMat qk = u.leftCols(k);
  const Mat proj = (qk * qk.adjoint()).real();
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetric_part(proj));
  // Eigenvalues ascending; the invariant subspace is the eigenvalue-1 block.
  Mat basis = es.eigenvectors().rightCols(k);
  return orthonormalize(basis);
}

}  // namespace lqrlag::linalg
