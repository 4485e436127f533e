#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>

namespace lqrlag {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using cplx = std::complex<double>;

namespace linalg {

double spectral_norm(const Mat& a);
double spectral_norm(const CMat& a);
double min_singular_value(const CMat& a);

inline Mat symmetric_part(const Mat& a) { return 0.5 * (a + a.transpose()); }
inline CMat hermitian_part(const CMat& a) { return 0.5 * (a + a.adjoint()); }

double min_eigenvalue_sym(const Mat& a);
double min_eigenvalue_herm(const CMat& a);

/// Orthonormal basis of the column span (column-pivoted QR), numerical rank
/// decided relative to the largest pivot.
Mat orthonormalize(const Mat& spanning, double rel_tol = 1e-10);

/// Orthonormal basis of the orthogonal complement of span(basis).
Mat orthogonal_complement(const Mat& basis, double rel_tol = 1e-10);

/// Numerical rank: singular values above rel_tol * sigma_max.
int numerical_rank(const Mat& a, double rel_tol);

Mat expm(const Mat& a);

/// e^X, phi1(X) = X^{-1}(e^X - I), phi2(X) = X^{-2}(e^X - I - X), all from one
/// augmented exponential so that singular X is fine.
struct PhiSet {
  Mat E, phi1, phi2;
};
PhiSet phi_functions(const Mat& x);

double phi1(double x);
double phi2(double x);

CVec eigenvalues(const Mat& a);

/// Complex Schur form A = U T U^H reordered so that the eigenvalues accepted by
/// `select` occupy the leading diagonal block. Returns the block size.
int ordered_complex_schur(const Mat& a, const std::function<bool(cplx)>& select, CMat& t, CMat& u);

/// Real orthonormal basis of the invariant subspace for the selected eigenvalues.
/// The selection must be closed under conjugation.
Mat invariant_subspace(const Mat& a, const std::function<bool(cplx)>& select);

}  // namespace linalg
}  // namespace lqrlag
