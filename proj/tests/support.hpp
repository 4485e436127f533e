#pragma once

// Generators and independent oracles shared by the unit tests and the acceptance binary.

#include "lqrlag/frequency.hpp"
#include "lqrlag/linalg.hpp"
#include "lqrlag/spatial_averaging.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace support {

using lqrlag::Mat;
using lqrlag::Vec;

using Rng = std::mt19937_64;

Mat gaussian(Rng& rng, int rows, int cols, double scale = 1.0);
double uniform(Rng& rng, double lo, double hi);

/// Real matrix with exactly j eigenvalues in Re > 0 and every |Re lambda| >= min_rate.
/// Built as S D S^{-1} with D block diagonal (real eigenvalues and rotation blocks).
Mat random_generator(Rng& rng, int n, int j, double min_rate = 0.3);

struct System {
  Mat A, B;
  lqrlag::QuadraticFormTriple form;
  int j = 0;
  double margin = 0.0;  // frequency margin of the accepted system
};

/// F3 = I + sym PSD, F2 small, F1 = -C^T C + G with G >= 0. C is scaled down until the
/// frequency margin exceeds min_margin.
System random_system(Rng& rng, int n, int m, int j, double min_margin = 0.05);

/// Independent assembly of the Hamiltonian from explicit inverses.
Mat hamiltonian_oracle(const Mat& A, const Mat& B, const Mat& F1, const Mat& F2, const Mat& F3);

/// Span of the eigenvectors of h with Re < 0 (real and imaginary parts), orthonormalized.
Mat stable_eigenspace(const Mat& h);

/// |P_a - P_b| for orthonormal bases a, b.
double projector_gap(const Mat& a, const Mat& b);

/// omega^T J omega residual |Q^T J Q| of an orthonormal basis.
double isotropy(const Mat& q);

/// P = sqrt(3) - 2 for A = -2, B = 1, F1 = -1, F2 = 0, F3 = 1, computed from the stable
/// eigenvector of the 2 x 2 Hamiltonian.
double s1_closed_form();

/// Observed convergence orders log2(e_i / e_{i+1}) for errors on grids refined by 2.
std::vector<double> observed_orders(const std::vector<double>& errors);

/// SA instance lambda_j = j^2 (n = 10), Lambda = delta = 1, k = 3, N = 2, |a| <= 2.
lqrlag::SAConfig standard_sa_config(int k = 3);
/// a(theta^t q) = 1.5 + 0.5 sin(t + q).
lqrlag::Driver standard_driver();

std::string source_dir();

}  // namespace support
