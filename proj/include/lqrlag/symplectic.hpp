#pragma once

#include "lqrlag/linalg.hpp"

#include <json.hpp>

namespace lqrlag {

/// Linear subspace held by a column-orthonormal basis.
class Subspace {
public:
  Subspace() = default;
  /// Orthonormalizes the columns of `spanning`; rank-deficient input keeps its rank.
  explicit Subspace(const Mat& spanning, double rel_tol = 1e-10);

  const Mat& basis() const { return basis_; }
  int dim() const { return static_cast<int>(basis_.cols()); }
  int ambient() const { return static_cast<int>(basis_.rows()); }
  Mat projector() const { return basis_ * basis_.transpose(); }

private:
  Mat basis_;
};

/// Complex structure J(v, eta) = (-eta, v) on H x H.
Vec apply_J(const Vec& z);
Mat J_matrix(int n);
Subspace apply_J(const Subspace& l);

Subspace horizontal_subspace(int n);  // H x {0}
Subspace vertical_subspace(int n);    // {0} x H
Subspace orthogonal_complement(const Subspace& l);

/// max |<b_i, J b_j>| over basis pairs.
double isotropy_defect(const Subspace& l);

/// Operator norm of the difference of orthogonal projectors.
double grassmann_distance(const Subspace& a, const Subspace& b);

/// L = { z_sharp + F M x : z_sharp = S x }, with M acting on sharp coordinates
/// (w.r.t. the orthonormal basis S) and producing flat coordinates.
struct GraphOperator {
  Mat M;
  Subspace sharp, flat;
};

GraphOperator graph_over(const Subspace& l, const Subspace& sharp, const Subspace& flat, double tol = 1e-10);
Subspace graph_subspace(const GraphOperator& g);

struct LagrangeCheck {
  bool is_lagrange = false;
  double defect = 0.0;
  double margin = 0.0;  // tol - defect, or -1 when the dimension is wrong
};

LagrangeCheck is_lagrange(const Subspace& l, double tol = 1e-8);

/// dim(L1 cap L2) from the nullity of [B1 | -B2].
int intersection_dimension(const Subspace& a, const Subspace& b, double rel_tol = 1e-8);
/// dim((L1 + L2)^perp).
int sum_codimension(const Subspace& a, const Subspace& b, double rel_tol = 1e-8);

/// Ran(Pi) x {0} + {0} x Ran(Pi)^perp, Lagrange for any projector Pi.
Subspace lagrange_from_projector(const Mat& pi);

/// Basis stored column-major: {"ambient": m, "dim": d, "basis": [b_11, b_21, ...]}.
nlohmann::json to_json(const Subspace& l);
Subspace subspace_from_json(const nlohmann::json& j);

}  // namespace lqrlag
