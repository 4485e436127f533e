#include "lqrlag/symplectic.hpp"

#include "lqrlag/errors.hpp"

#include <cmath>
#include <vector>

namespace lqrlag {

Subspace::Subspace(const Mat& spanning, double rel_tol) : basis_(linalg::orthonormalize(spanning, rel_tol)) {}

Vec apply_J(const Vec& z) {
  if (z.size() % 2 != 0) throw Error(ErrorCode::OddLength, "J needs an even-length vector");
  const Eigen::Index n = z.size() / 2;
  Vec out(z.size());
  out.head(n) = -z.tail(n);
  out.tail(n) = z.head(n);
  return out;
}

Mat J_matrix(int n) {
  Mat j = Mat::Zero(2 * n, 2 * n);
  j.topRightCorner(n, n) = -Mat::Identity(n, n);
  j.bottomLeftCorner(n, n) = Mat::Identity(n, n);
  return j;
}

Subspace apply_J(const Subspace& l) {
  if (l.ambient() % 2 != 0) throw Error(ErrorCode::OddLength, "J needs an even ambient dimension");
  return Subspace(J_matrix(l.ambient() / 2) * l.basis());
}

Subspace horizontal_subspace(int n) {
  Mat b = Mat::Zero(2 * n, n);
  b.topRows(n).setIdentity();
  return Subspace(b);
}

Subspace vertical_subspace(int n) {
  Mat b = Mat::Zero(2 * n, n);
  b.bottomRows(n).setIdentity();
  return Subspace(b);
}

Subspace orthogonal_complement(const Subspace& l) { return Subspace(linalg::orthogonal_complement(l.basis())); }

double isotropy_defect(const Subspace& l) {
  if (l.dim() == 0) return 0.0;
  if (l.ambient() % 2 != 0) throw Error(ErrorCode::OddLength, "isotropy needs an even ambient dimension");
  const Mat& b = l.basis();
  return (b.transpose() * J_matrix(l.ambient() / 2) * b).cwiseAbs().maxCoeff();
}

double grassmann_distance(const Subspace& a, const Subspace& b) {
  if (a.ambient() != b.ambient()) throw Error(ErrorCode::DimensionMismatch, "ambient dimensions differ");
  return linalg::spectral_norm(Mat(a.projector() - b.projector()));
}

GraphOperator graph_over(const Subspace& l, const Subspace& sharp, const Subspace& flat, double tol) {
  const int m = l.ambient();
  if (sharp.ambient() != m || flat.ambient() != m)
    throw Error(ErrorCode::DimensionMismatch, "ambient dimensions differ");
  if (sharp.dim() + flat.dim() != m) throw Error(ErrorCode::NotADirectSum, "dimensions do not add up");
  Mat frame(m, m);
  frame << sharp.basis(), flat.basis();
  Eigen::FullPivLU<Mat> lu(frame);
  lu.setThreshold(1e-10);
  if (!lu.isInvertible()) throw Error(ErrorCode::NotADirectSum, "subspaces intersect");
  if (l.dim() != sharp.dim()) throw Error(ErrorCode::NotAGraph, "dimension differs from the sharp part");
  const Mat coords = lu.solve(l.basis());
  const Mat x = coords.topRows(sharp.dim());
  const Mat y = coords.bottomRows(flat.dim());
  if (x.size() > 0) {
    Eigen::JacobiSVD<Mat> svd(x);
    if (svd.singularValues()(x.rows() - 1) < tol)
      throw Error(ErrorCode::NotAGraph, "projection onto the sharp part is not injective");
  }
  GraphOperator g;
  g.M = x.size() > 0 ? Mat(y * x.inverse()) : Mat(flat.dim(), 0);
  g.sharp = sharp;
  g.flat = flat;
  return g;
}

Subspace graph_subspace(const GraphOperator& g) {
  return Subspace(Mat(g.sharp.basis() + g.flat.basis() * g.M));
}

LagrangeCheck is_lagrange(const Subspace& l, double tol) {
  LagrangeCheck c;
  c.defect = isotropy_defect(l);
  if (2 * l.dim() != l.ambient()) {
    c.margin = -1.0;
    return c;
  }
  c.margin = tol - c.defect;
  c.is_lagrange = c.margin >= 0.0;
  return c;
}

namespace {

Mat concat(const Subspace& a, const Subspace& b) {
  if (a.ambient() != b.ambient()) throw Error(ErrorCode::DimensionMismatch, "ambient dimensions differ");
  Mat c(a.ambient(), a.dim() + b.dim());
  c << a.basis(), -b.basis();
  return c;
}

}  // namespace

int intersection_dimension(const Subspace& a, const Subspace& b, double rel_tol) {
  const Mat c = concat(a, b);
  return static_cast<int>(c.cols()) - linalg::numerical_rank(c, rel_tol);
}

int sum_codimension(const Subspace& a, const Subspace& b, double rel_tol) {
  const Mat c = concat(a, b);
  return a.ambient() - linalg::numerical_rank(c, rel_tol);
}

Subspace lagrange_from_projector(const Mat& pi) {
  const Eigen::Index n = pi.rows();
  const Mat range = linalg::orthonormalize(pi, 1e-10);
  const Mat perp = linalg::orthogonal_complement(range);
  Mat b = Mat::Zero(2 * n, n);
  b.topLeftCorner(n, range.cols()) = range;
  b.bottomRightCorner(n, perp.cols()) = perp;
  return Subspace(b);
}

nlohmann::json to_json(const Subspace& l) {
  const Mat& b = l.basis();
  std::vector<double> flat(b.data(), b.data() + b.size());  // Eigen storage is column-major
  return {{"ambient", l.ambient()}, {"dim", l.dim()}, {"basis", flat}};
}

Subspace subspace_from_json(const nlohmann::json& j) {
  for (const char* key : {"ambient", "dim", "basis"})
    if (!j.contains(key)) throw Error(ErrorCode::MissingField, std::string("subspace.") + key);
  const int m = j.at("ambient").get<int>(), d = j.at("dim").get<int>();
  const auto flat = j.at("basis").get<std::vector<double>>();
  if (static_cast<int>(flat.size()) != m * d) throw Error(ErrorCode::DimensionMismatch, "basis length != ambient*dim");
  return Subspace(Eigen::Map<const Mat>(flat.data(), m, d));
}

}  // namespace lqrlag
