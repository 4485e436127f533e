#include "lqrlag/symplectic.hpp"

#include "expect_error.hpp"
#include "support.hpp"

using namespace lqrlag;

namespace {

Mat graph_basis(const Mat& s) {
  const int n = static_cast<int>(s.rows());
  Mat g(2 * n, n);
  g << Mat::Identity(n, n), s;
  return g;
}

Mat random_symmetric(support::Rng& rng, int n) {
  const Mat g = support::gaussian(rng, n, n);
  return g + g.transpose();
}

}  // namespace

TEST(Symplectic, JSquaresToMinusIdentity) {
  const Mat j = J_matrix(3);
  EXPECT_LT((j * j + Mat::Identity(6, 6)).norm(), 1e-15);
  const Vec z = Vec::LinSpaced(6, 1.0, 6.0);
  EXPECT_LT((apply_J(z) - j * z).norm(), 1e-15);
  EXPECT_ERROR_CODE(apply_J(Vec::Ones(3)), ErrorCode::OddLength);
}

TEST(Symplectic, CoordinateSubspacesAreLagrange) {
  for (int n : {1, 2, 5}) {
    EXPECT_TRUE(is_lagrange(horizontal_subspace(n)).is_lagrange);
    EXPECT_TRUE(is_lagrange(vertical_subspace(n)).is_lagrange);
    EXPECT_EQ(intersection_dimension(horizontal_subspace(n), vertical_subspace(n)), 0);
    EXPECT_NEAR(grassmann_distance(horizontal_subspace(n), vertical_subspace(n)), 1.0, 1e-14);
  }
}

TEST(Symplectic, SymmetricGraphsAreLagrangeProperty) {
  support::Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 12);
    const Subspace l(graph_basis(random_symmetric(rng, n)));
    const LagrangeCheck c = is_lagrange(l);
    EXPECT_TRUE(c.is_lagrange);
    EXPECT_LT(c.defect, 1e-12);
    EXPECT_NEAR(isotropy_defect(l), support::isotropy(l.basis()), 1e-12);
    // J L is the orthogonal complement of L.
    EXPECT_LT(grassmann_distance(apply_J(l), orthogonal_complement(l)), 1e-12);
  }
}

TEST(Symplectic, NonSymmetricGraphIsNotIsotropic) {
  Mat s(2, 2);
  s << 0.0, 1.0, 0.0, 0.0;
  const LagrangeCheck c = is_lagrange(Subspace(graph_basis(s)));
  EXPECT_FALSE(c.is_lagrange);
  EXPECT_GT(c.defect, 0.1);
  const LagrangeCheck wrong_dim = is_lagrange(Subspace(Mat::Identity(4, 1)));
  EXPECT_FALSE(wrong_dim.is_lagrange);
  EXPECT_EQ(wrong_dim.margin, -1.0);
}

TEST(Symplectic, GrassmannMetricProperty) {
  support::Rng rng(22);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 8);
    const Subspace a(graph_basis(random_symmetric(rng, n)));
    const Subspace b(graph_basis(random_symmetric(rng, n)));
    const Subspace c(graph_basis(random_symmetric(rng, n)));
    const double ab = grassmann_distance(a, b);
    EXPECT_NEAR(ab, grassmann_distance(b, a), 1e-14);
    EXPECT_LE(ab, 1.0 + 1e-14);
    EXPECT_GE(ab, 0.0);
    EXPECT_LT(grassmann_distance(a, a), 1e-14);
    EXPECT_LE(grassmann_distance(a, c), ab + grassmann_distance(b, c) + 1e-12);
    EXPECT_NEAR(ab, support::projector_gap(a.basis(), b.basis()), 1e-12);
  }
}

TEST(Symplectic, GraphOverRecoversOperatorProperty) {
  support::Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 8);
    const Mat s = random_symmetric(rng, n);
    const GraphOperator g = graph_over(Subspace(graph_basis(s)), horizontal_subspace(n), vertical_subspace(n));
    // M acts between the stored orthonormal bases; in ambient coordinates it is s.
    const Mat ambient = g.flat.basis() * g.M * g.sharp.basis().transpose();
    EXPECT_LT((ambient.bottomLeftCorner(n, n) - s).norm(), 1e-10 * (1.0 + s.norm()));
    EXPECT_LT(grassmann_distance(graph_subspace(g), Subspace(graph_basis(s))), 1e-12);
  }
  EXPECT_ERROR_CODE(graph_over(vertical_subspace(2), horizontal_subspace(2), vertical_subspace(2)),
                    ErrorCode::NotAGraph);
  EXPECT_ERROR_CODE(graph_over(vertical_subspace(2), horizontal_subspace(2), horizontal_subspace(2)),
                    ErrorCode::NotADirectSum);
}

TEST(Symplectic, IntersectionAndCodimension) {
  // L = span(e1, f2) in H x H with H = R^2 meets the vertical subspace in span(f2).
  Mat b = Mat::Zero(4, 2);
  b(0, 0) = 1.0;
  b(3, 1) = 1.0;
  const Subspace l(b);
  EXPECT_TRUE(is_lagrange(l).is_lagrange);
  EXPECT_EQ(intersection_dimension(l, vertical_subspace(2)), 1);
  EXPECT_EQ(sum_codimension(l, vertical_subspace(2)), 1);
  EXPECT_EQ(sum_codimension(horizontal_subspace(2), vertical_subspace(2)), 0);
}

TEST(Symplectic, JsonRoundTripAndProjector) {
  support::Rng rng(24);
  const Subspace l(graph_basis(random_symmetric(rng, 3)));
  const Subspace back = subspace_from_json(to_json(l));
  EXPECT_LT(grassmann_distance(l, back), 1e-15);
  // Pi projects onto span(e1 + e2) in R^3; the result is Ran Pi x Ker Pi.
  Mat pi = Mat::Zero(3, 3);
  pi.topLeftCorner(2, 2).setConstant(0.5);
  const Subspace from_pi = lagrange_from_projector(pi);
  EXPECT_TRUE(is_lagrange(from_pi).is_lagrange);
  Mat expected = Mat::Zero(6, 3);
  expected(0, 0) = expected(1, 0) = 1.0;
  expected(3, 1) = 1.0;
  expected(4, 1) = -1.0;
  expected(5, 2) = 1.0;
  EXPECT_LT(grassmann_distance(from_pi, Subspace(expected)), 1e-12);
}
