#include "lqrlag/frequency.hpp"

#include "expect_error.hpp"
#include "support.hpp"

#include <cmath>

using namespace lqrlag;

namespace {

// M(w) written out from explicit resolvent inverses.
CMat transfer_oracle(const Mat& a, const Mat& b, const QuadraticFormTriple& f, double w) {
  const int n = static_cast<int>(a.rows());
  const CMat id = CMat::Identity(n, n);
  const cplx iw(0.0, w);
  const CMat r1 = (a.cast<cplx>() - iw * id).inverse();
  const CMat r2 = (Mat(-a.transpose()).cast<cplx>() - iw * id).inverse();
  const CMat f3i = f.F3.inverse().cast<cplx>();
  return f3i * f.F2.cast<cplx>() * r1 * b.cast<cplx>() +
         f3i * b.transpose().cast<cplx>() * r2 * (f.F1.cast<cplx>() * r1 * b.cast<cplx>() - f.F2.transpose().cast<cplx>());
}

QuadraticFormTriple s1_form() { return make_form(Mat::Constant(1, 1, -1.0), Mat::Zero(1, 1), Mat::Identity(1, 1)); }

}  // namespace

TEST(Frequency, FormValidation) {
  Mat f3(2, 2);
  f3 << 1.0, 0.5, 0.0, 1.0;
  EXPECT_ERROR_CODE(make_form(Mat::Zero(1, 1), Mat::Zero(2, 1), f3), ErrorCode::NotSymmetric);
  EXPECT_ERROR_CODE(make_form(Mat::Zero(1, 1), Mat::Zero(1, 1), Mat::Constant(1, 1, -1.0)),
                    ErrorCode::NotPositiveDefinite);
  EXPECT_ERROR_CODE(make_form(Mat::Zero(2, 2), Mat::Zero(1, 1), Mat::Identity(1, 1)), ErrorCode::DimensionMismatch);
}

TEST(Frequency, ScalarMarginClosedForm) {
  // M(w) = 1 / (4 + w^2), so delta* = 3/4 at w = 0.
  const Mat a = Mat::Constant(1, 1, -2.0), b = Mat::Identity(1, 1);
  const QuadraticFormTriple f = s1_form();
  for (double w : {0.0, 0.7, 3.0, 50.0})
    EXPECT_NEAR(transfer_M(a, b, f, w)(0, 0).real(), 1.0 / (4.0 + w * w), 1e-15);
  const FrequencyGrid grid = make_frequency_grid(a, b, f);
  EXPECT_TRUE(grid.tail_certified);
  const MarginScan scan = frequency_margin_scan(a, b, f, grid);
  EXPECT_NEAR(scan.delta_star, 0.75, 1e-14);
  EXPECT_NEAR(scan.omega_argmin, 0.0, 1e-12);
  EXPECT_NEAR(inverse_norm_certificate(a, b, f, grid).max_inverse_norm, 4.0 / 3.0, 1e-12);
}

TEST(Frequency, TransferMatchesExplicitInversesProperty) {
  support::Rng rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 8), m = 1 + static_cast<int>(rng() % 3);
    const support::System s = support::random_system(rng, n, m, static_cast<int>(rng() % (n + 1)));
    const double w = support::uniform(rng, -5.0, 5.0);
    const CMat got = transfer_M(s.A, s.B, s.form, w);
    const CMat want = transfer_oracle(s.A, s.B, s.form, w);
    EXPECT_LT((got - want).norm(), 1e-10 * (1.0 + want.norm()));
    EXPECT_LT(self_adjoint_defect(s.A, s.B, s.form, w), 1e-10 * (1.0 + want.norm()));
  }
}

TEST(Frequency, InverseNormBoundProperty) {
  support::Rng rng(42);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 10), m = 1 + static_cast<int>(rng() % 3);
    const support::System s = support::random_system(rng, n, m, static_cast<int>(rng() % (n + 1)));
    const FrequencyGrid grid = make_frequency_grid(s.A, s.B, s.form);
    ASSERT_TRUE(grid.tail_certified);
    const InverseNormCertificate c = inverse_norm_certificate(s.A, s.B, s.form, grid);
    EXPECT_TRUE(c.holds);
    EXPECT_LE(c.max_inverse_norm, c.bound * (1.0 + 1e-12));
  }
}

TEST(Frequency, GridIsSymmetricAndTailBoundDecays) {
  support::Rng rng(43);
  const support::System s = support::random_system(rng, 4, 2, 1);
  const FrequencyGrid g = make_frequency_grid(s.A, s.B, s.form);
  for (size_t i = 0; i < g.omegas.size(); ++i) EXPECT_DOUBLE_EQ(g.omegas[i], -g.omegas[g.omegas.size() - 1 - i]);
  const double t1 = tail_M_bound(s.A, s.B, s.form, g.omega_max);
  const double t2 = tail_M_bound(s.A, s.B, s.form, 2.0 * g.omega_max);
  EXPECT_LT(t2, t1);
  EXPECT_GE(t1, linalg::spectral_norm(transfer_M(s.A, s.B, s.form, g.omega_max)));
}

TEST(Frequency, ViolatedConditionHasNegativeMargin) {
  // F1 = -9: M(0) = 9/4 > 1.
  const Mat a = Mat::Constant(1, 1, -2.0), b = Mat::Identity(1, 1);
  const QuadraticFormTriple f = make_form(Mat::Constant(1, 1, -9.0), Mat::Zero(1, 1), Mat::Identity(1, 1));
  const FrequencyGrid grid = make_frequency_grid(a, b, f);
  EXPECT_NEAR(frequency_condition_margin(a, b, f, grid), 1.0 - 9.0 / 4.0, 1e-12);
  EXPECT_ERROR_CODE(inverse_norm_certificate(a, b, f, grid), ErrorCode::ConditionFailed);
}

TEST(Frequency, SmithConditionOnScalar) {
  // |C (A - iw)^{-1} B| = c / sqrt(4 + w^2) peaks at c / 2.
  const Mat a = Mat::Constant(1, 1, -2.0), b = Mat::Identity(1, 1);
  const FrequencyGrid grid = make_frequency_grid(a, b, s1_form());
  const SmithResult r = smith_condition(a, b, Mat::Constant(1, 1, 1.0), 1.0, grid);
  EXPECT_NEAR(r.sup, 0.5, 1e-12);
  EXPECT_TRUE(r.holds);
  EXPECT_NEAR(resolvent_sup(a, b, grid), 0.5, 1e-12);
  EXPECT_FALSE(smith_condition(a, b, Mat::Constant(1, 1, 3.0), 1.0, grid).holds);
}
