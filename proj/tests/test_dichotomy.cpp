#include "lqrlag/dichotomy.hpp"

#include "expect_error.hpp"
#include "support.hpp"

#include <cmath>

using namespace lqrlag;

namespace {

GridFunction gaussian_forcing(const Vec& direction, double half_width, int nodes) {
  GridFunction f = GridFunction::uniform(-half_width, half_width, nodes, static_cast<int>(direction.size()));
  for (int i = 0; i < f.nodes(); ++i) f.values.col(i) = std::exp(-f.times(i) * f.times(i)) * direction;
  return f;
}

}  // namespace

TEST(Dichotomy, SplitMatchesConstructedSpectrumProperty) {
  support::Rng rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 10);
    const int j = static_cast<int>(rng() % (n + 1));
    const Mat a = support::random_generator(rng, n, j);
    const DichotomySplit s = dichotomy_split(a);
    EXPECT_EQ(s.rank_j, j);
    EXPECT_EQ(s.stable.dim(), n - j);
    EXPECT_GE(s.eps_rate, 0.3 - 1e-9);
    const Mat id = Mat::Identity(n, n);
    EXPECT_LT((s.pi_stable + s.pi_unstable - id).norm(), 1e-9);
    EXPECT_LT((s.pi_stable * s.pi_stable - s.pi_stable).norm(), 1e-9);
    EXPECT_LT((a * s.pi_stable - s.pi_stable * a).norm(), 1e-9 * (1.0 + a.norm()));
  }
}

TEST(Dichotomy, AxisSpectrumIsRejected) {
  Mat a(2, 2);
  a << 0.0, 1.0, -1.0, 0.0;
  EXPECT_ERROR_CODE(dichotomy_split(a), ErrorCode::SpectrumOnAxis);
}

TEST(Dichotomy, GreenKernelJumpIsIdentityProperty) {
  support::Rng rng(32);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 6);
    const DichotomySplit s = dichotomy_split(support::random_generator(rng, n, static_cast<int>(rng() % (n + 1))));
    const double t = support::uniform(rng, -3.0, 3.0);
    const Mat jump = green_kernel(s, t + 1e-12, t) - green_kernel(s, t - 1e-12, t);
    EXPECT_LT((jump - Mat::Identity(n, n)).norm(), 1e-9);
    // Both one-sided kernels decay at the dichotomy rate.
    const double lag = 8.0;
    const double bound = 10.0 * s.M_const * std::exp(-s.eps_rate * lag) + 1e-14;
    EXPECT_LT(linalg::spectral_norm(green_kernel(s, t + lag, t)), bound);
    EXPECT_LT(linalg::spectral_norm(green_kernel(s, t - lag, t)), bound);
  }
}

TEST(Dichotomy, ExpStepMatchesClosedForm) {
  support::Rng rng(33);
  const Mat x = support::random_generator(rng, 4, 1);
  const double h = 0.05;
  const ExpStep st = exp_step(x, h);
  EXPECT_LT((st.E - linalg::expm(Mat(h * x))).norm(), 1e-13);
  // A constant forcing integrates to x^{-1} (e^{hx} - I).
  const Mat w = x.inverse() * (st.E - Mat::Identity(4, 4));
  EXPECT_LT((st.W0 + st.W1 - w).norm(), 1e-12);
}

TEST(Dichotomy, ScalarPerronSolutionsMatchErfOracle) {
  // z' = a z + exp(-t^2): bounded solutions in closed form for a = -1 and a = +1.
  const double c = std::exp(0.25) * std::sqrt(M_PI) / 2.0;
  for (double a : {-1.0, 1.0}) {
    const DichotomySplit s = dichotomy_split(Mat::Constant(1, 1, a));
    const GridFunction f = gaussian_forcing(Vec::Ones(1), 12.0, 4801);
    const LPResult r = lyapunov_perron_apply(s, f);
    double worst = 0.0;
    for (int i = 0; i < f.nodes(); ++i) {
      const double t = f.times(i);
      const double exact =
          a < 0 ? std::exp(-t) * c * (1.0 + std::erf(t - 0.5)) : -std::exp(t) * c * std::erfc(t + 0.5);
      if (std::abs(t) < 6.0) worst = std::max(worst, std::abs(r.z.values(0, i) - exact));
    }
    EXPECT_LT(worst, 1e-5) << "a = " << a;
  }
}

TEST(Dichotomy, PerronOperatorBoundsAndResolvent) {
  support::Rng rng(34);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 5);
    const DichotomySplit s = dichotomy_split(support::random_generator(rng, n, static_cast<int>(rng() % (n + 1))));
    const double half = std::max(12.0, 12.0 / s.eps_rate);
    const GridFunction f = gaussian_forcing(support::gaussian(rng, n, 1), half, 4001);
    EXPECT_LE(lp_l2_bound_ratio(s, f), 1.0 + 1e-6);
    EXPECT_LT(fourier_resolvent_check(s, f), 1e-3);
  }
}

TEST(Dichotomy, ResolventResidualConvergesAtSecondOrder) {
  support::Rng rng(35);
  const DichotomySplit s = dichotomy_split(support::random_generator(rng, 3, 1));
  const double half = std::max(12.0, 12.0 / s.eps_rate);
  const Vec dir = support::gaussian(rng, 3, 1);
  const std::vector<double> ws{0.0, 0.5, 1.0, 2.0};
  std::vector<double> errs;
  for (int nodes : {401, 801, 1601}) errs.push_back(fourier_resolvent_check(s, gaussian_forcing(dir, half, nodes), ws));
  for (double p : support::observed_orders(errs)) EXPECT_GE(p, 1.9);
}

TEST(Dichotomy, AdjointKernelIdentityProperty) {
  support::Rng rng(36);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 8);
    const Mat a = support::random_generator(rng, n, static_cast<int>(rng() % (n + 1)));
    EXPECT_LE(adjoint_kernel_defect(dichotomy_split(a), dichotomy_split(Mat(-a.transpose()))), 1e-10);
  }
}

TEST(Dichotomy, ShortHorizonIsRejected) {
  const DichotomySplit s = dichotomy_split(Mat::Constant(1, 1, -0.5));
  EXPECT_ERROR_CODE(lyapunov_perron_apply(s, gaussian_forcing(Vec::Ones(1), 5.0, 101)), ErrorCode::HorizonTooShort);
}

TEST(Dichotomy, GridFunctionCsvRoundTrip) {
  support::Rng rng(37);
  GridFunction g(Vec::LinSpaced(5, 0.0, 1.0), support::gaussian(rng, 2, 5));
  const GridFunction back = GridFunction::from_csv(g.to_csv());
  EXPECT_EQ((back.times - g.times).norm(), 0.0);
  EXPECT_EQ((back.values - g.values).norm(), 0.0);
}
