#include "lqrlag/hamiltonian.hpp"
#include "lqrlag/pipeline.hpp"

#include "expect_error.hpp"
#include "support.hpp"

#include <cmath>

using namespace lqrlag;

namespace {

Hamiltonian ham(const support::System& s) { return assemble_hamiltonian(s.A, s.B, s.form); }

ControlTrajectory smooth_trajectory(const Mat& a, const Mat& b, const Vec& dir, double horizon, int nodes) {
  GridFunction xi = GridFunction::uniform(0.0, horizon, nodes, static_cast<int>(b.cols()));
  for (int i = 0; i < nodes; ++i) xi.values.col(i) = std::sin(xi.times(i)) * std::exp(-0.5 * xi.times(i)) * dir;
  return integrate_control_system(a, b, Vec::Zero(a.rows()), xi);
}

// A = diag(1, -1) with B acting only on the stable mode: the unstable mode is uncontrollable
// and, with no cost on it, the stable subspace contains the vertical direction of mode 1.
support::System uncontrollable_instance() {
  support::System s;
  s.A = Mat::Zero(2, 2);
  s.A(0, 0) = 1.0;
  s.A(1, 1) = -1.0;
  s.B = Mat::Zero(2, 1);
  s.B(1, 0) = 1.0;
  Mat f1 = Mat::Zero(2, 2);
  f1(1, 1) = -0.1;
  s.form = make_form(f1, Mat::Zero(1, 2), Mat::Identity(1, 1));
  s.j = 1;
  return s;
}

}  // namespace

TEST(Hamiltonian, AssemblyMatchesOracleAndIsHamiltonianProperty) {
  support::Rng rng(51);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 8), m = 1 + static_cast<int>(rng() % 3);
    const support::System s = support::random_system(rng, n, m, static_cast<int>(rng() % (n + 1)));
    const Hamiltonian h = ham(s);
    const Mat want = support::hamiltonian_oracle(s.A, s.B, s.form.F1, s.form.F2, s.form.F3);
    EXPECT_LT((h.H - want).norm(), 1e-12 * (1.0 + want.norm()));
    EXPECT_LT(h.symplectic_defect(), 1e-12 * (1.0 + want.norm()));
  }
}

TEST(Hamiltonian, ScalarInstanceClosedForm) {
  const Mat a = Mat::Constant(1, 1, -2.0), b = Mat::Identity(1, 1);
  const QuadraticFormTriple f = make_form(Mat::Constant(1, 1, -1.0), Mat::Zero(1, 1), Mat::Identity(1, 1));
  const Hamiltonian h = assemble_hamiltonian(a, b, f);
  const NonoscillationResult r = extract_nonoscillation(stable_lagrange_schur(h), h);
  const double p_closed = support::s1_closed_form();
  EXPECT_NEAR(p_closed, std::sqrt(3.0) - 2.0, 1e-14);
  EXPECT_NEAR(r.P(0, 0), p_closed, 1e-12);
  EXPECT_LT(r.riccati_residual, 1e-12);
  EXPECT_NEAR(r.K(0, 0), -p_closed, 1e-12);
}

TEST(Hamiltonian, SchurSubspaceMatchesEigenvectorOracleProperty) {
  support::Rng rng(52);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 10), m = 1 + static_cast<int>(rng() % 3);
    const support::System s = support::random_system(rng, n, m, static_cast<int>(rng() % (n + 1)));
    const Hamiltonian h = ham(s);
    const Subspace l = stable_lagrange_schur(h);
    EXPECT_TRUE(is_lagrange(l).is_lagrange);
    EXPECT_LT(support::projector_gap(l.basis(), support::stable_eigenspace(h.H)), 1e-8);
  }
}

TEST(Hamiltonian, ControllabilityGivesStabilizingRiccatiProperty) {
  support::Rng rng(53);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 8), m = 1 + static_cast<int>(rng() % 3);
    const support::System s = support::random_system(rng, n, m, static_cast<int>(rng() % (std::min(n, 2) + 1)));
    ASSERT_TRUE(l2_controllability(s.A, s.B));
    const Hamiltonian h = ham(s);
    const NonoscillationResult r = extract_nonoscillation(stable_lagrange_schur(h), h);
    EXPECT_LT((r.P - r.P.transpose()).norm(), 1e-12);
    EXPECT_LT(r.riccati_residual, 1e-8 * (1.0 + h.H.norm()) * (1.0 + r.P.norm() * r.P.norm()));
    const CVec ev = linalg::eigenvalues(Mat(s.A + s.B * r.K));
    for (Eigen::Index i = 0; i < ev.size(); ++i) EXPECT_LT(ev(i).real(), 0.0);
  }
}

TEST(Hamiltonian, UncontrollableUnstableModeOscillates) {
  const support::System s = uncontrollable_instance();
  EXPECT_FALSE(l2_controllability(s.A, s.B));
  const Hamiltonian h = ham(s);
  EXPECT_ERROR_CODE(extract_nonoscillation(stable_lagrange_schur(h), h), ErrorCode::Oscillating);
}

TEST(Hamiltonian, ExactTrajectoriesForPiecewiseLinearControls) {
  support::Rng rng(54);
  const support::System s = support::random_system(rng, 3, 2, 1);
  const ControlTrajectory tr = smooth_trajectory(s.A, s.B, support::gaussian(rng, 2, 1), 5.0, 101);
  EXPECT_LT(trajectory_residual(s.A, s.B, tr), 1e-12);
  // Constant control: v(t) = A^{-1} (e^{tA} - I) B xi.
  GridFunction xi = GridFunction::uniform(0.0, 2.0, 11, 2);
  xi.values.setOnes();
  const ControlTrajectory c = integrate_control_system(s.A, s.B, Vec::Zero(3), xi);
  const Vec want = s.A.inverse() * (linalg::expm(Mat(2.0 * s.A)) - Mat::Identity(3, 3)) * s.B * Vec::Ones(2);
  EXPECT_LT((c.v.values.col(10) - want).norm(), 1e-10 * (1.0 + want.norm()));
}

TEST(Hamiltonian, RiccatiIdentityAndConvergenceOrder) {
  support::Rng rng(55);
  const support::System s = support::random_system(rng, 4, 2, 1);
  const Hamiltonian h = ham(s);
  const Mat p = nonoscillation_operator(stable_lagrange_schur(h));
  const Vec dir = support::gaussian(rng, 2, 1);
  std::vector<double> defects;
  for (int nodes : {41, 81, 161}) {
    const ControlTrajectory tr = smooth_trajectory(s.A, s.B, dir, 20.0, nodes);
    defects.push_back(riccati_integral_check(p, s.A, s.B, s.form, tr, 1.0));
  }
  for (double order : support::observed_orders(defects)) EXPECT_GE(order, 2.0);
  EXPECT_LT(defects.back(), 1e-5);
}

TEST(Hamiltonian, CoercivityAndLyapunovOnM0Samples) {
  support::Rng rng(56);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 5);
    const support::System s = support::random_system(rng, n, 1 + static_cast<int>(rng() % 2), static_cast<int>(rng() % (std::min(n, 2) + 1)));
    const Hamiltonian h = ham(s);
    const NonoscillationResult r = extract_nonoscillation(stable_lagrange_schur(h), h);
    const auto samples = m0_samples(s.A, s.B, r.K, 4, 42 + trial);
    const FrequencyGrid grid = make_frequency_grid(s.A, s.B, s.form);
    const CoercivityReport c = coercivity_check(s.A, s.B, s.form, samples, grid);
    EXPECT_GT(c.delta, 0.0);
    EXPECT_GE(c.worst_ratio_valid, 1.0);
    EXPECT_NEAR(c.c_valid, c.delta / (c.M * c.M + 1.0), 1e-12);
    for (const auto& tr : samples) EXPECT_LT(riccati_integral_check(r.P, s.A, s.B, s.form, tr), 1e-6);
    const Eps0Estimate e = estimate_eps0(s.A, s.B, s.form);
    EXPECT_GT(e.eps0, 0.0);
    EXPECT_LE(e.eps_crit, std::min(e.eps_axis, e.eps_hamiltonian) + 1e-12);
    const LyapunovInequalityReport l = lyapunov_inequality_check(s.A, s.B, s.form, std::min(e.eps0, 0.5 * c.c_valid), samples);
    EXPECT_TRUE(l.holds);
  }
}

TEST(Hamiltonian, ShiftedFormSubtractsIdentity) {
  const QuadraticFormTriple f = make_form(Mat::Identity(2, 2), Mat::Zero(1, 2), 2.0 * Mat::Identity(1, 1));
  const QuadraticFormTriple g = shifted_form(f, 0.25);
  Vec v(2), x(1);
  v << 1.0, -2.0;
  x << 3.0;
  EXPECT_NEAR(g.evaluate(v, x), f.evaluate(v, x) - 0.25 * (v.squaredNorm() + x.squaredNorm()), 1e-14);
}

TEST(Hamiltonian, RejectsSingularF3) {
  QuadraticFormTriple f;
  f.F1 = Mat::Zero(1, 1);
  f.F2 = Mat::Zero(1, 1);
  f.F3 = Mat::Zero(1, 1);
  EXPECT_ERROR_CODE(assemble_hamiltonian(Mat::Constant(1, 1, -1.0), Mat::Identity(1, 1), f), ErrorCode::SingularF3);
}
