#include "lqrlag/spatial_averaging.hpp"

#include "expect_error.hpp"
#include "sa_internal.hpp"
#include "support.hpp"

#include <cmath>
#include <numbers>

using namespace lqrlag;

namespace {

constexpr double kPi = std::numbers::pi;

double simpson_integral(const Driver& d, const Phase& q, double t0, double t1, int panels = 2000) {
  const double h = (t1 - t0) / panels;
  double s = d.evaluate(q, t0) + d.evaluate(q, t1);
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * d.evaluate(q, t0 + i * h);
  return s * h / 3.0;
}

}  // namespace

TEST(SpatialAveraging, StandardConfiguration) {
  const SAConfig c = support::standard_sa_config();
  EXPECT_DOUBLE_EQ(c.mu_bar, 2.5);
  EXPECT_DOUBLE_EQ(c.alpha, 6.5);
  EXPECT_DOUBLE_EQ(c.taus.t2, 2.5 * 2.5 / 4.0);
  EXPECT_TRUE(c.v_stable(7));
  EXPECT_FALSE(c.v_stable(2));
  EXPECT_FALSE(c.in_pq(1));
  EXPECT_TRUE(c.in_pq(3));
  EXPECT_LT((c.A().diagonal() - (6.5 - power_model(10, 2.0).eigenvalues.array()).matrix()).norm(), 1e-15);
  EXPECT_ERROR_CODE(make_sa_config(power_model(10, 2.0), 1.0, 1.0, 3, 2, 2.5), ErrorCode::AmplitudeTooLarge);
  EXPECT_ERROR_CODE(make_sa_config(power_model(10, 2.0), 1.0, 1.0, 3, 2, 2.0, TauChoice{1.0, -1.0, 1.0}),
                    ErrorCode::InvalidConfig);
}

TEST(SpatialAveraging, DriverIntegralsAndShiftsProperty) {
  support::Rng rng(71);
  for (int trial = 0; trial < 25; ++trial) {
    const bool quasi = trial % 2 == 1;
    std::vector<double> amps{support::uniform(rng, -0.5, 0.5)}, freqs{support::uniform(rng, 0.3, 2.0)};
    if (quasi) {
      amps.push_back(support::uniform(rng, -0.3, 0.3));
      freqs.push_back(freqs[0] * std::sqrt(2.0));
    }
    const Driver d = driver_make(quasi ? DriverKind::Quasiperiodic : DriverKind::Periodic,
                                 support::uniform(rng, -1.0, 1.0), amps, freqs, 2.0);
    Phase q;
    for (size_t i = 0; i < amps.size(); ++i) q.push_back(support::uniform(rng, 0.0, 2.0 * kPi));
    const double t0 = support::uniform(rng, 0.0, 3.0), t1 = t0 + support::uniform(rng, 0.1, 4.0);
    EXPECT_NEAR(d.integral(q, t0, t1), simpson_integral(d, q, t0, t1), 1e-10);
    const double s = support::uniform(rng, 0.0, 5.0), t = support::uniform(rng, 0.0, 5.0);
    EXPECT_NEAR(d.evaluate(d.shift(q, s), t), d.evaluate(q, s + t), 1e-12);
    for (double x : d.shift(q, s)) {
      EXPECT_GE(x, 0.0);
      EXPECT_LT(x, 2.0 * kPi);
    }
    EXPECT_LE(d.evaluate(q, t), d.max_value() + 1e-15);
    EXPECT_GE(d.evaluate(q, t), d.min_value() - 1e-15);
  }
  EXPECT_ERROR_CODE(driver_make(DriverKind::Periodic, 1.5, {0.6}, {1.0}, 2.0), ErrorCode::AmplitudeTooLarge);
  EXPECT_ERROR_CODE(driver_make(DriverKind::Periodic, 0.0, {0.1, 0.1}, {1.0, 2.0}, 2.0), ErrorCode::InvalidConfig);
  EXPECT_NEAR(Driver::phase_distance({0.1}, {2.0 * kPi - 0.1}), 0.2, 1e-12);
}

TEST(SpatialAveraging, GapMarginsOnStandardInstance) {
  const GapMargins b = condition_margins(ConditionSet::Bundle, 1.0, 1.0, 2.5, 3.0);
  EXPECT_NEAR(b.first, 2.5 / std::sqrt(5.0) - 1.0, 1e-15);
  EXPECT_NEAR(b.second, 9.0 - 6.0 - 4.0 / 6.25, 1e-14);
  EXPECT_TRUE(b.pass);
  const GapMargins n = condition_margins(ConditionSet::Nonosc, 1.0, 1.0, 2.5, 3.0);
  EXPECT_NEAR(n.first, 0.25, 1e-15);
  EXPECT_NEAR(n.second, 0.0, 1e-15);
  EXPECT_TRUE(n.pass);
  EXPECT_FALSE(condition_margins(ConditionSet::Bundle, 1.0, 1.0, 2.5, 1.0).pass);
  EXPECT_EQ(condition_set_from_string(to_string(ConditionSet::Zelik)), ConditionSet::Zelik);
  EXPECT_ERROR_CODE(condition_set_from_string("other"), ErrorCode::InvalidConfig);
}

TEST(SpatialAveraging, GapSearchFindsMinimalPairs) {
  const auto c = gap_search(power_model(10, 2.0), 1.0, 1.0, ConditionSet::Bundle);
  ASSERT_FALSE(c.empty());
  EXPECT_EQ(c.front().N, 2);
  EXPECT_EQ(c.front().k, 3);
  for (const GapCandidate& g : c) {
    EXPECT_TRUE(g.margins.pass);
    if (g.k > 1) EXPECT_FALSE(condition_margins(ConditionSet::Bundle, 1.0, 1.0, g.mu_bar, g.k - 1).pass);
  }
  EXPECT_ERROR_CODE(gap_search(power_model(10, 2.0), 1.0, 50.0, ConditionSet::Bundle), ErrorCode::NoCandidate);
}

TEST(SpatialAveraging, ZelikSetImpliesBothSets) {
  const auto ax = [](double lo, double hi) { return logspace(lo, hi, 10); };
  const ImplicationSweep s = implication_sweep(ax(0.05, 5.0), ax(0.01, 5.0), ax(0.5, 50.0), ax(1.0, 2000.0));
  EXPECT_EQ(s.points, 10000);
  EXPECT_TRUE(s.pass);
  EXPECT_FALSE(s.counterexample.has_value());
  EXPECT_GT(s.zelik_points, 0);
  EXPECT_GT(s.strict_points, 0);
}

TEST(SpatialAveraging, AssembledFormsMatchDirectEvaluationProperty) {
  const SAConfig c = support::standard_sa_config();
  support::Rng rng(72);
  for (int trial = 0; trial < 50; ++trial) {
    const double a = support::uniform(rng, -2.0, 2.0);
    const Vec v = support::gaussian(rng, 10, 1), xi = support::gaussian(rng, 20, 1);
    const QuadraticFormTriple f = assemble_forms(c, a);
    EXPECT_NEAR(f.evaluate(v, xi), sa_form_direct(c, a, v, xi), 1e-10 * (1.0 + v.squaredNorm() + xi.squaredNorm()));
  }
  EXPECT_ERROR_CODE(assemble_forms(c, 2.5), ErrorCode::AValueOutOfRange);
}

TEST(SpatialAveraging, HamiltonianRoutesAgreeAndMatchModeCoefficients) {
  const SAConfig c = support::standard_sa_config();
  const int n = c.n();
  for (double a : {-2.0, -0.3, 0.0, 1.1, 2.0}) {
    const Hamiltonian hb = assemble_nonaut_hamiltonian(c, a, HamiltonianRoute::Blocks);
    const Hamiltonian hc = assemble_nonaut_hamiltonian(c, a, HamiltonianRoute::Concrete);
    EXPECT_LT((hb.H - hc.H).norm(), 1e-12 * hb.H.norm());
    EXPECT_LT(hc.symplectic_defect(), 1e-12);
    for (int j = 1; j <= n; ++j) {
      const ModeCoefficients m = mode_coefficients(c, j);
      EXPECT_NEAR(hc.H(j - 1, j - 1), m.A_j - (m.pq ? a : 0.0), 1e-12);
      EXPECT_NEAR(hc.H(j - 1, n + j - 1), m.c, 1e-12);
      EXPECT_NEAR(hc.H(n + j - 1, j - 1), m.d, 1e-12);
    }
  }
}

TEST(SpatialAveraging, SpatialAveragingConditionOnScalarMultiple) {
  const SAConfig c = support::standard_sa_config();
  EXPECT_NEAR(spatial_avg_condition(0.7 * Mat::Identity(10, 10), c, 0.7).defect, 0.0, 1e-15);
  EXPECT_FALSE(spatial_avg_condition(3.0 * Mat::Identity(10, 10), c, 0.7).pass);
}

TEST(SpatialAveraging, ContractionCertificateOnStandardInstance) {
  const ContractionCertificate cc = contraction_certificate(support::standard_sa_config(), support::standard_driver());
  EXPECT_NEAR(cc.mid_bound, 0.82, 1e-14);
  EXPECT_NEAR(cc.high_bound, 1.64 / (3.5 * 3.5), 1e-14);
  EXPECT_LE(cc.mid_measured, cc.mid_bound + 1e-6);
  EXPECT_LE(cc.high_measured, cc.high_bound + 1e-6);
  EXPECT_TRUE(cc.measured_within_bounds);
  EXPECT_LE(cc.lp_measured, cc.lp_bound + 1e-6);
  EXPECT_NEAR(cc.lp_bound, 0.4, 1e-15);
  const SAConfig wide = make_sa_config(power_model(10, 2.0), 1.0, 1.5, 3, 2, 2.0);
  EXPECT_ERROR_CODE(contraction_certificate(wide, support::standard_driver()), ErrorCode::NotAContraction);
  EXPECT_ERROR_CODE(build_fiber(wide, support::standard_driver(), {0.0}), ErrorCode::ContractionFailed);
}

TEST(SpatialAveraging, ShiftedContractionRadius) {
  const SAConfig c = support::standard_sa_config();
  const SAEps0 e = sa_eps0(c);
  // The intermediate bound reaches one when (mu - eps)^2 = (1 + 1)(1 + 1.5625).
  EXPECT_NEAR(e.eps_crit, 2.5 - std::sqrt(2.0 * 2.5625), 1e-12);
  EXPECT_NEAR(e.eps0, 0.5 * e.eps_crit, 1e-15);
}

TEST(SpatialAveraging, GradedGridProperty) {
  support::Rng rng(73);
  for (int trial = 0; trial < 30; ++trial) {
    const double T = support::uniform(rng, 1.0, 40.0), hmax = support::uniform(rng, 0.01, 0.2);
    const double hmin = hmax * support::uniform(rng, 0.01, 1.0), g = support::uniform(rng, 1.0, 1.2);
    const Vec t = graded_grid(T, hmin, hmax, g);
    EXPECT_EQ(t(0), 0.0);
    EXPECT_NEAR(t(t.size() - 1), T, 1e-12);
    for (Eigen::Index i = 1; i < t.size(); ++i) {
      EXPECT_GT(t(i) - t(i - 1), 0.0);
      EXPECT_LE(t(i) - t(i - 1), hmax * (1.0 + 1e-9));
    }
  }
  EXPECT_ERROR_CODE(graded_grid(1.0, 0.2, 0.1, 1.1), ErrorCode::InvalidConfig);
}

TEST(SpatialAveraging, ScalarSolveTransposeMatchesDenseProperty) {
  support::Rng rng(74);
  for (int trial = 0; trial < 20; ++trial) {
    const int nodes = 5 + static_cast<int>(rng() % 20);
    Vec times(nodes);
    times(0) = 0.0;
    for (int i = 1; i < nodes; ++i) times(i) = times(i - 1) + support::uniform(rng, 0.01, 0.3);
    const bool forward = trial % 2 == 0;
    Vec x(nodes - 1);
    for (int i = 0; i < nodes - 1; ++i) x(i) = (forward ? -1.0 : 1.0) * support::uniform(rng, 0.1, 5.0);
    const detail::ScalarSolve s(times, x, forward);
    Mat dense(nodes, nodes);
    for (int k = 0; k < nodes; ++k) dense.col(k) = s.apply(Vec::Unit(nodes, k));
    Mat dense_t(nodes, nodes);
    for (int k = 0; k < nodes; ++k) dense_t.col(k) = s.apply_transpose(Vec::Unit(nodes, k));
    EXPECT_LT((dense.transpose() - dense_t).norm(), 1e-14 * (1.0 + dense.norm()));
  }
}

TEST(SpatialAveraging, ScalarSolveIsExactForConstantGenerator) {
  // y' = -2 y + 1, y(0) = 0 has y(t) = (1 - e^{-2t}) / 2.
  const Vec t = Vec::LinSpaced(11, 0.0, 1.0);
  const detail::ScalarSolve s(t, Vec::Constant(10, -2.0), true);
  const Vec y = s.apply(Vec::Ones(11));
  for (int i = 0; i < 11; ++i) EXPECT_NEAR(y(i), 0.5 * (1.0 - std::exp(-2.0 * t(i))), 1e-14);
}

TEST(SpatialAveraging, PowerNormOfDiagonalOperator) {
  const Vec d = Vec::LinSpaced(6, 0.1, 0.6);
  const auto op = [&](const Vec& x) { return Vec(d.cwiseProduct(x)); };
  EXPECT_NEAR(detail::power_norm(op, op, Vec::Ones(6), 5000, 1e-14), 0.6, 1e-8);
}

TEST(SpatialAveraging, FrozenDriverFiberMatchesSchurOracle) {
  const SAConfig c = support::standard_sa_config();
  // At a = -2 mode 3 (in Ran Q) has a centre pair, so only hyperbolic values are compared.
  EXPECT_ERROR_CODE(build_fiber(c, driver_make(DriverKind::Periodic, -2.0, {}, {}, 2.0), {}), ErrorCode::SpectrumOnAxis);
  for (double a : {0.0, 1.0, 1.5, 2.0}) {
    const Driver frozen = driver_make(DriverKind::Periodic, a, {}, {}, 2.0);
    const FiberResult f = build_fiber(c, frozen, {});
    const Hamiltonian h = assemble_nonaut_hamiltonian(c, a);
    EXPECT_LT(grassmann_distance(f.L_plus, stable_lagrange_schur(h)), 1e-6) << "a = " << a;
    EXPECT_LT(support::projector_gap(f.L_plus.basis(), support::stable_eigenspace(h.H)), 1e-6);
  }
}

TEST(SpatialAveraging, FibersAreLagrangeGraphsWithBoundedP) {
  const SAConfig c = support::standard_sa_config();
  const Driver d = support::standard_driver();
  const VFormCertificate v = v_form_certificate(c, default_a_grid(d.min_value(), d.max_value()));
  EXPECT_GT(v.delta_V, 0.0);
  EXPECT_NEAR(v.bracket_mid, 0.5625, 1e-14);
  EXPECT_NEAR(v.bracket_high, 2.1875, 1e-14);
  for (double q : {0.0, 1.0, 4.0}) {
    FiberOptions o;
    o.keep_trajectories = true;
    const FiberResult f = build_fiber(c, d, {q}, o);
    EXPECT_TRUE(f.converged);
    EXPECT_LE(f.max_picard_iterations, 200);
    EXPECT_LT(f.isotropy_defect, 1e-8);
    EXPECT_LT(support::isotropy(f.L_plus.basis()), 1e-8);
    EXPECT_LE(f.vertical_intersection, c.N);
    ASSERT_TRUE(f.P.has_value());
    EXPECT_LE(linalg::spectral_norm(*f.P), 1.0 / v.delta_V + 1e-6);
    EXPECT_TRUE(v_sign_structure(c, *f.P));
    const SADecay dec = exp_decay_fit(c, d, f, f.L_plus.basis());
    EXPECT_GE(dec.fit.rate, sa_eps0(c).eps0 - 1e-3);
  }
}

TEST(SpatialAveraging, DecayFitRejectsVectorsOutsideFiber) {
  const SAConfig c = support::standard_sa_config();
  const Driver d = support::standard_driver();
  FiberOptions o;
  o.keep_trajectories = true;
  const FiberResult f = build_fiber(c, d, {0.0}, o);
  EXPECT_ERROR_CODE(exp_decay_fit(c, d, f, Mat::Identity(20, 1)), ErrorCode::NotInFiber);
}

TEST(SpatialAveraging, FibersVaryContinuouslyWithPhase) {
  const SAConfig c = support::standard_sa_config();
  std::vector<Phase> seq;
  for (int m = 1; m <= 6; ++m) seq.push_back({std::ldexp(1.0, -m)});
  const auto rows = fiber_continuity(c, support::standard_driver(), {0.0}, seq);
  ASSERT_EQ(rows.size(), seq.size());
  for (size_t i = 1; i < rows.size(); ++i) {
    EXPECT_LT(rows[i].grassmann, rows[i - 1].grassmann);
    EXPECT_LT(rows[i].m_distance, rows[i - 1].m_distance);
  }
}

TEST(SpatialAveraging, FractionalCoordinatesAgree) {
  const SAConfig c = support::standard_sa_config();
  const Driver d = support::standard_driver();
  const FiberResult f0 = build_fiber(c, d, {0.5});
  FiberOptions o;
  o.beta = 0.5;
  const FiberResult fb = build_fiber(c, d, {0.5}, o);
  const Vec w = c.model.eigenvalues.array().sqrt().matrix();
  const Mat back = w.cwiseInverse().asDiagonal() * fb.M_plus.M * w.asDiagonal();
  EXPECT_LT(linalg::spectral_norm(Mat(back - f0.M_plus.M)), 1e-8);
  o.beta = -1.0;
  EXPECT_ERROR_CODE(build_fiber(c, d, {0.5}, o), ErrorCode::NegativeBeta);
}

TEST(SpatialAveraging, UndersizedGapYieldsNoVForm) {
  const SAConfig c = support::standard_sa_config(1);
  EXPECT_ERROR_CODE(v_form_certificate(c, default_a_grid(1.0, 2.0)), ErrorCode::NotPositive);
}

TEST(SpatialAveraging, VFormMatrixIsSymmetric) {
  const Mat s = v_form_matrix(support::standard_sa_config(), 0.7);
  EXPECT_EQ(s.rows(), 30);
  EXPECT_LT((s - s.transpose()).norm(), 1e-14);
}
