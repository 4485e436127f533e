#include "lqrlag/pipeline.hpp"

#include "lqrlag/dichotomy.hpp"
#include "lqrlag/frequency.hpp"
#include "lqrlag/lp_construction.hpp"
#include "lqrlag/spatial_averaging.hpp"
#include "lqrlag/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace lqrlag {

namespace anchor {
constexpr const char* kDichotomy = "the generator splits into invariant stable and unstable subspaces";
constexpr const char* kFrequency = "the quadratic form is positive along the transfer direction at every frequency";
constexpr const char* kInverseNorm = "the inverse of I - M(w) is bounded by |F3| over the frequency margin";
constexpr const char* kSelfAdjoint = "F3 M(w) is self-adjoint at every frequency";
constexpr const char* kLagrange = "the subspace built from the fixed-point equation is Lagrange";
constexpr const char* kInvariance = "the constructed subspace is invariant under the Hamiltonian flow";
constexpr const char* kOracle = "the fixed-point construction coincides with the stable invariant subspace";
constexpr const char* kFredholm = "the stable Lagrange subspace meets the vertical subspace in at most j dimensions";
constexpr const char* kNonosc = "the stable Lagrange subspace is the graph of a symmetric operator -P";
constexpr const char* kRiccati = "P solves the algebraic Riccati equation of the Hamiltonian";
constexpr const char* kControllability = "L2-controllability rules out a vertical intersection";
constexpr const char* kCoercivity = "the cost functional dominates c (|v|^2 + |xi|^2) on processes from zero";
constexpr const char* kRiccatiIdentity = "the cost equals the completed square plus the boundary terms of V_P";
constexpr const char* kLyapunov = "the shifted form yields a dissipation inequality along trajectories";
constexpr const char* kDecay = "trajectories starting in the stable Lagrange subspace decay exponentially";
constexpr const char* kPairing = "the symplectic pairing of two trajectories is constant in time";
constexpr const char* kGap = "the spectral gap inequalities admit a pair (k, N)";
constexpr const char* kImplication = "the sharper inequality set implies both weaker sets";
constexpr const char* kRoutes = "the block assembly and the written-out coupled system agree";
constexpr const char* kSymplectic = "the time-dependent Hamiltonian is infinitesimally symplectic";
constexpr const char* kContractionMid = "the fixed-point operator contracts on the intermediate modes";
constexpr const char* kContractionHigh = "the fixed-point operator contracts on the outer modes";
constexpr const char* kLPBound = "the half-line solution operator is bounded by the inverse gap";
constexpr const char* kLPHighBound = "the outer-mode solution operator is bounded by 1 / (mu + k)";
constexpr const char* kFiber = "every fiber of the stable Lagrange bundle is Lagrange";
constexpr const char* kPicard = "the Picard iteration converges within the iteration budget";
constexpr const char* kSAFredholm = "each fiber meets the vertical subspace in at most N dimensions";
constexpr const char* kFrozen = "a constant driver reduces the fiber to the stationary stable subspace";
constexpr const char* kContinuity = "the fibers depend continuously on the phase";
constexpr const char* kVForm = "the singular form V yields a positive coercivity constant delta_V";
constexpr const char* kUniformP = "the fibers are graphs of P(q) with |P(q)| bounded by 1 / delta_V";
constexpr const char* kSign = "V_q is positive on the lower N modes and negative on the rest";
constexpr const char* kBeta = "fibers built in the fractional spaces agree on shared vectors";
constexpr const char* kUniformDecay = "the decay prefactor is uniform over phases";
}  // namespace anchor

namespace {

template <class Fn>
bool guarded(Certificate& cert, const std::string& name, const char* anchor, Fn&& fn) {
  try {
    fn();
    return true;
  } catch (const Error& e) {
    cert.failure(name, e.what(), anchor);
  } catch (const std::exception& e) {
    cert.failure(name, e.what(), anchor);
  }
  return false;
}

double tol_base(const Scenario& s, const PipelineOptions& o) { return o.tol ? *o.tol : s.tol.base; }

void run_stationary(const Scenario& sc, const PipelineOptions& o, Certificate& cert) {
  const StationarySpec& st = *sc.stationary;
  const double tol = tol_base(sc, o);
  const QuadraticFormTriple form = make_form(st.F1, st.F2, st.F3);
  const int n = static_cast<int>(st.A.rows());

  DichotomySplit split;
  if (!guarded(cert, "dichotomy", anchor::kDichotomy, [&] {
        split = dichotomy_split(st.A);
        cert.info("dichotomy_rank", split.rank_j, anchor::kDichotomy);
        cert.strict_lower("dichotomy_rate", split.eps_rate, 0.0, anchor::kDichotomy);
      }))
    return;

  FrequencyGrid grid;
  double delta_star = 0.0;
  if (!guarded(cert, "frequency_margin", anchor::kFrequency, [&] {
        grid = make_frequency_grid(st.A, st.B, form);
        cert.flag("frequency_tail_certified", grid.tail_certified, anchor::kFrequency);
        const MarginScan scan = frequency_margin_scan(st.A, st.B, form, grid);
        delta_star = scan.delta_star;
        cert.strict_lower("frequency_margin", scan.delta_star, 0.0, anchor::kFrequency);
        const double fscale = std::max(1.0, linalg::spectral_norm(form.F3));
        cert.upper("self_adjoint_defect", scan.max_skew_defect, 1e-10 * fscale, anchor::kSelfAdjoint);
        CsvTable t{csv_schemas().at("freq_margin.csv"), {}};
        for (size_t i = 0; i < scan.omega.size(); ++i)
          t.rows.push_back({scan.omega[i], scan.min_eig[i], scan.inverse_norm[i]});
        cert.tables["freq_margin.csv"] = std::move(t);
        const InverseNormCertificate inv = inverse_norm_certificate(st.A, st.B, form, grid);
        cert.upper("inverse_norm_bound", inv.max_inverse_norm, inv.bound, anchor::kInverseNorm);
      }))
    return;
  if (o.stage == Stage::Frequency) return;

  const Hamiltonian ham = assemble_hamiltonian(st.A, st.B, form);
  StableLagrangeResult lp;
  if (!guarded(cert, "lagrange_construction", anchor::kLagrange, [&] {
        LPOptions lo;
        lo.h = st.lp_step;
        lo.horizon = st.lp_horizon;
        lo.delta_star = delta_star;
        lp = stable_lagrange_lp(st.A, st.B, form, split, lo);
        cert.upper("isotropy_defect", lp.diag.isotropy_defect, tol, anchor::kLagrange);
        cert.flag("is_lagrange", is_lagrange(lp.L_plus, tol).is_lagrange, anchor::kLagrange);
        cert.upper("invariance_defect", lp.diag.invariance_defect, sc.tol.oracle, anchor::kInvariance);
        cert.upper("fixed_point_residual", lp.diag.fixed_point_residual, 1e-10, anchor::kLagrange);
        cert.flag("frequency_margin_well_conditioned", !lp.diag.conditioning_warning, anchor::kFrequency, false);
        const Subspace schur = stable_lagrange_schur(ham);
        cert.upper("oracle_distance", grassmann_distance(lp.L_plus, schur), sc.tol.oracle, anchor::kOracle);
        const Subspace vert = vertical_subspace(n);
        cert.upper("vertical_intersection_dim", intersection_dimension(lp.L_plus, vert), split.rank_j,
                   anchor::kFredholm);
        cert.upper("sum_codimension", sum_codimension(lp.L_plus, vert), split.rank_j, anchor::kFredholm);
      }))
    return;
  if (o.stage == Stage::Lagrange) return;

  const bool controllable = l2_controllability(st.A, st.B);
  cert.flag("l2_controllability", controllable, anchor::kControllability, false);
  NonoscillationResult nr;
  if (!guarded(cert, "nonoscillation", anchor::kNonosc, [&] {
        try {
          nr = extract_nonoscillation(lp.L_plus, ham);
        } catch (const Error& e) {
          if (e.code() == ErrorCode::Oscillating && !controllable)
            throw Error(ErrorCode::Oscillating,
                        std::string(e.what()) + "; (A, B) fails the Hautus test on the closed right half-plane");
          throw;
        }
        cert.flag("nonoscillation", true, anchor::kNonosc);
        const double scale = std::max(1.0, linalg::spectral_norm(ham.H) * std::pow(1.0 + linalg::spectral_norm(nr.P), 2));
        cert.upper("riccati_residual", nr.riccati_residual, tol * scale, anchor::kRiccati);
        cert.info("P_norm", linalg::spectral_norm(nr.P), anchor::kNonosc);
        if (n == 1) cert.info("P_value", nr.P(0, 0), anchor::kNonosc);
        const Mat p_oracle = nonoscillation_operator(stable_lagrange_schur(ham));
        cert.upper("P_oracle_difference", linalg::spectral_norm(Mat(nr.P - p_oracle)),
                   sc.tol.oracle * std::max(1.0, linalg::spectral_norm(p_oracle)), anchor::kOracle);
      }))
    return;
  if (o.stage == Stage::Riccati) return;

  std::vector<ControlTrajectory> samples;
  double c_valid = 0.0;
  guarded(cert, "coercivity", anchor::kCoercivity, [&] {
    samples = m0_samples(st.A, st.B, nr.K, st.coercivity_samples, o.seed);
    const CoercivityReport rep = coercivity_check(st.A, st.B, form, samples, grid);
    c_valid = rep.c_valid;
    cert.lower("coercivity_ratio", rep.worst_ratio_valid, 1.0, anchor::kCoercivity);
    cert.lower("coercivity_ratio_printed_constant", rep.worst_ratio_printed, 1.0, anchor::kCoercivity, false).note =
        "constant delta / (delta M^2 + 1); not a valid lower bound when delta < 1";
    double worst = 0.0;
    for (const ControlTrajectory& s : samples)
      worst = std::max(worst, riccati_integral_check(nr.P, st.A, st.B, form, s, 1e-8));
    cert.upper("riccati_integral_defect", worst, 1e-6, anchor::kRiccatiIdentity);
  });

  Eps0Estimate e0;
  guarded(cert, "eps0", anchor::kLyapunov, [&] {
    e0 = estimate_eps0(st.A, st.B, form);
    cert.strict_lower("eps0", e0.eps0, 0.0, anchor::kLyapunov);
    if (!samples.empty()) {
      // The shifted-form margin is at least delta - eps (M^2 + 1), positive below c_valid.
      const double eps_l = std::min(e0.eps0, 0.5 * c_valid);
      const LyapunovInequalityReport lr = lyapunov_inequality_check(st.A, st.B, form, eps_l, samples);
      cert.info("lyapunov_eps", eps_l, anchor::kLyapunov);
      cert.lower("lyapunov_inequality_slack", lr.min_slack, -1e-9, anchor::kLyapunov);
    }
  });

  guarded(cert, "decay_rate", anchor::kDecay, [&] {
    const double eps_h = e0.eps_hamiltonian > 0.0 ? e0.eps_hamiltonian : split.eps_rate;
    const double T = std::min(200.0, 24.0 / eps_h);
    const RestrictedFlow flow = restricted_flow_norms(ham.H, lp.L_plus, orthogonal_complement(lp.L_plus), T);
    const DecayFit fit = fit_exponential_decay(flow.times, flow.norms, 0.25 * T, T);
    cert.lower("decay_rate", fit.rate, e0.eps0 - 1e-3, anchor::kDecay);
    const double m_eps = sampled_M_eps(flow, e0.eps0);
    cert.info("decay_M_eps", m_eps, anchor::kDecay);
    cert.tables["decay.csv"] = CsvTable{csv_schemas().at("decay.csv"), {{0.0, fit.rate, fit.prefactor, fit.r_squared, m_eps}}};
  });

  guarded(cert, "symplectic_pairing_drift", anchor::kPairing, [&] {
    std::mt19937_64 rng(o.seed + 1);
    std::normal_distribution<double> g(0.0, 1.0);
    Vec z1(2 * n), z2(2 * n);
    for (int i = 0; i < 2 * n; ++i) {
      z1(i) = g(rng);
      z2(i) = g(rng);
    }
    // Restrict to the stable subspace so the pairing stays well scaled over the horizon.
    z1 = lp.L_plus.projector() * z1;
    z2 = lp.L_plus.projector() * z2 + orthogonal_complement(lp.L_plus).projector() * z2 * 1e-3;
    const double eps_h = e0.eps_hamiltonian > 0.0 ? e0.eps_hamiltonian : split.eps_rate;
    cert.upper("symplectic_pairing_drift", symplectic_pairing_drift(ham.H, z1, z2, std::min(20.0, 5.0 / eps_h)), 1e-8,
               anchor::kPairing);
  });
}

std::vector<double> sweep_axis(double lo, double hi) { return logspace(lo, hi, 10); }

void run_spatial(const Scenario& sc, const PipelineOptions& o, Certificate& cert) {
  const SASpec& sa = *sc.sa;
  const double tol = tol_base(sc, o);

  int k = sa.k, N = sa.N;
  if (!guarded(cert, "gap_search", anchor::kGap, [&] {
        CsvTable t{csv_schemas().at("gap_margins.csv"), {}};
        if (sa.search) {
          const std::vector<GapCandidate> cands = gap_search(sa.model, sa.Lambda, sa.delta, sa.condition_set);
          for (const GapCandidate& c : cands)
            t.rows.push_back({double(c.N), double(c.k), c.mu_bar, c.margins.first, c.margins.second, 1.0});
          k = cands.front().k;
          N = cands.front().N;
        }
        if (N < 1 || N >= sa.model.n()) throw Error(ErrorCode::IndexOutOfRange, "need 1 <= N < n");
        const double mu = 0.5 * (sa.model.lambda(N + 1) - sa.model.lambda(N));
        for (ConditionSet set : {ConditionSet::Bundle, ConditionSet::Nonosc, ConditionSet::Zelik}) {
          const GapMargins m = condition_margins(set, sa.Lambda, sa.delta, mu, k);
          const bool gating = set == sa.condition_set;
          cert.lower(to_string(set) + "_margin_first", m.first, 0.0, anchor::kGap, gating);
          cert.lower(to_string(set) + "_margin_second", m.second, 0.0, anchor::kGap, gating);
          if (!sa.search && set == sa.condition_set) t.rows.push_back({double(N), double(k), mu, m.first, m.second, m.pass ? 1.0 : 0.0});
        }
        cert.info("k", k, anchor::kGap);
        cert.info("N", N, anchor::kGap);
        cert.tables["gap_margins.csv"] = std::move(t);
      }))
    return;

  guarded(cert, "implication_sweep", anchor::kImplication, [&] {
    const ImplicationSweep r =
        implication_sweep(sweep_axis(0.05, 5.0), sweep_axis(0.01, 5.0), sweep_axis(0.5, 50.0), sweep_axis(1.0, 2000.0));
    cert.flag("implication_sweep", r.pass, anchor::kImplication);
    cert.info("implication_sweep_points", double(r.points), anchor::kImplication);
  });
  if (o.stage == Stage::Search) return;

  SAConfig cfg;
  Driver driver;
  if (!guarded(cert, "configuration", anchor::kGap, [&] {
        const double ab = sa.a_bound >= 0.0 ? sa.a_bound
                                             : std::abs(sa.driver.c0) + [&] {
                                                 double s = 0.0;
                                                 for (double c : sa.driver.amplitudes) s += std::abs(c);
                                                 return s;
                                               }();
        cfg = make_sa_config(sa.model, sa.Lambda, sa.delta, k, N, ab, sa.taus);
        driver = driver_make(sa.driver.kind, sa.driver.c0, sa.driver.amplitudes, sa.driver.frequencies, cfg.a_bound);
        cert.info("mu_bar", cfg.mu_bar, anchor::kGap);
        cert.info("a_bound", cfg.a_bound, anchor::kGap);
      }))
    return;

  guarded(cert, "hamiltonian_routes", anchor::kRoutes, [&] {
    double diff = 0.0, symp = 0.0;
    for (double a : {driver.min_value(), 0.5 * (driver.min_value() + driver.max_value()), driver.max_value()}) {
      const Hamiltonian hb = assemble_nonaut_hamiltonian(cfg, a, HamiltonianRoute::Blocks);
      const Hamiltonian hc = assemble_nonaut_hamiltonian(cfg, a, HamiltonianRoute::Concrete);
      diff = std::max(diff, (hb.H - hc.H).norm() / std::max(1.0, hb.H.norm()));
      symp = std::max(symp, hc.symplectic_defect());
    }
    cert.upper("hamiltonian_route_difference", diff, 1e-12, anchor::kRoutes);
    cert.upper("hamiltonian_symplectic_defect", symp, 1e-12, anchor::kSymplectic);
  });

  guarded(cert, "contraction", anchor::kContractionMid, [&] {
    const ContractionCertificate c = contraction_certificate(cfg, driver);
    cert.upper("contraction_mid_bound", c.mid_bound, 1.0, anchor::kContractionMid);
    cert.upper("contraction_high_bound", c.high_bound, 1.0, anchor::kContractionHigh);
    cert.upper("contraction_mid_measured", c.mid_measured, c.mid_bound + 1e-6, anchor::kContractionMid);
    cert.upper("contraction_high_measured", c.high_measured, c.high_bound + 1e-6, anchor::kContractionHigh);
    cert.upper("lp_norm_measured", c.lp_measured, c.lp_bound + 1e-6, anchor::kLPBound);
    cert.upper("lp_high_norm_measured", c.lp_high_measured, c.lp_high_bound + 1e-6, anchor::kLPHighBound, false)
        .note = "outer modes above lambda_N + k need not clear mu + k when lambda_N + k < lambda_{N+1} + k";
  });

  // Fibers over the phase samples.
  FiberOptions fo;
  fo.horizon = sa.horizon;
  fo.keep_trajectories = true;
  std::vector<Phase> phases;
  for (int p = 0; p < sa.phases; ++p)
    phases.emplace_back(driver.dim(), 2.0 * std::numbers::pi * p / sa.phases);
  std::vector<FiberResult> fibers;
  guarded(cert, "fibers", anchor::kFiber, [&] {
    double iso = 0.0;
    int its = 0, vert = 0;
    bool lagr = true, all_graphs = true, conv = true;
    for (const Phase& q : phases) {
      fibers.push_back(build_fiber(cfg, driver, q, fo));
      const FiberResult& f = fibers.back();
      iso = std::max(iso, f.isotropy_defect);
      its = std::max(its, f.max_picard_iterations);
      vert = std::max(vert, f.vertical_intersection);
      lagr = lagr && is_lagrange(f.L_plus, tol).is_lagrange;
      all_graphs = all_graphs && f.P.has_value();
      conv = conv && f.converged;
    }
    cert.upper("fiber_isotropy_defect", iso, tol, anchor::kFiber);
    cert.flag("fiber_is_lagrange", lagr, anchor::kFiber);
    cert.upper("fiber_picard_iterations", its, 200, anchor::kPicard);
    cert.upper("fiber_vertical_intersection_dim", vert, cfg.N, anchor::kSAFredholm);
    cert.flag("fiber_nonoscillation", all_graphs, anchor::kUniformP);
    CsvTable t{csv_schemas().at("fibers.csv"), {}};
    for (const FiberResult& f : fibers)
      t.rows.push_back({f.q.empty() ? 0.0 : f.q[0], grassmann_distance(f.L_plus, fibers.front().L_plus),
                        f.P ? linalg::spectral_norm(*f.P) : std::nan("")});
    cert.tables["fibers.csv"] = std::move(t);
  });

  guarded(cert, "frozen_oracle", anchor::kFrozen, [&] {
    double worst = 0.0;
    for (double c : {driver.min_value(), driver.c0, driver.max_value()}) {
      const Driver frozen = driver_make(DriverKind::Periodic, c, {}, {}, cfg.a_bound);
      FiberOptions fz = fo;
      fz.keep_trajectories = false;
      const FiberResult f = build_fiber(cfg, frozen, {}, fz);
      const Subspace schur = stable_lagrange_schur(assemble_nonaut_hamiltonian(cfg, c));
      worst = std::max(worst, grassmann_distance(f.L_plus, schur));
    }
    cert.upper("frozen_driver_oracle_distance", worst, sc.tol.oracle, anchor::kFrozen);
  });

  guarded(cert, "continuity", anchor::kContinuity, [&] {
    if (driver.constant()) {
      cert.flag("fiber_continuity", true, anchor::kContinuity);
      return;
    }
    const Phase q0(driver.dim(), 0.0);
    std::vector<Phase> seq;
    for (int m = 1; m <= 8; ++m) seq.emplace_back(driver.dim(), std::ldexp(1.0, -m));
    FiberOptions fc = fo;
    fc.keep_trajectories = false;
    const std::vector<ContinuityRow> rows = fiber_continuity(cfg, driver, q0, seq, fc);
    bool monotone = true;
    double worst_equiv = 0.0;
    CsvTable t{csv_schemas().at("continuity.csv"), {}};
    for (size_t i = 0; i < rows.size(); ++i) {
      t.rows.push_back({rows[i].phase_offset, rows[i].m_distance, rows[i].grassmann});
      if (i > 0) {
        monotone = monotone && rows[i].m_distance <= 1.1 * rows[i - 1].m_distance &&
                   rows[i].grassmann <= 1.1 * rows[i - 1].grassmann;
      }
      if (rows[i].grassmann > 0.0 && rows[i].m_distance > 0.0)
        worst_equiv = std::max({worst_equiv, rows[i].m_distance / rows[i].grassmann,
                                rows[i].grassmann / rows[i].m_distance});
    }
    cert.flag("fiber_continuity", monotone, anchor::kContinuity);
    cert.info("continuity_modulus_ratio", worst_equiv, anchor::kContinuity);
    cert.tables["continuity.csv"] = std::move(t);
  });

  double delta_v = 0.0;
  guarded(cert, "v_form", anchor::kVForm, [&] {
    const VFormCertificate v = v_form_certificate(cfg, default_a_grid(driver.min_value(), driver.max_value()));
    delta_v = v.delta_V;
    cert.strict_lower("v_form_delta_V", v.delta_V, 0.0, anchor::kVForm);
    cert.strict_lower("v_form_bracket_mid", v.bracket_mid, 0.0, anchor::kVForm);
    cert.strict_lower("v_form_bracket_high", v.bracket_high, 0.0, anchor::kVForm);
    cert.strict_lower("v_form_affine_route", v.affine_route_min, 0.0, anchor::kVForm);
  });

  if (!fibers.empty()) {
    guarded(cert, "uniform_nonoscillation", anchor::kUniformP, [&] {
      if (!(delta_v > 0.0)) throw Error(ErrorCode::NotPositive, "no delta_V available");
      double pmax = 0.0;
      bool sign = true;
      for (const FiberResult& f : fibers) {
        if (!f.P) throw Error(ErrorCode::Oscillating, "a fiber is not a graph over the horizontal subspace");
        pmax = std::max(pmax, linalg::spectral_norm(*f.P));
        sign = sign && v_sign_structure(cfg, *f.P);
      }
      cert.upper("max_P_norm", pmax, 1.0 / delta_v + 1e-6, anchor::kUniformP);
      cert.flag("v_sign_structure", sign, anchor::kSign);
    });

    guarded(cert, "sa_decay", anchor::kDecay, [&] {
      const double eps0 = sa_eps0(cfg).eps0;
      double worst_rate = std::numeric_limits<double>::infinity(), pmin = std::numeric_limits<double>::infinity(),
             pmax = 0.0;
      CsvTable t{csv_schemas().at("decay.csv"), {}};
      for (const FiberResult& f : fibers) {
        const SADecay d = exp_decay_fit(cfg, driver, f, f.L_plus.basis());
        worst_rate = std::min(worst_rate, d.fit.rate);
        pmin = std::min(pmin, d.fit.prefactor);
        pmax = std::max(pmax, d.fit.prefactor);
        t.rows.push_back({f.q.empty() ? 0.0 : f.q[0], d.fit.rate, d.fit.prefactor, d.fit.r_squared, d.M_eps});
      }
      cert.info("sa_eps0", eps0, anchor::kDecay);
      cert.lower("sa_decay_rate", worst_rate, eps0 - 1e-3, anchor::kDecay);
      cert.upper("sa_prefactor_ratio", pmax / pmin, 2.0, anchor::kUniformDecay);
      cert.tables["decay.csv"] = std::move(t);
    });

    guarded(cert, "beta_consistency", anchor::kBeta, [&] {
      const FiberResult& f0 = fibers.front();
      double worst = 0.0;
      for (double beta : {0.5, 1.0}) {
        FiberOptions fb = fo;
        fb.keep_trajectories = false;
        fb.beta = beta;
        const FiberResult fbeta = build_fiber(cfg, driver, f0.q, fb);
        // M_beta acts on beta-scaled sharp coordinates; compare on the shared vectors e_j.
        const int n = cfg.n();
        Vec w(n);
        for (int j = 1; j <= n; ++j) w(j - 1) = std::pow(cfg.model.lambda(j), beta);
        const Mat back = w.cwiseInverse().asDiagonal() * fbeta.M_plus.M * w.asDiagonal();
        worst = std::max(worst, linalg::spectral_norm(Mat(back - f0.M_plus.M)));
      }
      cert.upper("beta_consistency", worst, 1e-8, anchor::kBeta);
    });
  }
}

}  // namespace

Certificate run_pipeline(const Scenario& scenario, const PipelineOptions& opts) {
  Certificate cert;
  cert.scenario = scenario.name;
  cert.seed = opts.seed;
  if (scenario.mode == ScenarioMode::Stationary) {
    cert.mode = "stationary";
    run_stationary(scenario, opts, cert);
  } else {
    cert.mode = "spatial-averaging";
    run_spatial(scenario, opts, cert);
  }
  return cert;
}

std::vector<ControlTrajectory> m0_samples(const Mat& a, const Mat& b, const Mat& K, int count, unsigned seed,
                                          double t_on) {
  const int n = static_cast<int>(a.rows()), m = static_cast<int>(b.cols());
  const Mat closed = a + b * K;
  const CVec ev = linalg::eigenvalues(closed);
  double rate = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < ev.size(); ++i) rate = std::min(rate, -ev(i).real());
  if (!(rate > 0.0)) throw Error(ErrorCode::SpectrumOnAxis, "feedback does not stabilize");
  const double scale = std::max({1.0, linalg::spectral_norm(a), linalg::spectral_norm(closed)});
  const double h = std::min(0.01, 0.1 / scale);
  const double T = t_on + std::min(400.0, 25.0 / rate);
  const int nodes = static_cast<int>(std::ceil(T / h)) + 1;
  const ExpStep st = exp_step(a, h);
  const Eigen::PartialPivLU<Mat> lu(Mat(Mat::Identity(n, n) - st.W1 * b * K));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<ControlTrajectory> out;
  for (int s = 0; s < count; ++s) {
    Mat c(m, 3);
    for (int i = 0; i < m; ++i)
      for (int k = 0; k < 3; ++k) c(i, k) = g(rng);
    auto u = [&](double t) {
      Vec x = Vec::Zero(m);
      if (t >= t_on) return x;
      for (int k = 0; k < 3; ++k) x += c.col(k) * std::sin((k + 1) * std::numbers::pi * t / t_on);
      return x;
    };
    Vec times(nodes);
    Mat v(n, nodes), xi(m, nodes);
    v.col(0).setZero();
    xi.col(0) = u(0.0);
    times(0) = 0.0;
    for (int i = 0; i + 1 < nodes; ++i) {
      times(i + 1) = (i + 1) * h;
      const Vec ui = u(times(i + 1));
      v.col(i + 1) = lu.solve(Vec(st.E * v.col(i) + st.W0 * (b * xi.col(i)) + st.W1 * (b * ui)));
      xi.col(i + 1) = K * v.col(i + 1) + ui;
    }
    out.push_back({GridFunction(times, v), GridFunction(times, xi)});
  }
  return out;
}

}  // namespace lqrlag
