#pragma once

#include "lqrlag/hamiltonian.hpp"
#include "lqrlag/spectral_model.hpp"
#include "lqrlag/symplectic.hpp"
#include "lqrlag/trajectories.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lqrlag {

struct TauChoice {
  double t1 = 1.0, t2 = 1.0, t3 = 1.0;
};

/// Gap data for the operator A = -A0 + alpha I on the eigenbasis of A0.
/// N is a 1-based mode label: the gap sits between lambda_N and lambda_{N+1}.
struct SAConfig {
  SpectralModel model;
  double Lambda = 0.0, delta = 0.0;
  int k = 0, N = 0;
  double mu_bar = 0.0, alpha = 0.0;
  TauChoice taus;
  double a_bound = 0.0;
  ModeProjectors proj;

  int n() const { return model.n(); }
  Mat A() const;                 // -A0 + alpha I
  Mat PQ() const { return proj.P_low + proj.Q_high; }
  Mat B() const;                 // [I I], acting on (xi_I, xi_c)
  /// True on modes whose v-component decays under A, i.e. lambda_j > alpha. 1-based.
  bool v_stable(int mode) const;
  bool in_pq(int mode) const;     // 1-based
};

/// Default taus are t1 = 1, t2 = (mu_bar / Lambda)^2 / 4, t3 = 1.
/// Requires a_bound <= Lambda + delta and a_bound < mu_bar + k (AmplitudeTooLarge).
SAConfig make_sa_config(const SpectralModel& model, double Lambda, double delta, int k, int N, double a_bound,
                        const std::optional<TauChoice>& taus = std::nullopt);

enum class DriverKind { Periodic, Quasiperiodic };

using Phase = std::vector<double>;

/// a(theta^t q) = c0 + sum_i c_i sin(w_i t + q_i) over the torus of phases q.
struct Driver {
  DriverKind kind = DriverKind::Periodic;
  double c0 = 0.0;
  std::vector<double> amplitudes, frequencies;

  int dim() const { return static_cast<int>(amplitudes.size()); }
  double evaluate(const Phase& q, double t = 0.0) const;
  /// Integral of a(theta^s q) over s in [t0, t1], closed form.
  double integral(const Phase& q, double t0, double t1) const;
  /// theta^t q, phases reduced to [0, 2 pi).
  Phase shift(const Phase& q, double t) const;
  double sup_abs() const;  // |c0| + sum |c_i|
  double min_value() const;
  double max_value() const;
  bool constant() const;
  /// Circular distance on the torus (max over components).
  static double phase_distance(const Phase& a, const Phase& b);
};

/// Periodic drivers take exactly one amplitude/frequency pair (or none for a constant).
/// Throws AmplitudeTooLarge if sup |a| exceeds a_bound.
Driver driver_make(DriverKind kind, double c0, const std::vector<double>& amplitudes,
                   const std::vector<double>& frequencies, double a_bound);

enum class ConditionSet { Bundle, Nonosc, Zelik };

std::string to_string(ConditionSet set);
ConditionSet condition_set_from_string(const std::string& s);

struct GapMargins {
  double first = 0.0, second = 0.0;
  bool pass = false;
};

/// bundle: mu/sqrt5 - delta >= 0, k^2 - 2 Lambda k - 4 Lambda^4 / mu^2 >= 0
/// nonosc: mu/2 - delta > 0,     k - 5 Lambda^2 / mu - Lambda >= 0
/// zelik:  mu/4 - delta > 0,     k/2 - 16 Lambda^2 / mu - 2 Lambda >= 0
GapMargins condition_margins(ConditionSet set, double Lambda, double delta, double mu_bar, double k);

struct GapCandidate {
  int k = 0, N = 0;
  double mu_bar = 0.0;
  GapMargins margins;
};

/// For each N in 1..n-1 the smallest k in 1..k_max passing the set, ordered by N.
/// k_max = 0 means ceil(lambda_n). Throws NoCandidate when nothing passes.
std::vector<GapCandidate> gap_search(const SpectralModel& model, double Lambda, double delta, ConditionSet set,
                                     int k_max = 0);

struct ImplicationSweep {
  long points = 0;
  long zelik_points = 0;
  long strict_points = 0;  // bundle holds, zelik fails
  bool pass = true;
  std::optional<std::vector<double>> counterexample;  // (Lambda, delta, mu_bar, k)
};

/// Checks zelik => bundle and zelik => nonosc at every point of the product grid.
ImplicationSweep implication_sweep(const std::vector<double>& Lambdas, const std::vector<double>& deltas,
                                   const std::vector<double>& mu_bars, const std::vector<double>& ks);

std::vector<double> logspace(double lo, double hi, int count);

/// Coefficients of tau1 F_1 + tau2 F_2 + tau3 F_3 on U = H x H. Throws AValueOutOfRange.
QuadraticFormTriple assemble_forms(const SAConfig& cfg, double a_value);

/// Direct evaluation of the three forms from their definitions, weighted by the taus.
double sa_form_direct(const SAConfig& cfg, double a_value, const Vec& v, const Vec& xi);

struct SpatialAvgCondition {
  double defect = 0.0;  // |I L I - a I|
  bool pass = false;    // defect <= delta
};

SpatialAvgCondition spatial_avg_condition(const Mat& L_q, const SAConfig& cfg, double a_value);

enum class HamiltonianRoute { Blocks, Concrete };

/// Blocks: the stationary construction for A - a I, B and the assembled forms.
/// Concrete: the coupled system written out mode by mode.
Hamiltonian assemble_nonaut_hamiltonian(const SAConfig& cfg, double a_value,
                                        HamiltonianRoute route = HamiltonianRoute::Concrete);

/// Per-mode scalar data of the Hamiltonian: v' = x v + c eta, eta' = d v - x eta with
/// x = A_j - a [j in P+Q].
struct ModeCoefficients {
  double A_j = 0.0;
  bool pq = false;
  bool v_stable = false;
  double c = 0.0, d = 0.0;
};
ModeCoefficients mode_coefficients(const SAConfig& cfg, int mode);

struct ContractionOptions {
  double horizon = 0.0;  // 0 picks max(15, 30 / mu_bar)
  double step = 0.02;
  int phases = 4;
  int max_iterations = 20000;
  double tol = 1e-11;  // relative change of the norm estimate
};

struct ContractionCertificate {
  double mid_bound = 0.0, high_bound = 0.0;
  double mid_measured = 0.0, high_measured = 0.0;
  double lp_bound = 0.0, lp_measured = 0.0;            // |L_A| <= 1 / mu_bar
  double lp_high_bound = 0.0, lp_high_measured = 0.0;  // |(P+Q) L_A| <= 1 / (mu_bar + k)
  bool measured_within_bounds = false;                 // both T-norms within bound + 1e-6
  bool lp_within_bounds = false;
  int nodes = 0;
};

/// Analytic bounds with the general taus:
///   |I T|     <= (1/t1 + 1/t3)(t1 delta^2 + t2 Lambda^2) / mu^2
///   |(P+Q) T| <= (1/t2 + 1/t3) t3 Lambda^2 / (mu + k - a_b)^2
/// plus grid operator norms measured by power iteration over sampled phases.
/// Throws NotAContraction when an analytic bound is >= 1.
ContractionCertificate contraction_certificate(const SAConfig& cfg, const Driver& driver,
                                               const ContractionOptions& opts = {});

struct SAEps0 {
  double eps_crit = 0.0;
  double eps0 = 0.0;
};
/// Largest shift keeping both analytic contraction bounds below one, and half of it.
SAEps0 sa_eps0(const SAConfig& cfg);

struct FiberOptions {
  double horizon = 0.0;  // 0 picks default_fiber_horizon
  double h_max = 0.004;
  double h_min = 0.0;    // 0 picks min(h_max, 0.02 / max_j (|A_j| + a_b))
  double growth = 1.03;
  bool richardson = true;
  int max_iterations = 200;
  double tol = 1e-10;
  double beta = 0.0;     // coordinates of H_beta, v -> lambda^beta v
  bool keep_trajectories = false;
};

/// Trajectory of each fiber basis vector, mode by mode: stable and unstable coordinates.
struct FiberTrajectories {
  Vec times;
  Mat zs, zu;  // n x nodes
};

struct FiberResult {
  Phase q;
  Subspace L_plus;
  GraphOperator M_plus;
  std::optional<Mat> P;
  Vec m;  // M+(q) is diagonal in the mode basis
  double beta = 0.0;
  double isotropy_defect = 0.0;
  int vertical_intersection = 0;
  int max_picard_iterations = 0;
  bool converged = false;
  double richardson_change = 0.0;
  double horizon = 0.0;
  int nodes = 0;
  std::optional<FiberTrajectories> trajectories;
};

/// Sharp and flat subspaces of the splitting: stable(A) x stable(-A) and its complement,
/// both in beta-scaled coordinates (the scaling is diagonal so the subspaces do not move).
Subspace sa_sharp_subspace(const SAConfig& cfg);
Subspace sa_flat_subspace(const SAConfig& cfg);

/// Graded time grid on [0, T]: steps start at h_min and grow geometrically up to h_max.
Vec graded_grid(double horizon, double h_min, double h_max, double growth);

/// Horizon used when FiberOptions::horizon is 0; the slowest rate is taken over the
/// frozen Hamiltonians with a in the driver's range.
double default_fiber_horizon(const SAConfig& cfg, const Driver& driver);

/// Picard iteration of Delta eta = T Delta eta + T0 g for each stable basis vector.
/// Throws ContractionFailed, HorizonTooShort.
FiberResult build_fiber(const SAConfig& cfg, const Driver& driver, const Phase& q, const FiberOptions& opts = {});

struct ContinuityRow {
  double phase_offset = 0.0;
  double m_distance = 0.0;
  double grassmann = 0.0;
};

std::vector<ContinuityRow> fiber_continuity(const SAConfig& cfg, const Driver& driver, const Phase& q,
                                            const std::vector<Phase>& q_sequence, const FiberOptions& opts = {});

struct SADecay {
  DecayFit fit;
  std::vector<double> times, norms;
  double M_eps = 0.0;  // sup |Z(t)| e^{eps0 t}
  double eps0 = 0.0;
};

/// Integrates the time-varying system from the columns of Z0 (exponential midpoint rule,
/// per-mode 2x2 exponentials) and fits the decay of |Z(t)|. The unstable coordinate is
/// reset from the fiber trajectory at every fiber node. The fiber must carry trajectories
/// and be built with beta = 0. Throws NotInFiber.
SADecay exp_decay_fit(const SAConfig& cfg, const Driver& driver, const FiberResult& fiber, const Mat& Z0,
                      double t_start = 2.0, double t_end = 0.0);

struct VFormPoint {
  double a = 0.0;
  double min_eig = 0.0;
  double delta_v = 0.0;  // bisection value
};

struct VFormCertificate {
  double delta_V = 0.0;
  double a_argmin = 0.0;
  double bracket_mid = 0.0;   // mu^2/4 - delta^2 at eps = 0 with the default taus
  double bracket_high = 0.0;  // mu^2 + mu k - Lambda^2 - mu^2/4 - 4 Lambda^2 - mu (Lambda + delta)
  std::vector<VFormPoint> points;
  double affine_route_min = 0.0;  // min eig from endpoint-and-midpoint checks on each grid cell
};

/// Symmetric matrix of <A v - a v + xi_I + xi_c, mu (P_N - Q_N) v> + F_a(v, xi) in (v, xi_I, xi_c).
Mat v_form_matrix(const SAConfig& cfg, double a_value);

/// Default grid: 64 uniform values across [a_lo, a_hi] plus both endpoints.
std::vector<double> default_a_grid(double a_lo, double a_hi);

/// Maximizes delta_V with S(a) - delta_V I >= 0 over the grid (bisection, 60 steps).
/// Throws NotPositive if the nonosc inequalities fail or the minimum is not positive.
VFormCertificate v_form_certificate(const SAConfig& cfg, const std::vector<double>& a_grid);

/// P_jj > 0 on Ran P_N and < 0 on Ran Q_N.
bool v_sign_structure(const SAConfig& cfg, const Mat& P);

}  // namespace lqrlag
