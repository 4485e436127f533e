#include "lqrlag/spatial_averaging.hpp"

#include "lqrlag/errors.hpp"
#include "sa_internal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace lqrlag {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_phase(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  return r;
}

void require_a(const SAConfig& cfg, double a) {
  if (!(std::abs(a) <= cfg.a_bound * (1.0 + 1e-12) + 1e-15))
    throw Error(ErrorCode::AValueOutOfRange,
                "|a| = " + std::to_string(std::abs(a)) + " exceeds a_bound = " + std::to_string(cfg.a_bound));
}

Mat p_n(const SAConfig& cfg) {
  Mat p = Mat::Zero(cfg.n(), cfg.n());
  for (int j = 0; j < cfg.N; ++j) p(j, j) = 1.0;
  return p;
}

std::vector<Phase> sample_phases(const Driver& d, int count) {
  if (d.constant() || count <= 1) return {Phase(d.dim(), 0.0)};
  std::vector<Phase> out;
  for (int p = 0; p < count; ++p) out.emplace_back(d.dim(), kTwoPi * p / count);
  return out;
}

}  // namespace

// ---- configuration ----

Mat SAConfig::A() const {
  return (alpha - model.eigenvalues.array()).matrix().asDiagonal();
}

Mat SAConfig::B() const {
  Mat b(n(), 2 * n());
  b << Mat::Identity(n(), n()), Mat::Identity(n(), n());
  return b;
}

bool SAConfig::v_stable(int mode) const { return model.lambda(mode) > alpha; }

bool SAConfig::in_pq(int mode) const { return proj.I_mid(mode - 1, mode - 1) == 0.0; }

SAConfig make_sa_config(const SpectralModel& model, double Lambda, double delta, int k, int N, double a_bound,
                        const std::optional<TauChoice>& taus) {
  if (!(Lambda > 0.0) || !(delta > 0.0)) throw Error(ErrorCode::InvalidConfig, "Lambda and delta must be positive");
  if (!(a_bound >= 0.0)) throw Error(ErrorCode::InvalidConfig, "a_bound must be nonnegative");
  SAConfig c;
  c.model = model;
  c.Lambda = Lambda;
  c.delta = delta;
  c.k = k;
  c.N = N;
  c.proj = mode_projectors(model, k, N);
  c.mu_bar = 0.5 * (model.lambda(N + 1) - model.lambda(N));
  c.alpha = 0.5 * (model.lambda(N) + model.lambda(N + 1));
  if (!(c.mu_bar > 0.0)) throw Error(ErrorCode::InvalidConfig, "no gap between lambda_N and lambda_{N+1}");
  if (taus) {
    c.taus = *taus;
  } else {
    c.taus = {1.0, 0.25 * (c.mu_bar / Lambda) * (c.mu_bar / Lambda), 1.0};
  }
  if (!(c.taus.t1 > 0.0 && c.taus.t2 > 0.0 && c.taus.t3 > 0.0))
    throw Error(ErrorCode::InvalidConfig, "taus must be positive");
  if (a_bound > Lambda + delta + 1e-12)
    throw Error(ErrorCode::AmplitudeTooLarge, "a_bound exceeds Lambda + delta");
  if (!(a_bound < c.mu_bar + k)) throw Error(ErrorCode::AmplitudeTooLarge, "a_bound must stay below mu_bar + k");
  c.a_bound = a_bound;
  return c;
}

// ---- driver ----

double Driver::evaluate(const Phase& q, double t) const {
  double a = c0;
  for (int i = 0; i < dim(); ++i) a += amplitudes[i] * std::sin(frequencies[i] * t + q[i]);
  return a;
}

double Driver::integral(const Phase& q, double t0, double t1) const {
  double s = c0 * (t1 - t0);
  for (int i = 0; i < dim(); ++i) {
    const double w = frequencies[i];
    if (w == 0.0) {
      s += amplitudes[i] * std::sin(q[i]) * (t1 - t0);
      continue;
    }
    // cos(x0) - cos(x1) = 2 sin((x0 + x1)/2) sin((x1 - x0)/2)
    const double x0 = w * t0 + q[i], x1 = w * t1 + q[i];
    s += amplitudes[i] * 2.0 * std::sin(0.5 * (x0 + x1)) * std::sin(0.5 * (x1 - x0)) / w;
  }
  return s;
}

Phase Driver::shift(const Phase& q, double t) const {
  Phase out(q.size());
  for (size_t i = 0; i < q.size(); ++i) out[i] = wrap_phase(q[i] + frequencies[i] * t);
  return out;
}

double Driver::sup_abs() const {
  double s = std::abs(c0);
  for (double c : amplitudes) s += std::abs(c);
  return s;
}

double Driver::min_value() const {
  double s = c0;
  for (double c : amplitudes) s -= std::abs(c);
  return s;
}

double Driver::max_value() const {
  double s = c0;
  for (double c : amplitudes) s += std::abs(c);
  return s;
}

bool Driver::constant() const {
  return std::all_of(amplitudes.begin(), amplitudes.end(), [](double c) { return c == 0.0; });
}

double Driver::phase_distance(const Phase& a, const Phase& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::DimensionMismatch, "phase dimensions differ");
  double d = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double x = wrap_phase(a[i] - b[i]);
    d = std::max(d, std::min(x, kTwoPi - x));
  }
  return d;
}

Driver driver_make(DriverKind kind, double c0, const std::vector<double>& amplitudes,
                   const std::vector<double>& frequencies, double a_bound) {
  if (amplitudes.size() != frequencies.size())
    throw Error(ErrorCode::DimensionMismatch, "amplitudes and frequencies differ in length");
  if (kind == DriverKind::Periodic && amplitudes.size() > 1)
    throw Error(ErrorCode::InvalidConfig, "a periodic driver has one harmonic");
  Driver d{kind, c0, amplitudes, frequencies};
  if (d.sup_abs() > a_bound + 1e-12)
    throw Error(ErrorCode::AmplitudeTooLarge,
                "sup|a| = " + std::to_string(d.sup_abs()) + " > a_bound = " + std::to_string(a_bound));
  return d;
}

// ---- inequality sets ----

std::string to_string(ConditionSet set) {
  switch (set) {
    case ConditionSet::Bundle: return "bundle";
    case ConditionSet::Nonosc: return "nonosc";
    case ConditionSet::Zelik: return "zelik";
  }
  return "bundle";
}

ConditionSet condition_set_from_string(const std::string& s) {
  if (s == "bundle") return ConditionSet::Bundle;
  if (s == "nonosc") return ConditionSet::Nonosc;
  if (s == "zelik") return ConditionSet::Zelik;
  throw Error(ErrorCode::InvalidConfig, "unknown condition set '" + s + "'");
}

GapMargins condition_margins(ConditionSet set, double L, double d, double mu, double k) {
  constexpr double slack = 1e-12;
  GapMargins m;
  switch (set) {
    case ConditionSet::Bundle:
      m.first = mu / std::sqrt(5.0) - d;
      m.second = k * k - 2.0 * L * k - 4.0 * std::pow(L, 4) / (mu * mu);
      m.pass = m.first >= -slack && m.second >= -slack;
      break;
    case ConditionSet::Nonosc:
      m.first = mu / 2.0 - d;
      m.second = k - 5.0 * L * L / mu - L;
      m.pass = m.first > 0.0 && m.second >= -slack;
      break;
    case ConditionSet::Zelik:
      m.first = mu / 4.0 - d;
      m.second = k / 2.0 - 16.0 * L * L / mu - 2.0 * L;
      m.pass = m.first > 0.0 && m.second >= -slack;
      break;
  }
  return m;
}

std::vector<GapCandidate> gap_search(const SpectralModel& model, double Lambda, double delta, ConditionSet set,
                                     int k_max) {
  if (model.n() < 2) throw Error(ErrorCode::NoCandidate, "need at least two eigenvalues");
  if (k_max <= 0) k_max = std::max(1, static_cast<int>(std::ceil(model.lambda(model.n()))));
  std::vector<GapCandidate> out;
  for (int N = 1; N < model.n(); ++N) {
    const double mu = 0.5 * (model.lambda(N + 1) - model.lambda(N));
    if (!(mu > 0.0)) continue;
    for (int k = 1; k <= k_max; ++k) {
      const GapMargins m = condition_margins(set, Lambda, delta, mu, k);
      if (m.pass) {
        out.push_back({k, N, mu, m});
        break;
      }
    }
  }
  if (out.empty()) throw Error(ErrorCode::NoCandidate, "no (k, N) satisfies the " + to_string(set) + " set");
  return out;
}

std::vector<double> logspace(double lo, double hi, int count) {
  std::vector<double> out;
  if (count == 1) return {lo};
  for (int i = 0; i < count; ++i)
    out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1)));
  return out;
}

ImplicationSweep implication_sweep(const std::vector<double>& Ls, const std::vector<double>& ds,
                                   const std::vector<double>& mus, const std::vector<double>& ks) {
  ImplicationSweep r;
  for (double L : Ls)
    for (double d : ds)
      for (double mu : mus)
        for (double k : ks) {
          ++r.points;
          const bool z = condition_margins(ConditionSet::Zelik, L, d, mu, k).pass;
          const bool b = condition_margins(ConditionSet::Bundle, L, d, mu, k).pass;
          const bool o = condition_margins(ConditionSet::Nonosc, L, d, mu, k).pass;
          if (z) {
            ++r.zelik_points;
            if ((!b || !o) && r.pass) {
              r.pass = false;
              r.counterexample = std::vector<double>{L, d, mu, k};
            }
          } else if (b) {
            ++r.strict_points;
          }
        }
  return r;
}

// ---- forms and Hamiltonians ----

QuadraticFormTriple assemble_forms(const SAConfig& cfg, double a) {
  require_a(cfg, a);
  const int n = cfg.n();
  const TauChoice& t = cfg.taus;
  const Mat& I = cfg.proj.I_mid;
  const Mat PQ = cfg.PQ();
  const double L2 = cfg.Lambda * cfg.Lambda, d2 = cfg.delta * cfg.delta;
  const Mat f1 = (t.t1 * a * a - t.t1 * d2 - t.t2 * L2) * I - t.t3 * L2 * PQ;
  Mat f2 = Mat::Zero(2 * n, n);
  f2.topRows(n) = -t.t1 * a * I;
  Mat f3 = Mat::Zero(2 * n, 2 * n);
  f3.topLeftCorner(n, n) = t.t1 * I + t.t2 * PQ;
  f3.bottomRightCorner(n, n) = t.t3 * Mat::Identity(n, n);
  return make_form(f1, f2, f3, 1e-12);
}

double sa_form_direct(const SAConfig& cfg, double a, const Vec& v, const Vec& xi) {
  const int n = cfg.n();
  if (v.size() != n || xi.size() != 2 * n) throw Error(ErrorCode::DimensionMismatch, "v in H, xi in H x H");
  const Mat& I = cfg.proj.I_mid;
  const Mat PQ = cfg.PQ();
  const Vec xi_i = xi.head(n), xi_c = xi.tail(n);
  const double L2 = cfg.Lambda * cfg.Lambda, d2 = cfg.delta * cfg.delta;
  const double f1 = (I * xi_i - a * I * v).squaredNorm() - d2 * (I * v).squaredNorm();
  const double f2 = (PQ * xi_i).squaredNorm() - L2 * (I * v).squaredNorm();
  const double f3 = xi_c.squaredNorm() - L2 * (PQ * v).squaredNorm();
  return cfg.taus.t1 * f1 + cfg.taus.t2 * f2 + cfg.taus.t3 * f3;
}

SpatialAvgCondition spatial_avg_condition(const Mat& L_q, const SAConfig& cfg, double a) {
  if (L_q.rows() != cfg.n() || L_q.cols() != cfg.n()) throw Error(ErrorCode::DimensionMismatch, "L_q must be n x n");
  const Mat& I = cfg.proj.I_mid;
  SpatialAvgCondition r;
  r.defect = linalg::spectral_norm(Mat(I * L_q * I - a * I));
  r.pass = r.defect <= cfg.delta;
  return r;
}

ModeCoefficients mode_coefficients(const SAConfig& cfg, int mode) {
  const TauChoice& t = cfg.taus;
  const double L2 = cfg.Lambda * cfg.Lambda, d2 = cfg.delta * cfg.delta;
  ModeCoefficients m;
  m.A_j = cfg.alpha - cfg.model.lambda(mode);
  m.pq = cfg.in_pq(mode);
  m.v_stable = cfg.v_stable(mode);
  if (m.pq) {
    m.c = 1.0 / t.t2 + 1.0 / t.t3;
    m.d = -t.t3 * L2;
  } else {
    m.c = 1.0 / t.t1 + 1.0 / t.t3;
    m.d = -(t.t1 * d2 + t.t2 * L2);
  }
  return m;
}

Hamiltonian assemble_nonaut_hamiltonian(const SAConfig& cfg, double a, HamiltonianRoute route) {
  require_a(cfg, a);
  const int n = cfg.n();
  const Mat Aq = cfg.A() - a * Mat::Identity(n, n);
  const QuadraticFormTriple form = assemble_forms(cfg, a);
  if (route == HamiltonianRoute::Blocks) return assemble_hamiltonian(Aq, cfg.B(), form);

  Hamiltonian h;
  h.A = Aq;
  h.B = cfg.B();
  h.form = form;
  h.H1 = cfg.A() - a * cfg.PQ();
  h.H2 = Mat::Zero(n, n);
  h.H3 = Mat::Zero(n, n);
  for (int j = 1; j <= n; ++j) {
    const ModeCoefficients m = mode_coefficients(cfg, j);
    h.H3(j - 1, j - 1) = m.c;
    h.H2(j - 1, j - 1) = m.d;
  }
  h.A_hat = h.H1;
  h.H.resize(2 * n, 2 * n);
  h.H << h.H1, h.H3, h.H2, -h.H1.transpose();
  return h;
}

// ---- scalar chains ----

namespace detail {

ScalarStep forward_step(double x, double h) {
  const double z = h * x;
  const double p1 = linalg::phi1(z), p2 = linalg::phi2(z);
  return {std::exp(z), h * (p1 - p2), h * p2};
}

ScalarStep backward_step(double x, double h) {
  const ScalarStep r = forward_step(-x, h);
  return {r.E, -r.W1, -r.W0};
}

ScalarSolve::ScalarSolve(const Vec& times, const Vec& x_steps, bool forward) : forward_(forward) {
  const int steps = static_cast<int>(times.size()) - 1;
  steps_.resize(steps);
  for (int i = 0; i < steps; ++i) {
    const double h = times(i + 1) - times(i);
    steps_[i] = forward ? forward_step(x_steps(i), h) : backward_step(x_steps(i), h);
  }
}

Vec ScalarSolve::apply(const Vec& f) const {
  const int nodes = static_cast<int>(steps_.size()) + 1;
  Vec y = Vec::Zero(nodes);
  if (forward_) {
    for (int i = 0; i + 1 < nodes; ++i) {
      const ScalarStep& s = steps_[i];
      y(i + 1) = s.E * y(i) + s.W0 * f(i) + s.W1 * f(i + 1);
    }
  } else {
    for (int i = nodes - 2; i >= 0; --i) {
      const ScalarStep& s = steps_[i];
      y(i) = s.E * y(i + 1) + s.W0 * f(i) + s.W1 * f(i + 1);
    }
  }
  return y;
}

// y = L^{-1} K f with L bidiagonal; the transpose is K^T L^{-T} run in the opposite direction.
Vec ScalarSolve::apply_transpose(const Vec& g) const {
  const int nodes = static_cast<int>(steps_.size()) + 1;
  const int last = nodes - 1;
  Vec u(nodes), out = Vec::Zero(nodes);
  if (forward_) {
    u(last) = g(last);
    for (int i = last - 1; i >= 0; --i) u(i) = g(i) + steps_[i].E * u(i + 1);
    u(0) = 0.0;  // row 0 of K is empty
    for (int j = 0; j < nodes; ++j) {
      if (j <= last - 1) out(j) += steps_[j].W0 * u(j + 1);
      if (j >= 1) out(j) += steps_[j - 1].W1 * u(j);
    }
  } else {
    u(0) = g(0);
    for (int i = 0; i < last; ++i) u(i + 1) = g(i + 1) + steps_[i].E * u(i);
    u(last) = 0.0;  // row `last` of K is empty
    for (int j = 0; j < nodes; ++j) {
      if (j <= last - 1) out(j) += steps_[j].W0 * u(j);
      if (j >= 1) out(j) += steps_[j - 1].W1 * u(j - 1);
    }
  }
  return out;
}

ModeChain::ModeChain(const ModeCoefficients& mc, const Driver& driver, const Phase& q, const Vec& times)
    : mc_(mc), times_(times) {
  const int nodes = static_cast<int>(times.size());
  a_nodes_.resize(nodes);
  for (int i = 0; i < nodes; ++i) a_nodes_(i) = driver.evaluate(q, times(i));
  Vec x(std::max(nodes - 1, 0));
  for (int i = 0; i + 1 < nodes; ++i) {
    const double h = times(i + 1) - times(i);
    const double abar = mc.pq ? driver.integral(q, times(i), times(i + 1)) / h : 0.0;
    x(i) = mc.A_j - abar;
  }
  sv_ = ScalarSolve(times, x, mc.v_stable);
  se_ = ScalarSolve(times, -x, !mc.v_stable);
}

Vec ModeChain::apply_T(const Vec& f) const { return solve_eta(mc_.d * solve_v(mc_.c * f)); }

Vec ModeChain::apply_T_transpose(const Vec& g) const {
  return mc_.c * sv_.apply_transpose(mc_.d * se_.apply_transpose(g));
}

Vec trapezoid_weights(const Vec& t) {
  const int nodes = static_cast<int>(t.size());
  Vec w = Vec::Zero(nodes);
  for (int i = 0; i + 1 < nodes; ++i) {
    const double h = t(i + 1) - t(i);
    w(i) += 0.5 * h;
    w(i + 1) += 0.5 * h;
  }
  return w;
}

double power_norm(const std::function<Vec(const Vec&)>& apply, const std::function<Vec(const Vec&)>& apply_t,
                  const Vec& w, int max_iterations, double tol, unsigned seed) {
  const Vec sw = w.array().sqrt().matrix();
  const Vec isw = sw.cwiseInverse();
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  Vec x(w.size());
  for (int i = 0; i < x.size(); ++i) x(i) = u(rng);
  x.normalize();
  double est = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    const Vec y = sw.cwiseProduct(apply(isw.cwiseProduct(x)));
    const double s = y.norm();
    if (s == 0.0) return 0.0;
    Vec z = isw.cwiseProduct(apply_t(sw.cwiseProduct(y)));
    const double zn = z.norm();
    x = z / zn;
    if (it > 0 && std::abs(s - est) <= tol * s) {
      est = s;
      break;
    }
    est = s;
  }
  return est;
}

}  // namespace detail

// ---- contraction certificate ----

namespace {

struct AnalyticBounds {
  double mid = 0.0, high = 0.0;
};

AnalyticBounds analytic_bounds(const SAConfig& cfg, double eps) {
  const TauChoice& t = cfg.taus;
  const double L2 = cfg.Lambda * cfg.Lambda, d2 = cfg.delta * cfg.delta;
  const double mu = cfg.mu_bar - eps;
  const double gap = cfg.mu_bar + cfg.k - cfg.a_bound - eps;
  AnalyticBounds b;
  b.mid = (1.0 / t.t1 + 1.0 / t.t3) * (t.t1 * d2 + t.t2 * L2) / (mu * mu);
  b.high = gap > 0.0 ? (1.0 / t.t2 + 1.0 / t.t3) * t.t3 * L2 / (gap * gap)
                     : std::numeric_limits<double>::infinity();
  return b;
}

}  // namespace

SAEps0 sa_eps0(const SAConfig& cfg) {
  const TauChoice& t = cfg.taus;
  const double L2 = cfg.Lambda * cfg.Lambda, d2 = cfg.delta * cfg.delta;
  const double mid = cfg.mu_bar - std::sqrt((1.0 / t.t1 + 1.0 / t.t3) * (t.t1 * d2 + t.t2 * L2));
  const double high = cfg.mu_bar + cfg.k - cfg.a_bound - std::sqrt((1.0 / t.t2 + 1.0 / t.t3) * t.t3 * L2);
  SAEps0 e;
  e.eps_crit = std::max(0.0, std::min({mid, high, cfg.mu_bar}));
  e.eps0 = 0.5 * e.eps_crit;
  return e;
}

ContractionCertificate contraction_certificate(const SAConfig& cfg, const Driver& driver,
                                               const ContractionOptions& opts) {
  const AnalyticBounds ab = analytic_bounds(cfg, 0.0);
  if (!(ab.mid < 1.0) || !(ab.high < 1.0))
    throw Error(ErrorCode::NotAContraction, "analytic bounds: intermediate " + std::to_string(ab.mid) +
                                                ", outer " + std::to_string(ab.high));
  const double T = opts.horizon > 0.0 ? opts.horizon : std::max(15.0, 30.0 / cfg.mu_bar);
  const int nodes = static_cast<int>(std::ceil(T / opts.step)) + 1;
  const Vec times = Vec::LinSpaced(nodes, 0.0, T);
  const Vec w = detail::trapezoid_weights(times);

  ContractionCertificate c;
  c.mid_bound = ab.mid;
  c.high_bound = ab.high;
  c.lp_bound = 1.0 / cfg.mu_bar;
  c.lp_high_bound = 1.0 / (cfg.mu_bar + cfg.k);
  c.nodes = nodes;

  const std::vector<Phase> phases = sample_phases(driver, opts.phases);
  const Driver frozen = driver_make(DriverKind::Periodic, 0.0, {}, {}, 0.0);
  for (int j = 1; j <= cfg.n(); ++j) {
    const ModeCoefficients mc = mode_coefficients(cfg, j);
    const std::vector<Phase> qs = mc.pq ? phases : std::vector<Phase>{phases.front()};
    for (const Phase& q : qs) {
      const detail::ModeChain chain(mc, driver, q, times);
      const double s = detail::power_norm([&](const Vec& f) { return chain.apply_T(f); },
                                          [&](const Vec& g) { return chain.apply_T_transpose(g); }, w,
                                          opts.max_iterations, opts.tol);
      (mc.pq ? c.high_measured : c.mid_measured) = std::max(mc.pq ? c.high_measured : c.mid_measured, s);
    }
    ModeCoefficients lp = mc;
    lp.pq = false;
    const detail::ModeChain chain(lp, frozen, {}, times);
    const double s = detail::power_norm([&](const Vec& f) { return chain.solve_v(f); },
                                        [&](const Vec& g) { return chain.v_solve().apply_transpose(g); }, w,
                                        opts.max_iterations, opts.tol);
    c.lp_measured = std::max(c.lp_measured, s);
    if (mc.pq) c.lp_high_measured = std::max(c.lp_high_measured, s);
  }
  c.measured_within_bounds = c.mid_measured <= c.mid_bound + 1e-6 && c.high_measured <= c.high_bound + 1e-6;
  c.lp_within_bounds = c.lp_measured <= c.lp_bound + 1e-6 && c.lp_high_measured <= c.lp_high_bound + 1e-6;
  return c;
}

// ---- V-form certificate ----

Mat v_form_matrix(const SAConfig& cfg, double a) {
  const int n = cfg.n();
  const QuadraticFormTriple f = assemble_forms(cfg, a);
  const Mat pn = p_n(cfg);
  const Mat D = cfg.mu_bar * (pn - (Mat::Identity(n, n) - pn));
  Mat s = Mat::Zero(3 * n, 3 * n);
  s.topLeftCorner(n, n) = D * (cfg.A() - a * Mat::Identity(n, n)) + f.F1;
  Mat off(n, 2 * n);
  off << 0.5 * D, 0.5 * D;
  off += f.F2.transpose();
  s.block(0, n, n, 2 * n) = off;
  s.block(n, 0, 2 * n, n) = off.transpose();
  s.bottomRightCorner(2 * n, 2 * n) = f.F3;
  return linalg::symmetric_part(s);
}

std::vector<double> default_a_grid(double lo, double hi) {
  std::vector<double> g{lo};
  for (int i = 0; i < 64; ++i) g.push_back(lo + (hi - lo) * (i + 0.5) / 64.0);
  g.push_back(hi);
  return g;
}

namespace {

bool is_psd(const Mat& s) {
  Eigen::LDLT<Mat> ldlt(s);
  if (ldlt.info() != Eigen::Success) return false;
  const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  return ldlt.vectorD().minCoeff() >= -1e-14 * scale;
}

double bisect_delta(const Mat& s) {
  double lo = 0.0, hi = s.diagonal().minCoeff();
  if (!is_psd(s)) return linalg::min_eigenvalue_sym(s);  // not positive: report the (negative) minimum
  if (hi <= 0.0) return 0.0;
  const Mat I = Mat::Identity(s.rows(), s.cols());
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (is_psd(Mat(s - mid * I)))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace

VFormCertificate v_form_certificate(const SAConfig& cfg, const std::vector<double>& a_grid) {
  const GapMargins nm = condition_margins(ConditionSet::Nonosc, cfg.Lambda, cfg.delta, cfg.mu_bar, cfg.k);
  const TauChoice& t = cfg.taus;
  const double mu = cfg.mu_bar, L2 = cfg.Lambda * cfg.Lambda, d2 = cfg.delta * cfg.delta;
  VFormCertificate c;
  c.bracket_mid = mu * mu - d2 * t.t1 - L2 * t.t2 - mu * mu / (4.0 * t.t3) - mu * mu / (4.0 * t.t1);
  c.bracket_high = mu * mu + mu * cfg.k - L2 * t.t3 - mu * mu / (4.0 * t.t3) - 4.0 * L2 -
                   mu * (cfg.Lambda + cfg.delta);
  if (!nm.pass)
    throw Error(ErrorCode::NotPositive, "nonoscillation inequalities fail: margins " + std::to_string(nm.first) +
                                            ", " + std::to_string(nm.second));
  if (a_grid.empty()) throw Error(ErrorCode::InvalidConfig, "empty a grid");
  c.delta_V = std::numeric_limits<double>::infinity();
  c.affine_route_min = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < a_grid.size(); ++i) {
    const double a = a_grid[i];
    const Mat s = v_form_matrix(cfg, a);
    VFormPoint p{a, linalg::min_eigenvalue_sym(s), bisect_delta(s)};
    c.points.push_back(p);
    if (p.delta_v < c.delta_V) {
      c.delta_V = p.delta_v;
      c.a_argmin = a;
    }
    c.affine_route_min = std::min(c.affine_route_min, p.min_eig);
    if (i + 1 < a_grid.size())
      c.affine_route_min =
          std::min(c.affine_route_min, linalg::min_eigenvalue_sym(v_form_matrix(cfg, 0.5 * (a + a_grid[i + 1]))));
  }
  if (!(c.delta_V > 0.0))
    throw Error(ErrorCode::NotPositive, "V-form matrix is not positive definite at a = " + std::to_string(c.a_argmin));
  return c;
}

bool v_sign_structure(const SAConfig& cfg, const Mat& P) {
  const int n = cfg.n(), N = cfg.N;
  if (P.rows() != n || P.cols() != n) throw Error(ErrorCode::DimensionMismatch, "P must be n x n");
  const Mat ps = linalg::symmetric_part(P);
  const bool upper = linalg::min_eigenvalue_sym(Mat(ps.topLeftCorner(N, N))) > 0.0;
  const bool lower = linalg::min_eigenvalue_sym(Mat(-ps.bottomRightCorner(n - N, n - N))) > 0.0;
  return upper && lower;
}

}  // namespace lqrlag
