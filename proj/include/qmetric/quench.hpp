#pragma once

// Quench-based reconstruction of the non-Abelian quantum metric.
//
// A ground state (or a superposition of two degenerate ground states) is
// prepared at lambda, the parameters are ramped to lambda + dl * e_eta, and
// the probability Gamma of ending in the excited subspace of the end point
// is recorded. To second order Gamma = c^dagger g_{eta eta} c dl^2, so
// suitable combinations of runs give every component class of g:
//   g^{jj}_{mm}   = Gamma^{jj}_{mm} / dl^2
//   g^{jj}_{mn}   = (Gamma^{jj}_{mn} - Gamma^{jj}_{mm} - Gamma^{jj}_{nn}) / (2 dl^2)
//   Re g^{jj'}    = (2 Gamma^{aa} - Gamma^{jj} - Gamma^{j'j'}) / (2 dl^2)
//   Im g^{jj'}    = (Gamma^{jj} + Gamma^{j'j'} - 2 Gamma^{bb}) / (2 dl^2)
// with a = (psi_j + psi_j')/sqrt2 and b = (psi_j + i psi_j')/sqrt2.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "qmetric/errors.hpp"
#include "qmetric/geometry.hpp"
#include "qmetric/models.hpp"
#include "qmetric/numlin.hpp"
#include "qmetric/parallel.hpp"

namespace qmetric {

// ---------------------------------------------------------------------------
// prepared states

enum class StateKind { band, superposition_a, superposition_b };

inline std::string_view state_kind_name(StateKind k) {
  switch (k) {
    case StateKind::band: return "band";
    case StateKind::superposition_a: return "superposition-a";
    case StateKind::superposition_b: return "superposition-b";
  }
  return "unknown";
}

struct PreparedState {
  StateKind kind = StateKind::band;
  std::size_t j = 0;
  std::size_t jp = 0;  // second band for superpositions

  static PreparedState band(std::size_t j) { return {StateKind::band, j, j}; }
  static PreparedState a(std::size_t j, std::size_t jp) { return {StateKind::superposition_a, j, jp}; }
  static PreparedState b(std::size_t j, std::size_t jp) { return {StateKind::superposition_b, j, jp}; }

  // Coefficients over the gauge-fixed ground frame.
  std::vector<cplx> coefficients(std::size_t degeneracy) const {
    if (j >= degeneracy || jp >= degeneracy) throw ContractViolation("prepared state band index out of range");
    std::vector<cplx> c(degeneracy, 0.0);
    if (kind == StateKind::band) {
      c[j] = 1.0;
      return c;
    }
    if (j == jp) throw ContractViolation("superposition needs two distinct bands");
    const double r = 1.0 / std::sqrt(2.0);
    c[j] = r;
    c[jp] = kind == StateKind::superposition_a ? cplx(r) : kI * r;
    return c;
  }

  friend auto operator<=>(const PreparedState&, const PreparedState&) = default;
};

// ---------------------------------------------------------------------------
// quench specification

enum class ScheduleKind { sudden, linear };
enum class TimeUnit { two_pi, one };

inline std::string_view schedule_name(ScheduleKind k) { return k == ScheduleKind::sudden ? "sudden" : "linear"; }
inline std::string_view time_unit_name(TimeUnit u) { return u == TimeUnit::two_pi ? "two-pi" : "one"; }

inline ScheduleKind parse_schedule(std::string_view s) {
  if (s == "sudden") return ScheduleKind::sudden;
  if (s == "linear") return ScheduleKind::linear;
  throw ContractViolation("unknown schedule '" + std::string(s) + "'");
}
inline TimeUnit parse_time_unit(std::string_view s) {
  if (s == "two-pi") return TimeUnit::two_pi;
  if (s == "one") return TimeUnit::one;
  throw ContractViolation("unknown time unit '" + std::string(s) + "'");
}

struct Schedule {
  ScheduleKind kind = ScheduleKind::linear;
  double T = 0.001;  // ramp duration in the chosen time unit
  std::size_t substeps = 100;
  TimeUnit time_unit = TimeUnit::two_pi;

  static Schedule sudden() { return {ScheduleKind::sudden, 0.0, 1, TimeUnit::two_pi}; }
  static Schedule linear(double T, std::size_t substeps = 100, TimeUnit unit = TimeUnit::two_pi) {
    return {ScheduleKind::linear, T, substeps, unit};
  }

  // Evolution time with hbar = Omega_0 = 1.
  double duration() const { return (time_unit == TimeUnit::two_pi ? 2.0 * kPi : 1.0) * T; }
};

// Protocol parameters shared by all runs of one measurement.
struct QuenchProtocol {
  double delta_lambda = kPi / 100;
  Schedule schedule = Schedule::linear(0.001);
};

struct QuenchSpec {
  ParameterPoint start;
  std::vector<std::size_t> directions;  // one axis, or two axes for e_mu + e_nu
  double delta_lambda = kPi / 100;
  Schedule schedule;

  std::vector<double> direction_vector() const {
    std::vector<double> v(start.dim(), 0.0);
    for (auto a : directions) v.at(a) += 1.0;
    return v;
  }
  ParameterPoint end() const { return start.shifted(direction_vector(), delta_lambda); }

  void validate() const {
    if (!(delta_lambda > 0.0) || !std::isfinite(delta_lambda))
      throw ContractViolation("quench step must be positive");
    if (directions.empty() || directions.size() > 2) throw ContractViolation("quench takes one or two directions");
    if (directions.size() == 2 && directions[0] == directions[1])
      throw ContractViolation("two-direction quench needs distinct axes");
    for (auto a : directions)
      if (a >= start.dim()) throw ContractViolation("quench direction out of range");
    if (schedule.kind == ScheduleKind::linear) {
      if (schedule.substeps < 1) throw ContractViolation("linear schedule needs at least one substep");
      if (!(schedule.T >= 0.0) || !std::isfinite(schedule.T))
        throw ContractViolation("ramp time must be finite and non-negative");
    }
  }
};

struct TransitionResult {
  double gamma = 0.0;              // probability in the excited subspace
  double total_probability = 0.0;  // over all end-point eigenstates
  QuenchSpec spec;
  PreparedState state;
};

// ---------------------------------------------------------------------------
// dynamics

inline Vector4 prepare(const GroundBundle& b, const PreparedState& s) {
  const auto c = s.coefficients(b.degeneracy());
  Vector4 psi{};
  for (std::size_t j = 0; j < c.size(); ++j) psi = axpy(c[j], b.ground[j], psi);
  return psi;
}

// Evolves the prepared state along the quench path. Sudden quenches leave the
// state untouched; linear ramps use midpoint exponentials
//   U = prod_k exp(-i H(lambda(t_k + dt/2)) dt).
inline Vector4 evolve(const ModelSpec& model, const QuenchSpec& q, const Vector4& psi0) {
  q.validate();
  if (q.schedule.kind == ScheduleKind::sudden) return psi0;
  const std::size_t n = q.schedule.substeps;
  const double tau = q.schedule.duration();
  const double dt = tau / static_cast<double>(n);
  const std::vector<double> dir = q.direction_vector();
  Vector4 psi = psi0;
  for (std::size_t k = 0; k < n; ++k) {
    const double frac = (static_cast<double>(k) + 0.5) / static_cast<double>(n);
    const ParameterPoint lam = q.start.shifted(dir, frac * q.delta_lambda);
    psi = apply_unitary_exp(hamiltonian(model, lam), dt, psi);
  }
  return psi;
}

inline Vector4 evolve(const ModelSpec& model, const QuenchSpec& q, const PreparedState& s, Gauge gauge,
                      const GeometryOptions& opt = {}) {
  const GroundBundle b = ground_bundle(model, q.start, gauge, opt);
  return evolve(model, q, prepare(b, s));
}

inline TransitionResult transition_probability(const ModelSpec& model, const QuenchSpec& q, const GroundBundle& start,
                                               const PreparedState& s, const GeometryOptions& opt = {}) {
  const Vector4 psi = evolve(model, q, prepare(start, s));
  // Projection onto a subspace is gauge free; raw eigenvectors suffice.
  const GroundBundle end = ground_bundle(model, q.end(), Gauge::eigensolver_raw, opt);
  TransitionResult r;
  r.spec = q;
  r.state = s;
  double ground = 0.0;
  for (const auto& v : end.excited) r.gamma += std::norm(inner(v, psi));
  for (const auto& v : end.ground) ground += std::norm(inner(v, psi));
  r.total_probability = r.gamma + ground;
  return r;
}

inline TransitionResult transition_probability(const ModelSpec& model, const QuenchSpec& q, const PreparedState& s,
                                               Gauge gauge, const GeometryOptions& opt = {}) {
  return transition_probability(model, q, ground_bundle(model, q.start, gauge, opt), s, opt);
}

// ---------------------------------------------------------------------------
// inversion formulas

inline double extract_diag(double gamma, double dl) {
  if (!(dl > 0.0)) throw ContractViolation("extract_diag: step must be positive");
  return gamma / (dl * dl);
}

inline double extract_offdiag_same_band(double gamma_munu, double gamma_mumu, double gamma_nunu, double dl) {
  if (!(dl > 0.0)) throw ContractViolation("extract_offdiag_same_band: step must be positive");
  return (gamma_munu - gamma_mumu - gamma_nunu) / (2.0 * dl * dl);
}

// Band coherence from metric-level expectation values c^dagger g c of the
// states j, j', a and b.
inline cplx combine_band_coherence(double g_aa, double g_bb, double g_jj, double g_jpjp) {
  return {(2.0 * g_aa - g_jj - g_jpjp) / 2.0, (g_jj + g_jpjp - 2.0 * g_bb) / 2.0};
}

inline cplx extract_offdiag_bands(double gamma_aa, double gamma_bb, double gamma_jj, double gamma_jpjp, double dl) {
  if (!(dl > 0.0)) throw ContractViolation("extract_offdiag_bands: step must be positive");
  const double s = dl * dl;
  return combine_band_coherence(gamma_aa / s, gamma_bb / s, gamma_jj / s, gamma_jpjp / s);
}

// ---------------------------------------------------------------------------
// full measurement

struct ComponentId {
  std::size_t mu = 0, nu = 0, j = 0, jp = 0;  // mu <= nu, j <= jp
  friend auto operator<=>(const ComponentId&, const ComponentId&) = default;
};

inline std::vector<ComponentId> all_components(std::size_t dims, std::size_t bands) {
  std::vector<ComponentId> out;
  for (std::size_t mu = 0; mu < dims; ++mu)
    for (std::size_t nu = mu; nu < dims; ++nu)
      for (std::size_t j = 0; j < bands; ++j)
        for (std::size_t jp = j; jp < bands; ++jp) out.push_back({mu, nu, j, jp});
  return out;
}

// Same-band components over the listed directions (everything det g^{jj} and
// G_ij = tr g_{ij} need).
inline std::vector<ComponentId> same_band_components(std::size_t dims, std::size_t bands) {
  std::vector<ComponentId> out;
  for (std::size_t mu = 0; mu < dims; ++mu)
    for (std::size_t nu = mu; nu < dims; ++nu)
      for (std::size_t j = 0; j < bands; ++j) out.push_back({mu, nu, j, j});
  return out;
}

struct RunKey {
  PreparedState state;
  std::vector<std::size_t> directions;
  friend auto operator<=>(const RunKey&, const RunKey&) = default;
};

struct RunRecord {
  std::size_t run_id = 0;
  RunKey key;
  double gamma = 0.0;
  double total_probability = 0.0;
};

struct MetricMeasurement {
  MetricTensor estimate;
  std::vector<bool> measured;  // per (mu, nu, j, jp), flattened
  std::vector<RunRecord> runs;
  QuenchProtocol protocol;

  bool has(std::size_t mu, std::size_t nu, std::size_t j, std::size_t jp) const {
    const std::size_t d = estimate.directions(), n = estimate.bands();
    return measured[((mu * d + nu) * n + j) * n + jp];
  }
};

namespace detail {

inline void add_runs(std::vector<RunKey>& keys, const PreparedState& s, std::size_t mu, std::size_t nu) {
  keys.push_back({s, {mu}});
  if (mu != nu) {
    keys.push_back({s, {nu}});
    keys.push_back({s, {mu, nu}});
  }
}

}  // namespace detail

// Minimal run set for a selection of components.
inline std::vector<RunKey> plan_runs(const std::vector<ComponentId>& selection) {
  std::vector<RunKey> keys;
  for (const auto& c : selection) {
    if (c.mu > c.nu || c.j > c.jp) throw ContractViolation("component selection must have mu <= nu and j <= j'");
    detail::add_runs(keys, PreparedState::band(c.j), c.mu, c.nu);
    if (c.j != c.jp) {
      detail::add_runs(keys, PreparedState::band(c.jp), c.mu, c.nu);
      detail::add_runs(keys, PreparedState::a(c.j, c.jp), c.mu, c.nu);
      detail::add_runs(keys, PreparedState::b(c.j, c.jp), c.mu, c.nu);
    }
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return keys;
}

inline MetricMeasurement measure_metric(const ModelSpec& model, const ParameterPoint& p,
                                        const std::vector<ComponentId>& selection, const QuenchProtocol& protocol,
                                        Gauge gauge, const GeometryOptions& opt = {}, std::size_t threads = 1) {
  const std::size_t d = p.dim();
  const std::size_t n = model.degeneracy;
  for (const auto& c : selection)
    if (c.nu >= d || c.jp >= n) throw ContractViolation("component selection out of range");

  const GroundBundle start = ground_bundle(model, p, gauge, opt);
  const std::vector<RunKey> keys = plan_runs(selection);
  const auto results = parallel_map<TransitionResult>(keys.size(), threads, [&](std::size_t i) {
    QuenchSpec q{p, keys[i].directions, protocol.delta_lambda, protocol.schedule};
    return transition_probability(model, q, start, keys[i].state, opt);
  });

  MetricMeasurement m;
  m.protocol = protocol;
  m.estimate = MetricTensor(d, n);
  m.measured.assign(d * d * n * n, false);
  std::map<RunKey, double> gamma;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    gamma[keys[i]] = results[i].gamma;
    m.runs.push_back({i, keys[i], results[i].gamma, results[i].total_probability});
  }

  const double dl = protocol.delta_lambda;
  // c^dagger g_{mu nu} c for one prepared state
  auto expectation = [&](const PreparedState& s, std::size_t mu, std::size_t nu) {
    const double gmm = gamma.at({s, {mu}});
    if (mu == nu) return extract_diag(gmm, dl);
    return extract_offdiag_same_band(gamma.at({s, {mu, nu}}), gmm, gamma.at({s, {nu}}), dl);
  };
  auto mark = [&](std::size_t mu, std::size_t nu, std::size_t j, std::size_t jp, cplx v) {
    m.estimate.at(mu, nu)(j, jp) = v;
    m.estimate.at(nu, mu)(j, jp) = v;
    m.estimate.at(mu, nu)(jp, j) = std::conj(v);
    m.estimate.at(nu, mu)(jp, j) = std::conj(v);
    for (auto [a, b] : {std::pair{mu, nu}, std::pair{nu, mu}})
      for (auto [x, y] : {std::pair{j, jp}, std::pair{jp, j}}) m.measured[((a * d + b) * n + x) * n + y] = true;
  };
  for (const auto& c : selection) {
    if (c.j == c.jp) {
      mark(c.mu, c.nu, c.j, c.j, expectation(PreparedState::band(c.j), c.mu, c.nu));
      continue;
    }
    const cplx z = combine_band_coherence(expectation(PreparedState::a(c.j, c.jp), c.mu, c.nu),
                                          expectation(PreparedState::b(c.j, c.jp), c.mu, c.nu),
                                          expectation(PreparedState::band(c.j), c.mu, c.nu),
                                          expectation(PreparedState::band(c.jp), c.mu, c.nu));
    mark(c.mu, c.nu, c.j, c.jp, z);
  }
  return m;
}

}  // namespace qmetric
