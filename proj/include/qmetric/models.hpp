#pragma once

// Parameterized four-band Hamiltonians: the 3D real Dirac semimetal and its
// effective monopole on S^2, the 5D Yang-monopole model and its effective
// Hamiltonian on S^4, the 4D insulating slice of the 5D model, and the
// rotating-frame four-level atomic Hamiltonian that realizes the 3D models.

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qmetric/errors.hpp"
#include "qmetric/numlin.hpp"

namespace qmetric {

using Matrix2 = Matrix<2>;
using Matrix4 = Matrix<4>;
using Vector4 = Vector<4>;

// ---------------------------------------------------------------------------
// parameter points

enum class Chart { cartesian_momentum, sphere_s2, sphere_s4 };

enum class RangePolicy {
  strict,     // reject coordinates outside the nominal sphere ranges
  wrap,       // wrap azimuths into (0, 2pi], clamp polar angles into (0, pi]
  unchecked,  // evaluate the parameterization anywhere (finite-difference stencils)
};

inline constexpr std::size_t kMaxParameterDim = 5;

class ParameterPoint {
 public:
  ParameterPoint() = default;

  static ParameterPoint momentum(std::initializer_list<double> k) {
    return momentum(std::vector<double>(k));
  }
  static ParameterPoint momentum(const std::vector<double>& k) {
    if (k.empty() || k.size() > kMaxParameterDim)
      throw ChartMismatch("momentum chart takes 1 to 5 coordinates");
    ParameterPoint p;
    p.chart_ = Chart::cartesian_momentum;
    p.dim_ = k.size();
    std::copy(k.begin(), k.end(), p.coords_.begin());
    p.check_finite();
    return p;
  }
  static ParameterPoint sphere2(double theta, double phi, RangePolicy policy = RangePolicy::strict) {
    return sphere(Chart::sphere_s2, {theta, phi}, policy);
  }
  static ParameterPoint sphere4(double phi1, double phi2, double phi3, double phi4,
                                RangePolicy policy = RangePolicy::strict) {
    return sphere(Chart::sphere_s4, {phi1, phi2, phi3, phi4}, policy);
  }
  static ParameterPoint make(Chart chart, const std::vector<double>& coords,
                             RangePolicy policy = RangePolicy::strict) {
    if (chart == Chart::cartesian_momentum) return momentum(coords);
    return sphere(chart, coords, policy);
  }

  Chart chart() const noexcept { return chart_; }
  std::size_t dim() const noexcept { return dim_; }
  double operator[](std::size_t i) const noexcept { return coords_[i]; }
  std::vector<double> coords() const { return {coords_.begin(), coords_.begin() + dim_}; }

  // p + step * direction, evaluated without range checks; stencils and
  // quench paths step across the nominal chart boundaries.
  ParameterPoint shifted(std::span<const double> direction, double step) const {
    if (direction.size() != dim_) throw ChartMismatch("shift direction has wrong dimension");
    ParameterPoint q = *this;
    for (std::size_t i = 0; i < dim_; ++i) q.coords_[i] += step * direction[i];
    q.check_finite();
    return q;
  }
  ParameterPoint shifted_axis(std::size_t axis, double step) const {
    if (axis >= dim_) throw ChartMismatch("shift axis out of range");
    ParameterPoint q = *this;
    q.coords_[axis] += step;
    q.check_finite();
    return q;
  }

 private:
  static ParameterPoint sphere(Chart chart, const std::vector<double>& c, RangePolicy policy) {
    const std::size_t want = chart == Chart::sphere_s2 ? 2 : 4;
    if (c.size() != want) throw ChartMismatch("sphere chart coordinate count mismatch");
    ParameterPoint p;
    p.chart_ = chart;
    p.dim_ = want;
    std::copy(c.begin(), c.end(), p.coords_.begin());
    p.check_finite();
    // All but the last coordinate are polar angles in (0, pi]; the last is an
    // azimuth in (0, 2pi].
    for (std::size_t i = 0; i < want; ++i) {
      const bool azimuth = i + 1 == want;
      const double hi = azimuth ? 2.0 * kPi : kPi;
      double& x = p.coords_[i];
      if (policy == RangePolicy::unchecked) continue;
      if (policy == RangePolicy::wrap) {
        if (azimuth) {
          x = std::fmod(x, hi);
          if (x <= 0.0) x += hi;
        } else {
          x = std::clamp(x, 1e-12, kPi);
        }
        continue;
      }
      if (!(x > 0.0 && x <= hi))
        throw DomainError("sphere coordinate " + std::to_string(i) + " = " + std::to_string(x) +
                          " outside its range");
    }
    return p;
  }
  void check_finite() const {
    for (std::size_t i = 0; i < dim_; ++i)
      if (!std::isfinite(coords_[i])) throw DomainError("non-finite parameter coordinate");
  }

  Chart chart_ = Chart::cartesian_momentum;
  std::size_t dim_ = 0;
  std::array<double, kMaxParameterDim> coords_{};
};

// ---------------------------------------------------------------------------
// model specifications

enum class Family {
  dirac3d_lattice,
  dirac3d_eff,
  yang5d_lattice,
  yang_eff,
  lattice_4d,
  experimental_4level,
  custom,
};

inline std::string_view family_name(Family f) {
  switch (f) {
    case Family::dirac3d_lattice: return "dirac3d-lattice";
    case Family::dirac3d_eff: return "dirac3d-eff";
    case Family::yang5d_lattice: return "yang5d-lattice";
    case Family::yang_eff: return "yang-eff";
    case Family::lattice_4d: return "lattice-4d";
    case Family::experimental_4level: return "experimental-4level";
    case Family::custom: return "custom";
  }
  return "unknown";
}

inline Family parse_family(std::string_view s) {
  for (Family f : {Family::dirac3d_lattice, Family::dirac3d_eff, Family::yang5d_lattice, Family::yang_eff,
                   Family::lattice_4d, Family::experimental_4level, Family::custom})
    if (family_name(f) == s) return f;
  throw ContractViolation("unknown model family '" + std::string(s) + "'");
}

using HamiltonianCallback = std::function<Matrix4(const ParameterPoint&)>;

struct ModelSpec {
  Family family = Family::dirac3d_eff;
  double mass = 2.0;   // m_z (3D lattice) or the 5D/4D mass term
  int sign = +1;       // selects the +/- effective monopole
  std::optional<double> frozen_kv;  // lattice-4d: fixed fifth momentum
  std::size_t degeneracy = 2;
  Chart custom_chart = Chart::cartesian_momentum;
  std::size_t custom_dim = 0;
  HamiltonianCallback custom;  // only for Family::custom

  static ModelSpec dirac3d_lattice(double mz = 2.0) { return make(Family::dirac3d_lattice, mz, +1); }
  static ModelSpec dirac3d_eff(int sign = +1) { return make(Family::dirac3d_eff, 0.0, sign); }
  static ModelSpec yang5d_lattice(double m = 4.0) { return make(Family::yang5d_lattice, m, +1); }
  static ModelSpec yang_eff(int sign = +1) { return make(Family::yang_eff, 0.0, sign); }
  static ModelSpec lattice_4d(double m = 1.0, double kv = kPi / 2) {
    ModelSpec s = make(Family::lattice_4d, m, +1);
    s.frozen_kv = kv;
    return s;
  }
  static ModelSpec experimental_4level(int sign = +1) { return make(Family::experimental_4level, 0.0, sign); }

 private:
  static ModelSpec make(Family f, double mass, int sign) {
    ModelSpec s;
    s.family = f;
    s.mass = mass;
    s.sign = sign;
    return s;
  }
};

inline Chart expected_chart(const ModelSpec& s) {
  switch (s.family) {
    case Family::dirac3d_lattice:
    case Family::yang5d_lattice:
    case Family::lattice_4d: return Chart::cartesian_momentum;
    case Family::dirac3d_eff:
    case Family::experimental_4level: return Chart::sphere_s2;
    case Family::yang_eff: return Chart::sphere_s4;
    case Family::custom: return s.custom_chart;
  }
  return Chart::cartesian_momentum;
}

inline std::size_t parameter_dim(const ModelSpec& s) {
  switch (s.family) {
    case Family::dirac3d_lattice: return 3;
    case Family::dirac3d_eff:
    case Family::experimental_4level: return 2;
    case Family::yang5d_lattice: return 5;
    case Family::yang_eff:
    case Family::lattice_4d: return 4;
    case Family::custom: return s.custom_dim;
  }
  return 0;
}

inline void require_compatible(const ModelSpec& s, const ParameterPoint& p) {
  if (p.chart() != expected_chart(s) || p.dim() != parameter_dim(s))
    throw ChartMismatch(std::string("point chart/dimension incompatible with family ") +
                        std::string(family_name(s.family)));
}

// True when the mass lies inside the window where the lattice model carries
// the monopoles the Chern pipelines integrate around.
inline bool in_topological_window(const ModelSpec& s) {
  switch (s.family) {
    case Family::dirac3d_lattice: return s.mass > 0.0 && s.mass < 3.0;
    case Family::yang5d_lattice: return s.mass > 0.0 && s.mass < 5.0;
    default: return true;
  }
}

// ---------------------------------------------------------------------------
// Dirac matrices

inline Matrix2 pauli(int k) {
  Matrix2 m;
  switch (k) {
    case 0: m(0, 0) = 1.0; m(1, 1) = 1.0; break;
    case 1: m(0, 1) = 1.0; m(1, 0) = 1.0; break;
    case 2: m(0, 1) = -kI; m(1, 0) = kI; break;
    case 3: m(0, 0) = 1.0; m(1, 1) = -1.0; break;
    default: throw ContractViolation("pauli index must be 0..3");
  }
  return m;
}

// Left factor indexes the outer 2x2 blocks.
inline Matrix4 kron(const Matrix2& a, const Matrix2& b) {
  Matrix4 m;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t l = 0; l < 2; ++l) m(2 * i + k, 2 * j + l) = a(i, j) * b(k, l);
  return m;
}

// alpha_x = s3 t1, alpha_y = -s1 t1, alpha_z = -s0 t3
inline const std::array<Matrix4, 3>& alpha_matrices() {
  static const std::array<Matrix4, 3> a = {
      kron(pauli(3), pauli(1)),
      kron(pauli(1), pauli(1)) * cplx(-1.0),
      kron(pauli(0), pauli(3)) * cplx(-1.0),
  };
  return a;
}

// beta_1..beta_5 = s0 s3, s0 s1, -s3 s2, s2 s2, s1 s2
inline const std::array<Matrix4, 5>& beta_matrices() {
  static const std::array<Matrix4, 5> b = {
      kron(pauli(0), pauli(3)),
      kron(pauli(0), pauli(1)),
      kron(pauli(3), pauli(2)) * cplx(-1.0),
      kron(pauli(2), pauli(2)),
      kron(pauli(1), pauli(2)),
  };
  return b;
}

inline std::vector<Matrix4> gamma_set(Family f) {
  switch (f) {
    case Family::dirac3d_lattice:
    case Family::dirac3d_eff:
    case Family::experimental_4level: {
      const auto& a = alpha_matrices();
      return {a.begin(), a.end()};
    }
    case Family::yang5d_lattice:
    case Family::yang_eff:
    case Family::lattice_4d: {
      const auto& b = beta_matrices();
      return {b.begin(), b.end()};
    }
    case Family::custom: break;
  }
  throw ContractViolation("gamma_set: family has no built-in Dirac matrices");
}

// ---------------------------------------------------------------------------
// coefficient vectors and Hamiltonians

// H = sum_a d_a Gamma_a
struct DiracCoefficients {
  std::array<double, 5> d{};
  std::size_t count = 0;

  double magnitude() const noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < count; ++i) s += d[i] * d[i];
    return std::sqrt(s);
  }
};

inline DiracCoefficients s2_direction(double theta, double phi, int sign) {
  return {{std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), sign * std::cos(theta), 0.0, 0.0}, 3};
}

inline DiracCoefficients s4_direction(double p1, double p2, double p3, double p4, int sign) {
  const double s1 = std::sin(p1), s2 = std::sin(p2), s3 = std::sin(p3);
  return {{std::cos(p1), s1 * std::cos(p2), s1 * s2 * std::cos(p3), s1 * s2 * s3 * std::cos(p4),
           sign * s1 * s2 * s3 * std::sin(p4)},
          5};
}

inline DiracCoefficients lattice5_coefficients(double m, const std::array<double, 5>& k) {
  DiracCoefficients c;
  c.count = 5;
  double d5 = m;
  for (std::size_t i = 0; i < 5; ++i) {
    if (i < 4) c.d[i] = std::sin(k[i]);
    d5 -= std::cos(k[i]);
  }
  c.d[4] = d5;
  return c;
}

inline DiracCoefficients dirac_coefficients(const ModelSpec& s, const ParameterPoint& p) {
  require_compatible(s, p);
  switch (s.family) {
    case Family::dirac3d_lattice:
      return {{std::sin(p[0]), std::sin(p[1]), s.mass - std::cos(p[0]) - std::cos(p[1]) - std::cos(p[2]), 0.0, 0.0},
              3};
    case Family::dirac3d_eff:
    case Family::experimental_4level: return s2_direction(p[0], p[1], s.sign);
    case Family::yang_eff: return s4_direction(p[0], p[1], p[2], p[3], s.sign);
    case Family::yang5d_lattice: return lattice5_coefficients(s.mass, {p[0], p[1], p[2], p[3], p[4]});
    case Family::lattice_4d:
      return lattice5_coefficients(s.mass, {p[0], p[1], p[2], p[3], s.frozen_kv.value_or(kPi / 2)});
    case Family::custom: break;
  }
  throw ContractViolation("dirac_coefficients: custom family has no coefficient vector");
}

inline Matrix4 dirac_sum(const DiracCoefficients& c) {
  Matrix4 h;
  if (c.count == 3) {
    const auto& a = alpha_matrices();
    for (std::size_t i = 0; i < 3; ++i) h += a[i] * cplx(c.d[i]);
  } else {
    const auto& b = beta_matrices();
    for (std::size_t i = 0; i < 5; ++i) h += b[i] * cplx(c.d[i]);
  }
  return h;
}

// ---------------------------------------------------------------------------
// four-level atomic Hamiltonian

struct ExperimentalControls {
  std::array<double, 4> rabi{};       // Omega_1..Omega_4
  std::array<double, 4> phases{};     // varphi_1..varphi_4
  std::array<double, 4> detunings{};  // Delta_1..Delta_4

  double delta_prime() const noexcept {
    return detunings[0] + detunings[1] - detunings[2] - detunings[3];
  }
};

// Rotating-wave Hamiltonian in the bare basis {|a>,|b>,|c>,|d>}.
inline Matrix4 experimental_hamiltonian(const ExperimentalControls& x, double t) {
  const auto& o = x.rabi;
  const auto& ph = x.phases;
  const auto& dl = x.detunings;
  const double dp = x.delta_prime();
  Matrix4 h;
  h(0, 0) = -dl[0];
  h(0, 1) = o[0] * std::polar(1.0, -ph[0]);
  h(0, 3) = o[2] * std::polar(1.0, -ph[2]);
  h(1, 0) = o[0] * std::polar(1.0, ph[0]);
  h(1, 2) = o[3] * std::polar(1.0, ph[3]);
  h(2, 1) = o[3] * std::polar(1.0, -ph[3]);
  h(2, 2) = -dl[3];
  h(2, 3) = o[1] * std::polar(1.0, -ph[1] - dp * t);
  h(3, 0) = o[2] * std::polar(1.0, ph[2]);
  h(3, 2) = o[1] * std::polar(1.0, ph[1] + dp * t);
  h(3, 3) = dl[2] - dl[0];
  return h;
}

// Controls realizing d . alpha: equal detunings Delta = d_z, zero phases,
// Rabi frequencies (d_x, -d_x, -d_y, -d_y).
inline ExperimentalControls controls_for_coefficients(const DiracCoefficients& d) {
  ExperimentalControls x;
  x.rabi = {d.d[0], -d.d[0], -d.d[1], -d.d[1]};
  x.detunings = {d.d[2], d.d[2], d.d[2], d.d[2]};
  return x;
}

// Shift that lifts |b> and |d> by Delta; with equal detunings this turns the
// diagonal (-D, 0, -D, 0) into (-D, D, -D, D).
inline Matrix4 level_lift(double delta) {
  Matrix4 m;
  m(1, 1) = delta;
  m(3, 3) = delta;
  return m;
}

inline Matrix4 mapped_experimental_hamiltonian(const DiracCoefficients& d) {
  const ExperimentalControls x = controls_for_coefficients(d);
  return experimental_hamiltonian(x, 0.0) + level_lift(x.detunings[0]);
}

inline Matrix4 hamiltonian(const ModelSpec& s, const ParameterPoint& p) {
  if (s.family == Family::custom) {
    if (p.chart() != s.custom_chart || p.dim() != s.custom_dim)
      throw ChartMismatch("point chart/dimension incompatible with custom family");
    if (!s.custom) throw ContractViolation("custom family without a Hamiltonian callback");
    return s.custom(p);
  }
  const DiracCoefficients d = dirac_coefficients(s, p);
  if (s.family == Family::experimental_4level) return mapped_experimental_hamiltonian(d);
  return dirac_sum(d);
}

// Max entrywise deviation between the mapped atomic Hamiltonian and the
// effective monopole Hamiltonian at (theta, phi).
inline double experimental_reduction_check(double theta, double phi, int sign = +1) {
  const DiracCoefficients d = s2_direction(theta, phi, sign);
  const ExperimentalControls x = controls_for_coefficients(d);
  if (x.delta_prime() != 0.0)
    throw ContractViolation("experimental reduction is only defined for Delta' = 0");
  const Matrix4 exp_h = experimental_hamiltonian(x, 0.0) + level_lift(x.detunings[0]);
  return max_abs_diff(exp_h, dirac_sum(d));
}

// ---------------------------------------------------------------------------
// algebra and symmetry checks

struct AnticommutatorResidual {
  std::size_t a = 0, b = 0;
  double residual = 0.0;  // max |{G_a, G_b} - 2 delta_ab|
};

struct AlgebraReport {
  std::vector<AnticommutatorResidual> pairs;
  double max_residual = 0.0;
  bool pass = false;
};

inline AlgebraReport dirac_algebra_check(std::span<const Matrix4> gammas, double tol = 0.0) {
  AlgebraReport r;
  for (std::size_t a = 0; a < gammas.size(); ++a)
    for (std::size_t b = a; b < gammas.size(); ++b) {
      Matrix4 target = a == b ? Matrix4::identity() * cplx(2.0) : Matrix4{};
      const double res = max_abs_diff(anticommutator(gammas[a], gammas[b]), target);
      r.pairs.push_back({a, b, res});
      r.max_residual = std::max(r.max_residual, res);
    }
  r.pass = r.max_residual <= tol;
  return r;
}

inline AlgebraReport dirac_algebra_check(const ModelSpec& s) {
  const auto g = gamma_set(s.family);
  return dirac_algebra_check(std::span<const Matrix4>(g));
}

struct SymmetryReport {
  // 3D families
  double inversion = 0.0;       // |P H(k) P^-1 - H(-k)|, P = alpha_z
  double time_reversal = 0.0;   // |alpha_z H(k)* alpha_z - H(-k)|
  double pt = 0.0;              // |H(k)* - H(k)|
  double max_imag = 0.0;        // max |Im H(k)|
  // 5D families
  double theta_printed = 0.0;   // |Theta H(k)* Theta^-1 - H(-k)|, Theta = i s2 s0
  double theta_kramers = 0.0;   // same with Theta = beta_3 (Theta Theta* = -1)
  bool three_dimensional = false;
};

inline Matrix4 yang_time_reversal_printed() { return kron(pauli(2), pauli(0)) * kI; }
inline Matrix4 yang_time_reversal_kramers() { return beta_matrices()[2]; }

inline SymmetryReport symmetry_check(const ModelSpec& s, const ParameterPoint& p) {
  if (s.family != Family::dirac3d_lattice && s.family != Family::yang5d_lattice && s.family != Family::lattice_4d)
    throw ContractViolation("symmetry_check applies to the lattice families");
  if (p.chart() != Chart::cartesian_momentum) throw ChartMismatch("symmetry_check needs a momentum point");
  std::vector<double> neg = p.coords();
  for (auto& x : neg) x = -x;
  const ParameterPoint mp = ParameterPoint::momentum(neg);
  ModelSpec sm = s;
  if (s.family == Family::lattice_4d) sm.frozen_kv = -s.frozen_kv.value_or(kPi / 2);
  const Matrix4 h = hamiltonian(s, p);
  const Matrix4 hm = hamiltonian(sm, mp);
  const Matrix4 hc = conjugate(h);

  SymmetryReport r;
  if (s.family == Family::dirac3d_lattice) {
    r.three_dimensional = true;
    const Matrix4& pz = alpha_matrices()[2];
    r.inversion = max_abs_diff(pz * h * pz, hm);
    r.time_reversal = max_abs_diff(pz * hc * pz, hm);
    r.pt = max_abs_diff(hc, h);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) r.max_imag = std::max(r.max_imag, std::abs(h(i, j).imag()));
    return r;
  }
  const Matrix4 tp = yang_time_reversal_printed();
  const Matrix4 tk = yang_time_reversal_kramers();
  r.theta_printed = max_abs_diff(tp * hc * adjoint(tp), hm);
  r.theta_kramers = max_abs_diff(tk * hc * adjoint(tk), hm);
  return r;
}

}  // namespace qmetric
