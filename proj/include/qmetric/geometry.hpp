#pragma once

// Exact quantum-geometric reference: gauge-fixed degenerate ground bundles,
// the finite-difference non-Abelian geometric tensor
//   Q^{jj'}_{mu nu} = <d_mu psi_j| (1 - P) |d_nu psi_j'>,
// its metric / curvature parts, and closed-form references for the two
// monopole models.

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qmetric/errors.hpp"
#include "qmetric/models.hpp"
#include "qmetric/numlin.hpp"

namespace qmetric {

using Frame4 = Frame<4>;

enum class Gauge { analytic, reference_projection, eigensolver_raw };

inline std::string_view gauge_name(Gauge g) {
  switch (g) {
    case Gauge::analytic: return "analytic";
    case Gauge::reference_projection: return "reference-projection";
    case Gauge::eigensolver_raw: return "eigensolver-raw";
  }
  return "unknown";
}

inline Gauge parse_gauge(std::string_view s) {
  for (Gauge g : {Gauge::analytic, Gauge::reference_projection, Gauge::eigensolver_raw})
    if (gauge_name(g) == s) return g;
  throw ContractViolation("unknown gauge '" + std::string(s) + "'");
}

// Analytic eigenstates exist only for the d . alpha families.
inline Gauge default_gauge(const ModelSpec& s) {
  switch (s.family) {
    case Family::dirac3d_eff:
    case Family::experimental_4level: return Gauge::analytic;
    default: return Gauge::reference_projection;
  }
}

struct GeometryOptions {
  double fd_step = 1e-4;
  double cluster_tolerance = 1e-8;  // relative
  double gap_floor = 1e-6;
  // Canonical basis vectors projected onto the ground space by the
  // reference-projection gauge (0-based). The pair {e_1, e_3} keeps the
  // projected Gram matrix proportional to the identity for every built-in
  // family; listing e_3 first orients the real frame like beta_1, beta_2.
  std::array<std::size_t, 2> reference_frame{2, 0};
};

struct GroundBundle {
  ParameterPoint point;
  Frame4 ground;
  Frame4 excited;
  std::vector<double> energies;  // ground first, ascending
  Gauge gauge = Gauge::eigensolver_raw;

  std::size_t degeneracy() const noexcept { return ground.size(); }
  double gap() const { return energies[ground.size()] - energies[ground.size() - 1]; }

  // P = sum_j |psi_j><psi_j|
  Matrix4 projector() const {
    Matrix4 p;
    for (const auto& v : ground)
      for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) p(i, j) += v[i] * std::conj(v[j]);
    return p;
  }
};

// ---------------------------------------------------------------------------
// analytic eigenstates of d . alpha

inline std::array<Vector4, 4> appendix_eigenstates(const std::array<double, 3>& dv) {
  const double dx = dv[0], dy = dv[1], dz = dv[2];
  const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
  const double nm2 = 2.0 * d * d - 2.0 * d * dz;
  const double np2 = 2.0 * d * d + 2.0 * d * dz;
  if (nm2 < 1e-20 || np2 < 1e-20)
    throw SingularNormalization("appendix_eigenstates: normalization 2d^2 -/+ 2 d d_z vanishes");
  const double nm = 1.0 / std::sqrt(nm2);
  const double np = 1.0 / std::sqrt(np2);
  return {{
      {nm * -dx, nm * (d - dz), nm * dy, 0.0},
      {nm * dy, 0.0, nm * dx, nm * (d - dz)},
      {np * -dx, np * (-d - dz), np * dy, 0.0},
      {np * -dy, 0.0, np * -dx, np * (d + dz)},
  }};
}

// ---------------------------------------------------------------------------
// ground bundle

namespace detail {

inline Frame4 reference_projection_frame(const Frame4& ground, const GeometryOptions& opt) {
  // P e_idx = sum_j psi_j conj(psi_j[idx])
  Frame4 projected;
  for (std::size_t r = 0; r < ground.size(); ++r) {
    const std::size_t idx = opt.reference_frame[r % opt.reference_frame.size()];
    Vector4 v{};
    for (const auto& g : ground) v = axpy(std::conj(g[idx]), g, v);
    projected.push_back(v);
  }
  return lowdin_orthonormalize(projected);
}

}  // namespace detail

inline GroundBundle ground_bundle(const ModelSpec& s, const ParameterPoint& p, Gauge gauge,
                                  const GeometryOptions& opt = {}) {
  const Matrix4 h = hamiltonian(s, p);
  const auto sd = hermitian_eig(h);
  const std::size_t n = s.degeneracy;
  if (n == 0 || n >= 4) throw ContractViolation("ground_bundle: degeneracy must be in [1, 3]");

  const double gap = sd.eigenvalues[n] - sd.eigenvalues[n - 1];
  if (gap <= opt.gap_floor) throw GapCollapse("ground_bundle: spectral gap collapsed", gap);
  for (std::size_t k = 1; k < n; ++k) {
    const double e = sd.eigenvalues[k];
    if (e - sd.eigenvalues[0] > opt.cluster_tolerance * (1.0 + std::abs(e)))
      throw ClusterMismatch("ground_bundle: lowest eigenvalues do not form a cluster of size " +
                            std::to_string(n));
  }

  GroundBundle b;
  b.point = p;
  b.gauge = gauge;
  b.energies.assign(sd.eigenvalues.begin(), sd.eigenvalues.end());
  for (std::size_t k = 0; k < 4; ++k) (k < n ? b.ground : b.excited).push_back(column(sd.eigenvectors, k));

  switch (gauge) {
    case Gauge::eigensolver_raw: break;
    case Gauge::reference_projection: b.ground = detail::reference_projection_frame(b.ground, opt); break;
    case Gauge::analytic: {
      if (n != 2 || (s.family != Family::dirac3d_eff && s.family != Family::dirac3d_lattice &&
                     s.family != Family::experimental_4level))
        throw ContractViolation("analytic gauge is only available for the d . alpha families");
      const DiracCoefficients d = dirac_coefficients(s, p);
      const auto beta = appendix_eigenstates({d.d[0], d.d[1], d.d[2]});
      b.ground = {beta[0], beta[1]};
      break;
    }
  }
  return b;
}

// ---------------------------------------------------------------------------
// block tensors

// D x D array of N x N blocks.
class BlockTensor {
 public:
  BlockTensor() = default;
  BlockTensor(std::size_t d, std::size_t n) : d_(d), n_(n), blocks_(d * d, DenseMatrix(n)) {}

  std::size_t directions() const noexcept { return d_; }
  std::size_t bands() const noexcept { return n_; }
  DenseMatrix& at(std::size_t mu, std::size_t nu) { return blocks_[mu * d_ + nu]; }
  const DenseMatrix& at(std::size_t mu, std::size_t nu) const { return blocks_[mu * d_ + nu]; }
  cplx operator()(std::size_t mu, std::size_t nu, std::size_t j, std::size_t jp) const {
    return at(mu, nu)(j, jp);
  }

  // (mu j),(nu j') flattening into a DN x DN matrix
  DenseMatrix flatten() const {
    DenseMatrix big(d_ * n_);
    for (std::size_t mu = 0; mu < d_; ++mu)
      for (std::size_t nu = 0; nu < d_; ++nu)
        for (std::size_t j = 0; j < n_; ++j)
          for (std::size_t jp = 0; jp < n_; ++jp) big(mu * n_ + j, nu * n_ + jp) = at(mu, nu)(j, jp);
    return big;
  }

 private:
  std::size_t d_ = 0, n_ = 0;
  std::vector<DenseMatrix> blocks_;
};

struct QgtBlocks : BlockTensor {
  using BlockTensor::BlockTensor;
};

struct MetricTensor : BlockTensor {
  using BlockTensor::BlockTensor;
};

struct CurvatureTensor : BlockTensor {
  using BlockTensor::BlockTensor;
  // Analytic references only provide some blocks; FD results provide all.
  std::vector<bool> available;

  bool has(std::size_t mu, std::size_t nu) const {
    return available.empty() || available[mu * directions() + nu];
  }
};

// Residuals of the block symmetries g_{mu nu} = g_{mu nu}^dagger = g_{nu mu},
// F_{mu nu} = F_{mu nu}^dagger = -F_{nu mu}, and min eigenvalue over g_{mu mu}.
struct BlockSymmetryReport {
  double hermiticity = 0.0;
  double direction_symmetry = 0.0;
  double min_diag_eigenvalue = 0.0;
};

inline BlockSymmetryReport check_metric(const MetricTensor& g) {
  BlockSymmetryReport r;
  r.min_diag_eigenvalue = std::numeric_limits<double>::infinity();
  for (std::size_t mu = 0; mu < g.directions(); ++mu) {
    for (std::size_t nu = 0; nu < g.directions(); ++nu) {
      r.hermiticity = std::max(r.hermiticity, hermiticity_residual(g.at(mu, nu)));
      r.direction_symmetry = std::max(r.direction_symmetry, max_abs_diff(g.at(mu, nu), g.at(nu, mu)));
    }
    DenseMatrix herm = (g.at(mu, mu) + adjoint(g.at(mu, mu))) * cplx(0.5);
    r.min_diag_eigenvalue = std::min(r.min_diag_eigenvalue, hermitian_eig(herm).eigenvalues.front());
  }
  return r;
}

inline BlockSymmetryReport check_curvature(const CurvatureTensor& f) {
  BlockSymmetryReport r;
  for (std::size_t mu = 0; mu < f.directions(); ++mu)
    for (std::size_t nu = 0; nu < f.directions(); ++nu) {
      if (!f.has(mu, nu) || !f.has(nu, mu)) continue;
      r.hermiticity = std::max(r.hermiticity, hermiticity_residual(f.at(mu, nu)));
      r.direction_symmetry = std::max(r.direction_symmetry, max_abs_diff(f.at(mu, nu), f.at(nu, mu) * cplx(-1.0)));
    }
  return r;
}

// g = (Q + Q^dagger) / 2
inline MetricTensor metric_from_qgt(const QgtBlocks& q) {
  MetricTensor g(q.directions(), q.bands());
  for (std::size_t mu = 0; mu < q.directions(); ++mu)
    for (std::size_t nu = 0; nu < q.directions(); ++nu)
      g.at(mu, nu) = (q.at(mu, nu) + adjoint(q.at(mu, nu))) * cplx(0.5);
  return g;
}

// F = i (Q - Q^dagger)
inline CurvatureTensor curvature_from_qgt(const QgtBlocks& q) {
  CurvatureTensor f(q.directions(), q.bands());
  for (std::size_t mu = 0; mu < q.directions(); ++mu)
    for (std::size_t nu = 0; nu < q.directions(); ++nu)
      f.at(mu, nu) = (q.at(mu, nu) - adjoint(q.at(mu, nu))) * kI;
  return f;
}

// ---------------------------------------------------------------------------
// finite-difference geometric tensor

// Central differences of stencil frames aligned to the frame at p, projected
// off the ground space.
inline QgtBlocks qgt_fd(const ModelSpec& s, const ParameterPoint& p, Gauge gauge, const GeometryOptions& opt = {}) {
  const double h = opt.fd_step;
  if (!(h > 0.0)) throw ContractViolation("qgt_fd: step must be positive");
  const GroundBundle b0 = ground_bundle(s, p, gauge, opt);
  const std::size_t dims = p.dim();
  const std::size_t n = b0.degeneracy();

  std::vector<Frame4> horizontal(dims);  // (1 - P) d_mu psi_j
  for (std::size_t mu = 0; mu < dims; ++mu) {
    const Frame4 plus = subspace_align(ground_bundle(s, p.shifted_axis(mu, h), gauge, opt).ground, b0.ground);
    const Frame4 minus = subspace_align(ground_bundle(s, p.shifted_axis(mu, -h), gauge, opt).ground, b0.ground);
    for (std::size_t j = 0; j < n; ++j) {
      Vector4 dv{};
      for (std::size_t i = 0; i < 4; ++i) dv[i] = (plus[j][i] - minus[j][i]) / (2.0 * h);
      for (const auto& g : b0.ground) dv = axpy(-inner(g, dv), g, dv);
      horizontal[mu].push_back(dv);
    }
  }

  QgtBlocks q(dims, n);
  for (std::size_t mu = 0; mu < dims; ++mu)
    for (std::size_t nu = 0; nu < dims; ++nu)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t jp = 0; jp < n; ++jp) q.at(mu, nu)(j, jp) = inner(horizontal[mu][j], horizontal[nu][jp]);
  return q;
}

struct FdGeometry {
  MetricTensor metric;
  CurvatureTensor curvature;
};

inline FdGeometry fd_geometry(const ModelSpec& s, const ParameterPoint& p, Gauge gauge, const GeometryOptions& opt = {}) {
  const QgtBlocks q = qgt_fd(s, p, gauge, opt);
  return {metric_from_qgt(q), curvature_from_qgt(q)};
}

// ---------------------------------------------------------------------------
// closed-form references

struct AnalyticGeometry {
  MetricTensor metric;
  CurvatureTensor curvature;
};

inline AnalyticGeometry analytic_reference(const ModelSpec& s, const ParameterPoint& p) {
  require_compatible(s, p);
  AnalyticGeometry out;
  if (s.family == Family::dirac3d_eff || s.family == Family::experimental_4level) {
    const double st = std::sin(p[0]);
    out.metric = MetricTensor(2, 2);
    out.metric.at(0, 0) = DenseMatrix::identity(2) * cplx(0.25);
    out.metric.at(1, 1) = DenseMatrix::identity(2) * cplx(0.25 * st * st);
    out.curvature = CurvatureTensor(2, 2);
    // F_{theta phi} = (i sin(theta)/2) [[0, 1], [-1, 0]]; the - monopole is the
    // theta -> pi - theta image with reversed orientation.
    DenseMatrix f(2);
    f(0, 1) = kI * (0.5 * st * s.sign);
    f(1, 0) = -f(0, 1);
    out.curvature.at(0, 1) = f;
    out.curvature.at(1, 0) = f * cplx(-1.0);
    return out;
  }
  if (s.family == Family::yang_eff) {
    const double s1 = std::sin(p[0]), s2 = std::sin(p[1]), s3 = std::sin(p[2]), c3 = std::cos(p[2]);
    out.metric = MetricTensor(4, 2);
    const double diag[4] = {0.25, 0.25 * s1 * s1, 0.25 * s1 * s1 * s2 * s2, 0.25 * s1 * s1 * s2 * s2 * s3 * s3};
    for (std::size_t mu = 0; mu < 4; ++mu) out.metric.at(mu, mu) = DenseMatrix::identity(2) * cplx(diag[mu]);

    out.curvature = CurvatureTensor(4, 2);
    out.curvature.available.assign(16, false);
    DenseMatrix f12(2), f34(2);
    const cplx pre12 = kI * (0.5 * s1);
    f12(0, 0) = pre12 * (kI * c3);
    f12(0, 1) = pre12 * -s3;
    f12(1, 0) = pre12 * s3;
    f12(1, 1) = pre12 * (-kI * c3);
    const cplx pre34 = kI * (0.25 * s1 * s1 * s2 * s2) * double(s.sign);
    const double sin2 = std::sin(2.0 * p[2]);
    f34(0, 0) = pre34 * (-kI * sin2);
    f34(0, 1) = pre34 * (2.0 * s3 * s3);
    f34(1, 0) = pre34 * (-2.0 * s3 * s3);
    f34(1, 1) = pre34 * (kI * sin2);
    out.curvature.at(0, 1) = f12;
    out.curvature.at(1, 0) = f12 * cplx(-1.0);
    out.curvature.at(2, 3) = f34;
    out.curvature.at(3, 2) = f34 * cplx(-1.0);
    for (auto idx : {1, 4, 11, 14}) out.curvature.available[idx] = true;
    return out;
  }
  throw ContractViolation("analytic_reference: unsupported family " + std::string(family_name(s.family)));
}

// ---------------------------------------------------------------------------
// |F^{12}| = 2 sqrt(det g^{11}), |F^{21}| = 2 sqrt(det g^{22})

// det of the real 2x2 same-band metric over directions (a, b)
inline double same_band_det(const MetricTensor& g, std::size_t band, std::size_t a, std::size_t b) {
  const double gaa = g(a, a, band, band).real();
  const double gbb = g(b, b, band, band).real();
  const double gab = g(a, b, band, band).real();
  const double gba = g(b, a, band, band).real();
  return gaa * gbb - gab * gba;
}

struct DetRelationResiduals {
  double band12 = 0.0;  // |F^{12}_{ab}| - 2 sqrt(det g^{11})
  double band21 = 0.0;  // |F^{21}_{ab}| - 2 sqrt(det g^{22})
};

inline DetRelationResiduals det_relation_check(const MetricTensor& g, const CurvatureTensor& f, std::size_t a = 0,
                                               std::size_t b = 1, double negative_tolerance = 1e-10) {
  if (g.bands() != 2 || f.bands() != 2) throw ContractViolation("det_relation_check needs two ground bands");
  auto root = [&](std::size_t band) {
    const double det = same_band_det(g, band, a, b);
    if (det < -negative_tolerance)
      throw QualityError("det_relation_check: negative same-band determinant " + std::to_string(det));
    return std::sqrt(std::max(0.0, det));
  };
  return {std::abs(f(a, b, 0, 1)) - 2.0 * root(0), std::abs(f(a, b, 1, 0)) - 2.0 * root(1)};
}

// ---------------------------------------------------------------------------
// fidelity distance

// 1 - |<Psi0(p)|Psi0(p + dl)>|^2 with Psi0 = sum_j c_j psi_j in frames aligned to p.
inline double fidelity_distance(const ModelSpec& s, const ParameterPoint& p, const std::vector<cplx>& c,
                                const std::vector<double>& dl, Gauge gauge, const GeometryOptions& opt = {}) {
  double nrm = 0.0;
  for (const auto& x : c) nrm += std::norm(x);
  if (std::abs(nrm - 1.0) > 1e-12) throw ContractViolation("fidelity_distance: coefficients must be normalized");
  const GroundBundle b0 = ground_bundle(s, p, gauge, opt);
  if (c.size() != b0.degeneracy()) throw ContractViolation("fidelity_distance: coefficient count != degeneracy");
  const GroundBundle b1 = ground_bundle(s, p.shifted(dl, 1.0), gauge, opt);
  const Frame4 aligned = subspace_align(b1.ground, b0.ground);
  Vector4 psi0{}, psi1{};
  for (std::size_t j = 0; j < c.size(); ++j) {
    psi0 = axpy(c[j], b0.ground[j], psi0);
    psi1 = axpy(c[j], aligned[j], psi1);
  }
  return 1.0 - std::norm(inner(psi0, psi1));
}

// c^dagger (sum_{mu nu} g_{mu nu} dl_mu dl_nu) c
inline double metric_distance(const MetricTensor& g, const std::vector<cplx>& c, const std::vector<double>& dl) {
  cplx s = 0.0;
  for (std::size_t mu = 0; mu < g.directions(); ++mu)
    for (std::size_t nu = 0; nu < g.directions(); ++nu)
      for (std::size_t j = 0; j < g.bands(); ++j)
        for (std::size_t jp = 0; jp < g.bands(); ++jp) s += std::conj(c[j]) * g(mu, nu, j, jp) * c[jp] * dl[mu] * dl[nu];
  return s.real();
}

}  // namespace qmetric
