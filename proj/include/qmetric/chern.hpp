#pragma once

// Topological invariants on S^2 and S^4 from curvature or from the metric.
//
//   C_R = (1/4pi) int tr(I (-i F_{theta phi}))          I = [[0,-1],[1,0]]
//   C_R = (1/2pi) int (sqrt det g^{11} + sqrt det g^{22})
//   C_2 = (3/4pi^2) int tr[F_12 F_34]
//   C_2 = c int sgn(calF) sqrt det G,     G_ij = tr g_ij,  calF = eps^{abcd} tr(F_ab F_cd)
//
// All sums are midpoint rules on the open coordinate box; node values are
// computed independently and reduced in a fixed pairwise order.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "qmetric/errors.hpp"
#include "qmetric/geometry.hpp"
#include "qmetric/models.hpp"
#include "qmetric/numlin.hpp"
#include "qmetric/parallel.hpp"
#include "qmetric/quench.hpp"

namespace qmetric {

// ---------------------------------------------------------------------------
// grids

enum class SphereKind { s2, s4 };

class SphereGrid {
 public:
  SphereGrid() = default;
  SphereGrid(SphereKind kind, std::vector<std::size_t> counts) : kind_(kind), counts_(std::move(counts)) {
    const std::size_t d = kind_ == SphereKind::s2 ? 2 : 4;
    if (counts_.size() != d) throw ContractViolation("sphere grid needs one cell count per angle");
    for (auto c : counts_)
      if (c == 0) throw ContractViolation("sphere grid cell counts must be positive");
  }

  static SphereGrid s2(std::size_t nt, std::size_t np) { return {SphereKind::s2, {nt, np}}; }
  static SphereGrid s4(std::size_t n1, std::size_t n2, std::size_t n3, std::size_t n4) {
    return {SphereKind::s4, {n1, n2, n3, n4}};
  }

  SphereKind kind() const noexcept { return kind_; }
  const std::vector<std::size_t>& counts() const noexcept { return counts_; }
  std::size_t dim() const noexcept { return counts_.size(); }

  std::size_t size() const {
    std::size_t n = 1;
    for (auto c : counts_) n *= c;
    return n;
  }

  // polar angles span pi, the last azimuth 2 pi
  double extent(std::size_t axis) const { return axis + 1 == dim() ? 2.0 * kPi : kPi; }
  double spacing(std::size_t axis) const { return extent(axis) / static_cast<double>(counts_.at(axis)); }

  double cell_measure() const {
    double m = 1.0;
    for (std::size_t a = 0; a < dim(); ++a) m *= spacing(a);
    return m;
  }

  // Row-major node index, last angle fastest.
  ParameterPoint node(std::size_t index) const {
    std::vector<double> c(dim());
    for (std::size_t a = dim(); a-- > 0;) {
      const std::size_t i = index % counts_[a];
      index /= counts_[a];
      c[a] = (static_cast<double>(i) + 0.5) * spacing(a);
    }
    return ParameterPoint::make(kind_ == SphereKind::s2 ? Chart::sphere_s2 : Chart::sphere_s4, c);
  }

  std::string label() const {
    std::string s;
    for (std::size_t a = 0; a < dim(); ++a) s += (a ? "x" : "") + std::to_string(counts_[a]);
    return s;
  }

 private:
  SphereKind kind_ = SphereKind::s2;
  std::vector<std::size_t> counts_{1, 1};
};

// ---------------------------------------------------------------------------
// options and results

enum class GeometrySource { analytic, fd, quench };
enum class Normalization { paper_printed, oracle_calibrated };

inline std::string_view source_name(GeometrySource s) {
  switch (s) {
    case GeometrySource::analytic: return "analytic";
    case GeometrySource::fd: return "fd";
    case GeometrySource::quench: return "quench";
  }
  return "unknown";
}
inline GeometrySource parse_source(std::string_view s) {
  if (s == "analytic") return GeometrySource::analytic;
  if (s == "fd") return GeometrySource::fd;
  if (s == "quench") return GeometrySource::quench;
  throw ContractViolation("unknown geometry source '" + std::string(s) + "'");
}
inline std::string_view normalization_name(Normalization n) {
  return n == Normalization::paper_printed ? "paper-printed" : "oracle-calibrated";
}
inline Normalization parse_normalization(std::string_view s) {
  if (s == "paper-printed") return Normalization::paper_printed;
  if (s == "oracle-calibrated") return Normalization::oracle_calibrated;
  throw ContractViolation("unknown normalization '" + std::string(s) + "'");
}

struct ChernOptions {
  Gauge gauge = Gauge::reference_projection;
  GeometryOptions geometry;
  QuenchProtocol protocol;
  std::size_t threads = 1;
  double clamp_budget = 0.01;  // fraction of nodes allowed a negative determinant
  double coarse_threshold = 0.05;
};

struct ChernResult {
  double value = 0.0;
  std::optional<int> mod2;
  double deviation = 0.0;  // |value - round(value)|
  bool coarse = false;     // deviation above the coarse-grid threshold
  std::string method;      // curvature-oracle, metric-oracle, metric-quench
  std::string source;      // analytic, fd, quench
  std::string normalization;
  std::vector<std::size_t> grid;
  std::optional<double> delta_lambda, T, substeps;
  std::optional<std::string> time_unit;
  std::size_t clamped_nodes = 0;
  std::optional<double> calibration_ratio;
  std::optional<double> value_paper_printed, value_oracle_calibrated;

  void finish(bool with_mod2, double coarse_threshold) {
    const double r = std::round(value);
    deviation = std::abs(value - r);
    coarse = deviation > coarse_threshold;
    if (with_mod2) mod2 = static_cast<int>(((static_cast<long long>(r) % 2) + 2) % 2);
  }
};

namespace detail {

inline void record_protocol(ChernResult& r, GeometrySource src, const ChernOptions& opt) {
  r.source = std::string(source_name(src));
  if (src != GeometrySource::quench) return;
  r.delta_lambda = opt.protocol.delta_lambda;
  r.T = opt.protocol.schedule.T;
  r.substeps = static_cast<double>(opt.protocol.schedule.substeps);
  r.time_unit = std::string(time_unit_name(opt.protocol.schedule.time_unit));
}

template <class F>
double integrate(const SphereGrid& grid, std::size_t threads, F&& integrand) {
  const auto vals = parallel_map<double>(grid.size(), threads, [&](std::size_t i) { return integrand(grid.node(i)); });
  return pairwise_sum(vals) * grid.cell_measure();
}

inline void require_s2_model(const ModelSpec& s, const SphereGrid& g) {
  if (g.kind() != SphereKind::s2) throw ContractViolation("real Chern number needs an S2 grid");
  if (s.family != Family::dirac3d_eff && s.family != Family::experimental_4level)
    throw ContractViolation("real Chern number needs an S2 monopole model");
  if (s.degeneracy != 2) throw ContractViolation("real Chern number needs N = 2");
}

inline void require_s4_model(const ModelSpec& s, const SphereGrid& g) {
  if (g.kind() != SphereKind::s4) throw ContractViolation("second Chern number needs an S4 grid");
  if (s.family != Family::yang_eff) throw ContractViolation("second Chern number needs the yang-eff model");
}

inline CurvatureTensor curvature_at(const ModelSpec& s, const ParameterPoint& p, GeometrySource src,
                                    const ChernOptions& opt) {
  if (src == GeometrySource::analytic) return analytic_reference(s, p).curvature;
  if (src == GeometrySource::fd) return fd_geometry(s, p, opt.gauge, opt.geometry).curvature;
  throw ContractViolation("curvature is not available from quench data");
}

inline MetricTensor metric_at(const ModelSpec& s, const ParameterPoint& p, GeometrySource src,
                              const ChernOptions& opt) {
  switch (src) {
    case GeometrySource::analytic: return analytic_reference(s, p).metric;
    case GeometrySource::fd: return fd_geometry(s, p, opt.gauge, opt.geometry).metric;
    case GeometrySource::quench:
      return measure_metric(s, p, same_band_components(p.dim(), s.degeneracy), opt.protocol, opt.gauge, opt.geometry)
          .estimate;
  }
  throw ContractViolation("unknown geometry source");
}

// Determinant by Gaussian elimination with partial pivoting.
template <std::size_t D>
double determinant(std::array<std::array<double, D>, D> a) {
  double det = 1.0;
  for (std::size_t c = 0; c < D; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < D; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (a[piv][c] == 0.0) return 0.0;
    if (piv != c) {
      std::swap(a[piv], a[c]);
      det = -det;
    }
    det *= a[c][c];
    for (std::size_t r = c + 1; r < D; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < D; ++k) a[r][k] -= f * a[c][k];
    }
  }
  return det;
}

struct ClampedRoot {
  double value = 0.0;
  bool clamped = false;
};

inline ClampedRoot clamped_sqrt(double det) {
  if (det < 0.0) return {0.0, true};
  return {std::sqrt(det), false};
}

inline void enforce_clamp_budget(std::size_t clamped, std::size_t total, double budget) {
  if (static_cast<double>(clamped) > budget * static_cast<double>(total))
    throw QualityError("negative determinants clamped at " + std::to_string(clamped) + " of " +
                       std::to_string(total) + " nodes");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// real Chern number

// tr(I (-i F)) for the theta-phi block
inline double real_chern_density(const CurvatureTensor& f) {
  const DenseMatrix m = f.at(0, 1) * cplx(0.0, -1.0);
  return (m(0, 1) - m(1, 0)).real();
}

inline ChernResult real_chern_from_curvature(const ModelSpec& s, const SphereGrid& grid, GeometrySource src,
                                             const ChernOptions& opt = {}) {
  detail::require_s2_model(s, grid);
  ChernResult r;
  r.method = "curvature-oracle";
  detail::record_protocol(r, src, opt);
  r.grid = grid.counts();
  r.value = detail::integrate(grid, opt.threads, [&](const ParameterPoint& p) {
              return real_chern_density(detail::curvature_at(s, p, src, opt));
            }) /
            (4.0 * kPi);
  r.finish(true, opt.coarse_threshold);
  return r;
}

inline ChernResult real_chern_from_metric(const ModelSpec& s, const SphereGrid& grid, GeometrySource src,
                                          const ChernOptions& opt = {}) {
  detail::require_s2_model(s, grid);
  ChernResult r;
  r.method = src == GeometrySource::quench ? "metric-quench" : "metric-oracle";
  detail::record_protocol(r, src, opt);
  r.grid = grid.counts();
  struct Node {
    double density = 0.0;
    std::size_t clamped = 0;
  };
  const auto nodes = parallel_map<Node>(grid.size(), opt.threads, [&](std::size_t i) {
    const MetricTensor g = detail::metric_at(s, grid.node(i), src, opt);
    Node n;
    for (std::size_t band = 0; band < 2; ++band) {
      const auto root = detail::clamped_sqrt(same_band_det(g, band, 0, 1));
      n.density += root.value;
      n.clamped += root.clamped;
    }
    return n;
  });
  std::vector<double> vals(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    vals[i] = nodes[i].density;
    r.clamped_nodes += nodes[i].clamped ? 1 : 0;
  }
  detail::enforce_clamp_budget(r.clamped_nodes, grid.size(), opt.clamp_budget);
  r.value = pairwise_sum(vals) * grid.cell_measure() / (2.0 * kPi);
  r.finish(true, opt.coarse_threshold);
  return r;
}

// ---------------------------------------------------------------------------
// second Chern number

inline constexpr double kSecondChernCurvatureFactor = 3.0 / (4.0 * kPi * kPi);
inline constexpr double kSecondChernPrintedMetricFactor = 3.0 / (kPi * kPi);

inline double second_chern_density(const CurvatureTensor& f) { return trace(f.at(0, 1) * f.at(2, 3)).real(); }

inline ChernResult second_chern_from_curvature(const ModelSpec& s, const SphereGrid& grid, GeometrySource src,
                                               const ChernOptions& opt = {}) {
  detail::require_s4_model(s, grid);
  ChernResult r;
  r.method = "curvature-oracle";
  detail::record_protocol(r, src, opt);
  r.grid = grid.counts();
  r.value = kSecondChernCurvatureFactor * detail::integrate(grid, opt.threads, [&](const ParameterPoint& p) {
              return second_chern_density(detail::curvature_at(s, p, src, opt));
            });
  r.finish(false, opt.coarse_threshold);
  return r;
}

using TraceMatrix = std::array<std::array<double, 4>, 4>;

struct GTrace {
  TraceMatrix G{};
  double imag_residue = 0.0;
};

// G_ij = tr g_ij
inline GTrace g_trace_matrix(const MetricTensor& g) {
  if (g.directions() != 4) throw ContractViolation("g_trace_matrix needs D = 4");
  GTrace out;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      const cplx t = trace(g.at(i, j));
      out.G[i][j] = t.real();
      out.imag_residue = std::max(out.imag_residue, std::abs(t.imag()));
    }
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < i; ++j) out.G[i][j] = out.G[j][i] = 0.5 * (out.G[i][j] + out.G[j][i]);
  return out;
}

inline double sqrt_det_g(const MetricTensor& g) { return std::sqrt(std::max(0.0, detail::determinant(g_trace_matrix(g).G))); }

// eps^{abcd} tr(F_ab F_cd), summed over all 24 permutations
inline double calF(const CurvatureTensor& f) {
  if (f.directions() != 4) throw ContractViolation("calF needs D = 4");
  std::array<std::size_t, 4> perm{0, 1, 2, 3};
  cplx sum = 0.0;
  do {
    int inversions = 0;
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = i + 1; j < 4; ++j) inversions += perm[i] > perm[j];
    if (!f.has(perm[0], perm[1]) || !f.has(perm[2], perm[3]))
      throw ContractViolation("calF needs every curvature block");
    const cplx t = trace(f.at(perm[0], perm[1]) * f.at(perm[2], perm[3]));
    sum += (inversions % 2 ? -1.0 : 1.0) * t;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return sum.real();
}

struct DetGCheck {
  double max_relative_deviation = 0.0;  // |48 sqrt detG - |calF|| / |calF|
  double ratio_mean = 0.0;              // |calF| / sqrt detG
  double ratio_spread = 0.0;            // (max - min) / mean
  std::vector<double> ratios;
  std::vector<int> signs;
  bool sign_constant = true;
};

inline DetGCheck sqrt_detG_vs_F_check(const ModelSpec& s, const std::vector<ParameterPoint>& points,
                                      const ChernOptions& opt = {}) {
  if (s.family != Family::yang_eff) throw ContractViolation("sqrt_detG_vs_F_check needs yang-eff");
  if (points.empty()) throw ContractViolation("sqrt_detG_vs_F_check needs sample points");
  struct Sample {
    double root = 0.0, f = 0.0;
  };
  const auto samples = parallel_map<Sample>(points.size(), opt.threads, [&](std::size_t i) {
    const FdGeometry geo = fd_geometry(s, points[i], opt.gauge, opt.geometry);
    return Sample{sqrt_det_g(geo.metric), calF(geo.curvature)};
  });
  DetGCheck out;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& x : samples) {
    const double af = std::abs(x.f);
    out.max_relative_deviation = std::max(out.max_relative_deviation, std::abs(48.0 * x.root - af) / std::max(af, 1e-12));
    const double ratio = x.root > 0.0 ? af / x.root : 0.0;
    out.ratios.push_back(ratio);
    out.signs.push_back(x.f < 0.0 ? -1 : 1);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  out.ratio_mean = pairwise_sum(out.ratios) / static_cast<double>(out.ratios.size());
  out.ratio_spread = (hi - lo) / out.ratio_mean;
  for (int sg : out.signs) out.sign_constant = out.sign_constant && sg == out.signs.front();
  return out;
}

// Seeded interior points on S4, kept away from the coordinate boundaries.
inline std::vector<ParameterPoint> random_s4_points(std::size_t count, std::uint64_t seed, double margin = 0.1) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> polar(margin, kPi - margin), azimuth(margin, 2.0 * kPi - margin);
  std::vector<ParameterPoint> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double a = polar(rng), b = polar(rng), c = polar(rng), d = azimuth(rng);
    out.push_back(ParameterPoint::sphere4(a, b, c, d));
  }
  return out;
}

struct SecondChernCalibration {
  double factor = 0.0;  // c such that c int sgn sqrt detG = curvature value
  double ratio = 0.0;   // factor / printed factor
  double curvature_value = 0.0;
  double metric_integral = 0.0;
  std::vector<std::size_t> grid;
};

namespace detail {

// int sgn(calF) sqrt detG; in quench mode the sign is a single sampled constant.
inline double signed_metric_integral(const ModelSpec& s, const SphereGrid& grid, GeometrySource src,
                                     const ChernOptions& opt, std::size_t& clamped, std::optional<int> fixed_sign) {
  struct Node {
    double value = 0.0;
    bool clamped = false;
  };
  const auto nodes = parallel_map<Node>(grid.size(), opt.threads, [&](std::size_t i) {
    const ParameterPoint p = grid.node(i);
    const MetricTensor g = metric_at(s, p, src, opt);
    const auto root = clamped_sqrt(determinant(g_trace_matrix(g).G));
    int sg = 0;
    if (fixed_sign) {
      sg = *fixed_sign;
    } else {
      const double f = calF(fd_geometry(s, p, opt.gauge, opt.geometry).curvature);
      sg = f < 0.0 ? -1 : 1;
    }
    return Node{sg * root.value, root.clamped};
  });
  std::vector<double> vals(nodes.size());
  clamped = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    vals[i] = nodes[i].value;
    clamped += nodes[i].clamped ? 1 : 0;
  }
  return pairwise_sum(vals) * grid.cell_measure();
}

}  // namespace detail

// Fixes the metric-form constant from the analytic model: curvature value over
// signed metric integral on the same grid.
inline SecondChernCalibration calibrate_second_chern(const SphereGrid& grid, const ChernOptions& opt = {}) {
  const ModelSpec s = ModelSpec::yang_eff(+1);
  SecondChernCalibration cal;
  cal.grid = grid.counts();
  cal.curvature_value = second_chern_from_curvature(s, grid, GeometrySource::analytic, opt).value;
  std::size_t clamped = 0;
  cal.metric_integral = detail::signed_metric_integral(s, grid, GeometrySource::analytic, opt, clamped, std::nullopt);
  if (cal.metric_integral == 0.0) throw QualityError("calibration: vanishing metric integral");
  cal.factor = cal.curvature_value / cal.metric_integral;
  cal.ratio = cal.factor / kSecondChernPrintedMetricFactor;
  return cal;
}

struct SecondChernMetricOptions {
  Normalization normalization = Normalization::oracle_calibrated;
  SphereGrid calibration_grid = SphereGrid::s4(12, 12, 12, 12);
  std::size_t sign_samples = 16;
  std::uint64_t seed = 2024;
};

inline ChernResult second_chern_from_metric(const ModelSpec& s, const SphereGrid& grid, GeometrySource src,
                                            const ChernOptions& opt = {}, const SecondChernMetricOptions& mopt = {}) {
  detail::require_s4_model(s, grid);
  ChernResult r;
  r.method = src == GeometrySource::quench ? "metric-quench" : "metric-oracle";
  r.normalization = std::string(normalization_name(mopt.normalization));
  detail::record_protocol(r, src, opt);
  r.grid = grid.counts();

  std::optional<int> sign;
  if (src == GeometrySource::quench) {
    const DetGCheck chk = sqrt_detG_vs_F_check(s, random_s4_points(mopt.sign_samples, mopt.seed), opt);
    if (!chk.sign_constant) throw QualityError("sign of calF is not constant over the sampled points");
    sign = chk.signs.front();
  }
  const double integral = detail::signed_metric_integral(s, grid, src, opt, r.clamped_nodes, sign);
  detail::enforce_clamp_budget(r.clamped_nodes, grid.size(), opt.clamp_budget);

  const SecondChernCalibration cal = calibrate_second_chern(mopt.calibration_grid, opt);
  r.calibration_ratio = cal.ratio;
  r.value_paper_printed = kSecondChernPrintedMetricFactor * integral;
  r.value_oracle_calibrated = cal.factor * integral;
  r.value = mopt.normalization == Normalization::paper_printed ? *r.value_paper_printed : *r.value_oracle_calibrated;
  r.finish(false, opt.coarse_threshold);
  return r;
}

}  // namespace qmetric
