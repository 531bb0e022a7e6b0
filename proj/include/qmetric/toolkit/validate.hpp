#pragma once

// Invariant suite behind `qmetric validate`. Every check records its worst
// residual, the tolerance it was held to and the seed of its random draws.

#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "qmetric/chern.hpp"
#include "qmetric/geometry.hpp"
#include "qmetric/models.hpp"
#include "qmetric/numlin.hpp"
#include "qmetric/quench.hpp"
#include "qmetric/toolkit/config.hpp"
#include "qmetric/toolkit/output.hpp"

namespace qmetric::toolkit {

struct CheckResult {
  std::string name;
  bool passed = false;
  double residual = 0.0;
  double tolerance = 0.0;
  std::uint64_t seed = 0;
  std::string detail;
  double seconds = 0.0;
};

struct ValidateReport {
  std::vector<CheckResult> checks;
  bool passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
  std::vector<std::string> failures() const {
    std::vector<std::string> out;
    for (const auto& c : checks)
      if (!c.passed) out.push_back(c.name);
    return out;
  }
};

struct ValidateOptions {
  bool quick = false;
  bool corrupt_dirac_algebra = false;
  std::uint64_t seed = 20240601;
  std::size_t threads = 1;
};

namespace validate_detail {

using Rng = std::mt19937_64;

inline double uniform(Rng& r, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(r); }

inline ParameterPoint random_s2(Rng& r, double margin = 0.1) {
  return ParameterPoint::sphere2(uniform(r, margin, kPi - margin), uniform(r, margin, 2 * kPi - margin));
}
inline ParameterPoint random_s4(Rng& r, double margin = 0.1) {
  return ParameterPoint::sphere4(uniform(r, margin, kPi - margin), uniform(r, margin, kPi - margin),
                                 uniform(r, margin, kPi - margin), uniform(r, margin, 2 * kPi - margin));
}
inline ParameterPoint random_k(Rng& r, std::size_t d) {
  std::vector<double> k(d);
  for (auto& x : k) x = uniform(r, -kPi, kPi);
  return ParameterPoint::momentum(k);
}

inline DenseMatrix random_hermitian(Rng& r, std::size_t n) {
  DenseMatrix a(n);
  std::normal_distribution<double> g;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const cplx z = i == j ? cplx(g(r), 0.0) : cplx(g(r), g(r));
      a(i, j) = z;
      a(j, i) = std::conj(z);
    }
  return a;
}

inline Frame4 random_frame(Rng& r, std::size_t n) {
  std::normal_distribution<double> g;
  Frame4 f(n);
  for (auto& v : f)
    for (auto& x : v) x = {g(r), g(r)};
  return lowdin_orthonormalize(f);
}

}  // namespace validate_detail

inline ValidateReport run_validation(const ValidateOptions& opt) {
  using namespace validate_detail;
  ValidateReport report;
  const bool quick = opt.quick;
  std::uint64_t next_seed = opt.seed;

  auto run = [&](const std::string& name, double tol, const std::function<double(Rng&, std::string&)>& body) {
    CheckResult c;
    c.name = name;
    c.tolerance = tol;
    c.seed = next_seed++;
    Rng rng(c.seed);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.residual = body(rng, c.detail);
      c.passed = std::isfinite(c.residual) && c.residual <= tol;
    } catch (const std::exception& e) {
      c.passed = false;
      c.residual = std::numeric_limits<double>::infinity();
      c.detail = std::string("exception: ") + e.what();
    }
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.checks.push_back(c);
  };

  const ModelSpec eff3 = ModelSpec::dirac3d_eff();
  const ModelSpec yang = ModelSpec::yang_eff();
  const ModelSpec lat3 = ModelSpec::dirac3d_lattice(2.0);

  // ---- numlin
  run("dirac-algebra", 0.0, [&](Rng&, std::string& detail) {
    auto alphas = gamma_set(Family::dirac3d_eff);
    if (opt.corrupt_dirac_algebra) alphas[0] = kron(pauli(0), pauli(1));
    const auto a3 = dirac_algebra_check(std::span<const Matrix4>(alphas));
    const auto b5 = dirac_algebra_check(yang);
    detail = "alpha " + format_number(a3.max_residual) + ", beta " + format_number(b5.max_residual);
    return std::max(a3.max_residual, b5.max_residual);
  });

  run("eig-reconstruction", 1e-10, [&](Rng& r, std::string&) {
    double worst = 0.0;
    for (int t = 0; t < (quick ? 20 : 100); ++t) {
      const std::size_t n = 2 + static_cast<std::size_t>(t) % 7;
      const DenseMatrix h = random_hermitian(r, n);
      const auto sd = hermitian_eig(h);
      DenseMatrix d(n);
      for (std::size_t k = 0; k < n; ++k) d(k, k) = sd.eigenvalues[k];
      worst = std::max(worst, max_abs_diff(sd.eigenvectors * d * adjoint(sd.eigenvectors), h));
    }
    return worst;
  });

  run("unitary-exp-group", 1e-11, [&](Rng& r, std::string&) {
    double worst = 0.0;
    for (int t = 0; t < (quick ? 10 : 50); ++t) {
      const DenseMatrix h = random_hermitian(r, 4);
      const double a = uniform(r, -2, 2), b = uniform(r, -2, 2);
      worst = std::max(worst, max_abs_diff(unitary_exp(h, a) * unitary_exp(h, b), unitary_exp(h, a + b)));
    }
    return worst;
  });

  run("subspace-align-idempotent", 1e-12, [&](Rng& r, std::string&) {
    double worst = 0.0;
    for (int t = 0; t < (quick ? 10 : 50); ++t) {
      const Frame4 ref = random_frame(r, 2);
      // rotate the reference inside its span
      const DenseMatrix h = random_hermitian(r, 2);
      const DenseMatrix u = unitary_exp(h, 1.0);
      Frame4 basis(2);
      for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t j = 0; j < 2; ++j) basis[k] = axpy(u(j, k), ref[j], basis[k]);
      const Frame4 once = subspace_align(basis, ref);
      const Frame4 twice = subspace_align(once, ref);
      for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t i = 0; i < 4; ++i) worst = std::max(worst, std::abs(once[k][i] - twice[k][i]));
    }
    return worst;
  });

  // ---- models
  run("symmetry-3d", 1e-12, [&](Rng& r, std::string&) {
    double worst = 0.0;
    for (int t = 0; t < (quick ? 10 : 50); ++t) {
      const auto rep = symmetry_check(lat3, random_k(r, 3));
      worst = std::max({worst, rep.inversion, rep.time_reversal, rep.pt});
    }
    return worst;
  });

  run("pt-real-hamiltonian", 1e-15, [&](Rng& r, std::string&) {
    double worst = 0.0;
    for (int t = 0; t < (quick ? 10 : 50); ++t) worst = std::max(worst, symmetry_check(lat3, random_k(r, 3)).max_imag);
    return worst;
  });

  run("time-reversal-5d", 1e-12, [&](Rng& r, std::string& detail) {
    double worst = 0.0, printed = 0.0;
    for (int t = 0; t < (quick ? 10 : 50); ++t) {
      const auto rep = symmetry_check(ModelSpec::yang5d_lattice(4.0), random_k(r, 5));
      worst = std::max(worst, rep.theta_kramers);
      printed = std::max(printed, rep.theta_printed);
    }
    detail = "Theta = beta_3; i sigma_2 x sigma_0 residual " + format_number(printed);
    return worst;
  });

  run("spectrum-plus-minus-d", 1e-10, [&](Rng& r, std::string&) {
    double worst = 0.0;
    const std::vector<std::pair<ModelSpec, ParameterPoint (*)(Rng&)>> cases{
        {lat3, [](Rng& g) { return random_k(g, 3); }},
        {ModelSpec::yang5d_lattice(4.0), [](Rng& g) { return random_k(g, 5); }},
        {ModelSpec::lattice_4d(), [](Rng& g) { return random_k(g, 4); }},
        {eff3, [](Rng& g) { return random_s2(g); }},
        {yang, [](Rng& g) { return random_s4(g); }},
        {ModelSpec::experimental_4level(), [](Rng& g) { return random_s2(g); }},
    };
    for (const auto& [m, draw] : cases)
      for (int t = 0; t < (quick ? 5 : 20); ++t) {
        const ParameterPoint p = draw(r);
        const double d = dirac_coefficients(m, p).magnitude();
        const auto e = hermitian_eig(hamiltonian(m, p)).eigenvalues;
        const double want[4] = {-d, -d, d, d};
        for (int k = 0; k < 4; ++k) worst = std::max(worst, std::abs(e[k] - want[k]) / (1.0 + d));
      }
    return worst;
  });

  run("experimental-reduction", 1e-13, [&](Rng&, std::string&) {
    double worst = 0.0;
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 10; ++j)
        for (int sign : {+1, -1})
          worst = std::max(worst, experimental_reduction_check((i + 0.5) * kPi / 10, (j + 0.5) * 2 * kPi / 10, sign));
    return worst;
  });

  // ---- geometry
  run("big-q-psd", 1e-8, [&](Rng& r, std::string&) {
    double worst = 0.0;  // most negative eigenvalue, sign flipped
    for (int t = 0; t < (quick ? 5 : 20); ++t) {
      for (const auto& [m, p] : {std::pair{eff3, random_s2(r)}, std::pair{yang, random_s4(r)}}) {
        const auto big = qgt_fd(m, p, default_gauge(m)).flatten();
        worst = std::max(worst, -hermitian_eig(big).eigenvalues.front());
      }
    }
    return std::max(0.0, worst);
  });

  run("block-symmetry", 1e-10, [&](Rng& r, std::string&) {
    double worst = 0.0;
    for (int t = 0; t < (quick ? 5 : 20); ++t)
      for (const auto& [m, p] : {std::pair{eff3, random_s2(r)}, std::pair{yang, random_s4(r)},
                                 std::pair{ModelSpec::lattice_4d(), random_k(r, 4)}}) {
        const FdGeometry g = fd_geometry(m, p, default_gauge(m));
        const auto rm = check_metric(g.metric);
        const auto rf = check_curvature(g.curvature);
        worst = std::max({worst, rm.hermiticity, rm.direction_symmetry, -rm.min_diag_eigenvalue, rf.hermiticity,
                          rf.direction_symmetry});
      }
    return worst;
  });

  run("fidelity-quadratic-law", 1.0, [&](Rng& r, std::string& detail) {
    // |ratio - 1| / (3 dl); passes at <= 1
    double worst = 0.0;
    for (int t = 0; t < (quick ? 5 : 20); ++t) {
      const ParameterPoint p = random_s2(r, 0.3);
      const double a = uniform(r, 0, 2 * kPi), b = uniform(r, 0, 2 * kPi);
      const std::vector<cplx> c{std::cos(a), std::sin(a) * std::polar(1.0, b)};
      const double u = uniform(r, 0, 2 * kPi);
      const MetricTensor g = analytic_reference(eff3, p).metric;
      for (double dl : {1e-2, 1e-3, 1e-4}) {
        const std::vector<double> dv{dl * std::cos(u), dl * std::sin(u)};
        const double ratio = fidelity_distance(eff3, p, c, dv, Gauge::analytic) / metric_distance(g, c, dv);
        worst = std::max(worst, std::abs(ratio - 1.0) / (3.0 * dl));
      }
    }
    detail = "max |ratio - 1| / (3 dl)";
    return worst;
  });

  run("yang-trace-free-curvature", 1e-8, [&](Rng& r, std::string&) {
    double worst = 0.0;
    for (int t = 0; t < (quick ? 5 : 20); ++t) {
      const CurvatureTensor f = fd_geometry(yang, random_s4(r), Gauge::reference_projection).curvature;
      for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = 0; b < 4; ++b) worst = std::max(worst, std::abs(trace(f.at(a, b))));
    }
    return worst;
  });

  run("gauge-invariance-traces", 1e-8, [&](Rng& r, std::string&) {
    double worst = 0.0;
    for (int t = 0; t < (quick ? 5 : 20); ++t) {
      const ParameterPoint p = random_s2(r);
      const FdGeometry a = fd_geometry(eff3, p, Gauge::analytic);
      const FdGeometry b = fd_geometry(eff3, p, Gauge::reference_projection);
      for (std::size_t mu = 0; mu < 2; ++mu)
        for (std::size_t nu = 0; nu < 2; ++nu) {
          worst = std::max(worst, std::abs(trace(a.metric.at(mu, nu)) - trace(b.metric.at(mu, nu))));
          worst = std::max(worst, std::abs(trace(a.curvature.at(mu, nu)) - trace(b.curvature.at(mu, nu))));
        }
      for (std::size_t band = 0; band < 2; ++band)
        worst = std::max(worst, std::abs(same_band_det(a.metric, band, 0, 1) - same_band_det(b.metric, band, 0, 1)));
      worst = std::max(worst, std::abs(real_chern_density(a.curvature) - real_chern_density(b.curvature)));
      const ParameterPoint q = random_s4(r);
      const FdGeometry c = fd_geometry(yang, q, Gauge::reference_projection);
      const FdGeometry d = fd_geometry(yang, q, Gauge::eigensolver_raw);
      worst = std::max(worst, std::abs(second_chern_density(c.curvature) - second_chern_density(d.curvature)));
      worst = std::max(worst, std::abs(calF(c.curvature) - calF(d.curvature)));
      worst = std::max(worst, std::abs(sqrt_det_g(c.metric) - sqrt_det_g(d.metric)));
    }
    return worst;
  });

  run("det-relation", 1e-5, [&](Rng& r, std::string& detail) {
    double analytic = 0.0, fd = 0.0;
    for (int t = 0; t < 20; ++t) {
      const ParameterPoint p = random_s2(r);
      const auto an = analytic_reference(eff3, p);
      const auto ra = det_relation_check(an.metric, an.curvature);
      analytic = std::max({analytic, std::abs(ra.band12), std::abs(ra.band21)});
      const FdGeometry g = fd_geometry(eff3, p, Gauge::analytic);
      const auto rf = det_relation_check(g.metric, g.curvature);
      fd = std::max({fd, std::abs(rf.band12), std::abs(rf.band21)});
    }
    detail = "analytic " + format_number(analytic) + " (tolerance 1e-12)";
    return analytic <= 1e-12 ? fd : std::numeric_limits<double>::infinity();
  });

  // ---- quench
  const QuenchProtocol proto3{kPi / 100, Schedule::linear(0.001)};
  run("probability-conservation", 1e-10, [&](Rng& r, std::string&) {
    double worst = 0.0;
    for (int t = 0; t < (quick ? 3 : 10); ++t) {
      const auto m = measure_metric(eff3, random_s2(r), all_components(2, 2), proto3, Gauge::analytic);
      for (const auto& run : m.runs) worst = std::max(worst, std::abs(run.total_probability - 1.0));
      const auto y = measure_metric(yang, random_s4(r), same_band_components(4, 2), {kPi / 80, Schedule::linear(0.001)},
                                    Gauge::reference_projection);
      for (const auto& run : y.runs) worst = std::max(worst, std::abs(run.total_probability - 1.0));
    }
    return worst;
  });

  run("sudden-linear-consistency", 5e-2, [&](Rng& r, std::string&) {
    double worst = 0.0;
    for (int t = 0; t < (quick ? 3 : 10); ++t) {
      const ParameterPoint p = random_s2(r);
      for (std::size_t axis : {0u, 1u}) {
        QuenchSpec q{p, {axis}, kPi / 100, Schedule::linear(0.001)};
        const double lin = transition_probability(eff3, q, PreparedState::band(0), Gauge::analytic).gamma;
        q.schedule = Schedule::sudden();
        const double sud = transition_probability(eff3, q, PreparedState::band(0), Gauge::analytic).gamma;
        worst = std::max(worst, std::abs(lin - sud) / sud);
      }
    }
    return worst;
  });

  run("quadratic-scaling", 1.0, [&](Rng& r, std::string& detail) {
    // relative spread of Gamma / dl^2 over the largest step, scaled by 3 dl
    double worst = 0.0;
    for (int t = 0; t < (quick ? 3 : 10); ++t) {
      const ParameterPoint p = random_s2(r, 0.3);
      std::vector<double> ratios;
      for (double dl : {kPi / 400, kPi / 200, kPi / 100}) {
        QuenchSpec q{p, {0}, dl, Schedule::linear(0.001)};
        ratios.push_back(transition_probability(eff3, q, PreparedState::band(0), Gauge::analytic).gamma / (dl * dl));
      }
      const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
      worst = std::max(worst, (*hi - *lo) / *hi / (3.0 * kPi / 100));
    }
    detail = "max spread / (3 dl)";
    return worst;
  });

  run("substep-insensitivity", 1e-6, [&](Rng&, std::string&) {
    const ParameterPoint p = ParameterPoint::sphere2(kPi / 2, kPi / 4);
    QuenchSpec q{p, {0}, kPi / 100, Schedule::linear(0.001, 100)};
    const GroundBundle b = ground_bundle(eff3, p, Gauge::analytic);
    const Vector4 a = evolve(eff3, q, prepare(b, PreparedState::band(0)));
    q.schedule.substeps = quick ? 1000 : 10000;
    const Vector4 c = evolve(eff3, q, prepare(b, PreparedState::band(0)));
    double d = 0.0;
    for (std::size_t i = 0; i < 4; ++i) d = std::max(d, std::abs(a[i] - c[i]));
    return d;
  });

  run("quench-oracle-agreement", 1.0, [&](Rng& r, std::string& detail) {
    // worst |quench - oracle| / max(2e-2, 5e-2 |oracle|)
    double worst = 0.0;
    struct Case {
      ModelSpec m;
      std::function<ParameterPoint(Rng&)> draw;
      double dl;
    };
    const std::vector<Case> cases{
        {eff3, [](Rng& g) { return random_s2(g); }, kPi / 100},
        {yang, [](Rng& g) { return random_s4(g); }, kPi / 80},
        {ModelSpec::lattice_4d(), [](Rng& g) { return random_k(g, 4); }, kPi / 80},
    };
    for (const auto& c : cases)
      for (int t = 0; t < (quick ? 1 : 3); ++t) {
        const ParameterPoint p = c.draw(r);
        const Gauge gauge = default_gauge(c.m);
        const std::size_t d = p.dim();
        const auto est = measure_metric(c.m, p, all_components(d, 2), {c.dl, Schedule::linear(0.001)}, gauge).estimate;
        const MetricTensor ora = fd_geometry(c.m, p, gauge).metric;
        for (std::size_t mu = 0; mu < d; ++mu)
          for (std::size_t nu = 0; nu < d; ++nu)
            for (std::size_t j = 0; j < 2; ++j)
              for (std::size_t jp = 0; jp < 2; ++jp) {
                const cplx o = ora(mu, nu, j, jp);
                worst = std::max(worst, std::abs(est(mu, nu, j, jp) - o) / std::max(2e-2, 5e-2 * std::abs(o)));
              }
      }
    detail = "max error / max(2e-2, 5e-2 |oracle|)";
    return worst;
  });

  // ---- chern
  ChernOptions co;
  co.threads = opt.threads;
  run("chern-gauge-invariance", 1e-6, [&](Rng&, std::string&) {
    const SphereGrid g2 = quick ? SphereGrid::s2(10, 10) : SphereGrid::s2(20, 20);
    ChernOptions a = co, b = co;
    a.gauge = Gauge::analytic;
    b.gauge = Gauge::reference_projection;
    double worst = std::abs(real_chern_from_curvature(eff3, g2, GeometrySource::fd, a).value -
                            real_chern_from_curvature(eff3, g2, GeometrySource::fd, b).value);
    worst = std::max(worst, std::abs(real_chern_from_metric(eff3, g2, GeometrySource::fd, a).value -
                                     real_chern_from_metric(eff3, g2, GeometrySource::fd, b).value));
    const SphereGrid g4 = quick ? SphereGrid::s4(3, 3, 3, 4) : SphereGrid::s4(5, 5, 5, 6);
    b.gauge = Gauge::reference_projection;
    ChernOptions c = co;
    c.gauge = Gauge::eigensolver_raw;
    worst = std::max(worst, std::abs(second_chern_from_curvature(yang, g4, GeometrySource::fd, b).value -
                                     second_chern_from_curvature(yang, g4, GeometrySource::fd, c).value));
    return worst;
  });

  run("monopole-antisymmetry", 1e-3, [&](Rng&, std::string&) {
    const SphereGrid g2 = SphereGrid::s2(100, 100);
    const SphereGrid g4 = SphereGrid::s4(12, 12, 12, 12);
    const double cr = real_chern_from_curvature(eff3, g2, GeometrySource::analytic, co).value +
                      real_chern_from_curvature(ModelSpec::dirac3d_eff(-1), g2, GeometrySource::analytic, co).value;
    const double c2 = second_chern_from_curvature(yang, g4, GeometrySource::analytic, co).value +
                      second_chern_from_curvature(ModelSpec::yang_eff(-1), g4, GeometrySource::analytic, co).value;
    return std::max(std::abs(cr), std::abs(c2));
  });

  run("sqrt-detG-ratio", 1e-6, [&](Rng& r, std::string& detail) {
    const auto chk = sqrt_detG_vs_F_check(yang, random_s4_points(quick ? 10 : 100, r()), co);
    detail = "ratio " + format_number(chk.ratio_mean) + ", sign " + std::to_string(chk.signs.front()) +
             (chk.sign_constant ? " (constant)" : " (varies)");
    return chk.sign_constant ? chk.ratio_spread : std::numeric_limits<double>::infinity();
  });

  if (!quick) {
    run("grid-refinement", 1e-3, [&](Rng&, std::string&) {
      const double a = real_chern_from_curvature(eff3, SphereGrid::s2(100, 100), GeometrySource::analytic, co).value;
      const double b = real_chern_from_curvature(eff3, SphereGrid::s2(200, 200), GeometrySource::analytic, co).value;
      const double c = second_chern_from_curvature(yang, SphereGrid::s4(20, 20, 20, 40), GeometrySource::analytic, co).value;
      const double d = second_chern_from_curvature(yang, SphereGrid::s4(40, 40, 40, 80), GeometrySource::analytic, co).value;
      return std::max(std::abs(a - b), std::abs(c - d));
    });
  }

  run("thread-determinism", 0.0, [&](Rng&, std::string&) {
    const SphereGrid g = SphereGrid::s2(8, 8);
    ChernOptions one = co, many = co;
    one.threads = 1;
    many.threads = 4;
    const double a = real_chern_from_metric(eff3, g, GeometrySource::quench, one).value;
    const double b = real_chern_from_metric(eff3, g, GeometrySource::quench, many).value;
    return a == b ? 0.0 : std::abs(a - b) + 1e-300;
  });

  return report;
}

inline nlohmann::json validate_json(const ValidateReport& rep, const ValidateOptions& opt) {
  nlohmann::json j;
  j["passed"] = rep.passed();
  j["quick"] = opt.quick;
  j["corrupt"] = opt.corrupt_dirac_algebra ? nlohmann::json("dirac-algebra") : nlohmann::json(nullptr);
  j["base_seed"] = opt.seed;
  j["failures"] = rep.failures();
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : rep.checks) {
    nlohmann::json e;
    e["name"] = c.name;
    e["status"] = c.passed ? "pass" : "fail";
    e["residual"] = std::isfinite(c.residual) ? nlohmann::json(c.residual) : nlohmann::json("inf");
    e["tolerance"] = c.tolerance;
    e["seed"] = c.seed;
    e["detail"] = c.detail;
    checks.push_back(e);
  }
  j["checks"] = checks;
  return j;
}

inline RunOutput cmd_validate(const RunConfig& cfg, ValidateReport& report) {
  ValidateOptions opt;
  opt.quick = cfg.validate.quick;
  opt.corrupt_dirac_algebra = cfg.validate.corrupt.has_value();
  opt.seed = cfg.seed;
  opt.threads = cfg.thread_count();
  report = run_validation(opt);
  RunOutput out(cfg, "validate");
  out.add_file("validate.json", render_json(validate_json(report, opt)));
  out.headline("passed", report.passed());
  out.headline("failures", report.failures());
  return out;
}

}  // namespace qmetric::toolkit
