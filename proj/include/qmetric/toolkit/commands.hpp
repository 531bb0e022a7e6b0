#pragma once

// metric / chern / sweep subcommands. Each returns its rendered outputs in a
// RunOutput; nothing touches the filesystem until the caller commits.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qmetric/chern.hpp"
#include "qmetric/geometry.hpp"
#include "qmetric/models.hpp"
#include "qmetric/parallel.hpp"
#include "qmetric/quench.hpp"
#include "qmetric/toolkit/config.hpp"
#include "qmetric/toolkit/output.hpp"

namespace qmetric::toolkit {

// ---------------------------------------------------------------------------
// metric sweeps and figure presets

struct MetricPlan {
  ModelSpec model;
  Gauge gauge = Gauge::analytic;
  std::vector<double> fixed;
  std::size_t sweep_axis = 0;
  double lo = 0.0, hi = kPi;
  std::vector<ComponentSpec> components;  // 1-based
};

struct Preset {
  const char* name;
  Family family;
  std::vector<double> fixed;
  std::size_t sweep_axis;
  double lo, hi;
  std::vector<ComponentSpec> components;
};

inline const std::vector<Preset>& presets() {
  constexpr double p = kPi;
  static const std::vector<Preset> table{
      // theta sweeps at phi = pi/4
      {"fig-1a", Family::dirac3d_eff, {0, p / 4}, 0, 0, p, {{1, 1, 1, 1}, {2, 2, 1, 1}}},
      {"fig-1b", Family::dirac3d_eff, {0, p / 4}, 0, 0, p, {{1, 2, 1, 1}}},
      {"fig-1c", Family::dirac3d_eff, {0, p / 4}, 0, 0, p, {{2, 2, 1, 2}}},
      {"fig-1d", Family::dirac3d_eff, {0, p / 4}, 0, 0, p, {{1, 2, 1, 2}}},
      {"fig-2a", Family::yang_eff, {0, p / 4, p, p / 4}, 0, 0, p, {{1, 1, 2, 2}}},
      {"fig-2b", Family::yang_eff, {0, p / 4, p, p / 4}, 0, 0, p, {{2, 2, 2, 2}}},
      {"fig-2c", Family::yang_eff, {p / 4, 0, p, p / 4}, 1, 0, p, {{3, 3, 2, 2}}},
      {"fig-2d", Family::yang_eff, {p / 4, p / 4, 0, p / 4}, 2, 0, p, {{4, 4, 2, 1}, {4, 4, 2, 2}}},
      {"fig-3a", Family::lattice_4d, {0, p / 2, p / 2, p}, 0, 0, 2 * p, {{1, 1, 1, 1}}},
      {"fig-3b", Family::lattice_4d, {p / 2, 0, p / 2, p / 2}, 1, 0, 2 * p, {{3, 4, 2, 2}}},
      {"fig-3c", Family::lattice_4d, {0, p / 2, 0, p / 2}, 2, 0, 2 * p, {{1, 1, 1, 2}}},
      {"fig-3d", Family::lattice_4d, {p / 2, p / 2, p / 4, 0}, 3, 0, 2 * p, {{2, 4, 1, 2}}},
  };
  return table;
}

inline const Preset& find_preset(const std::string& name) {
  for (const auto& p : presets())
    if (name == p.name) return p;
  std::string names;
  for (const auto& p : presets()) names += (names.empty() ? "" : ", ") + std::string(p.name);
  throw ConfigError("unknown metric preset '" + name + "' (available: " + names + ")");
}

inline MetricPlan plan_metric(const RunConfig& cfg) {
  MetricPlan plan;
  Family family;
  if (cfg.metric.preset) {
    const Preset& pr = find_preset(*cfg.metric.preset);
    if (cfg.family && *cfg.family != pr.family)
      throw ConfigError("metric preset '" + *cfg.metric.preset + "' uses family " +
                        std::string(family_name(pr.family)) + ", not " + std::string(family_name(*cfg.family)));
    family = pr.family;
    plan.fixed = pr.fixed;
    plan.sweep_axis = pr.sweep_axis;
    plan.lo = pr.lo;
    plan.hi = pr.hi;
    plan.components = pr.components;
  } else {
    if (!cfg.family) throw ConfigError("metric: set model.family or choose a metric.preset");
    family = *cfg.family;
    plan.fixed = cfg.metric.fixed;
    plan.sweep_axis = cfg.metric.sweep_axis;
    plan.lo = cfg.metric.sweep_lo;
    plan.hi = cfg.metric.sweep_hi;
    plan.components = cfg.metric.components;
    if (plan.components.empty()) throw ConfigError("metric: metric.components is empty");
  }
  plan.model = cfg.model(family);
  plan.gauge = cfg.gauge_for(plan.model);
  const std::size_t d = parameter_dim(plan.model);
  if (plan.fixed.size() != d)
    throw ConfigError("metric.fixed needs " + std::to_string(d) + " coordinates for " +
                      std::string(family_name(family)));
  if (plan.sweep_axis >= d) throw ConfigError("metric.sweep_axis out of range");
  for (const auto& c : plan.components)
    if (c.mu > d || c.nu > d || c.j > plan.model.degeneracy || c.jp > plan.model.degeneracy)
      throw ConfigError("metric.components index out of range");
  return plan;
}

inline bool has_analytic_metric(Family f) {
  return f == Family::dirac3d_eff || f == Family::experimental_4level || f == Family::yang_eff;
}

// Component value honoring the requested (possibly lower-triangular) order.
inline cplx component(const BlockTensor& t, const ComponentSpec& c) { return t(c.mu - 1, c.nu - 1, c.j - 1, c.jp - 1); }

inline RunOutput cmd_metric(const RunConfig& cfg) {
  const MetricPlan plan = plan_metric(cfg);
  const QuenchProtocol protocol = cfg.protocol_for(plan.model);
  const GeometryOptions geo = cfg.geometry();
  const std::size_t n = cfg.metric.points;

  std::vector<ComponentId> selection;
  for (const auto& c : plan.components) {
    ComponentId id{std::min(c.mu, c.nu) - 1, std::max(c.mu, c.nu) - 1, std::min(c.j, c.jp) - 1,
                   std::max(c.j, c.jp) - 1};
    if (std::find(selection.begin(), selection.end(), id) == selection.end()) selection.push_back(id);
  }

  struct PointResult {
    double x = 0.0;
    MetricTensor quench, oracle;
    std::optional<MetricTensor> analytic;
  };
  const Chart chart = expected_chart(plan.model);
  const auto results = parallel_map<PointResult>(n, cfg.thread_count(), [&](std::size_t i) {
    PointResult r;
    r.x = plan.lo + (static_cast<double>(i) + 0.5) * (plan.hi - plan.lo) / static_cast<double>(n);
    std::vector<double> coords = plan.fixed;
    coords[plan.sweep_axis] = r.x;
    const ParameterPoint p = ParameterPoint::make(chart, coords);
    r.quench = measure_metric(plan.model, p, selection, protocol, plan.gauge, geo).estimate;
    r.oracle = fd_geometry(plan.model, p, plan.gauge, geo).metric;
    if (has_analytic_metric(plan.model.family)) r.analytic = analytic_reference(plan.model, p).metric;
    return r;
  });

  CsvTable csv({"sweep_value", "mu", "nu", "j", "jprime", "part", "quench", "oracle", "analytic", "abs_error"});
  double max_err = 0.0;
  for (const auto& r : results)
    for (const auto& c : plan.components) {
      const cplx q = component(r.quench, c), o = component(r.oracle, c);
      std::optional<cplx> a;
      if (r.analytic) a = component(*r.analytic, c);
      for (int part = 0; part < (c.j == c.jp ? 1 : 2); ++part) {
        auto pick = [&](cplx z) { return part == 0 ? z.real() : z.imag(); };
        const double err = std::abs(pick(q) - pick(o));
        max_err = std::max(max_err, err);
        csv.row()
            .add(r.x)
            .add(c.mu)
            .add(c.nu)
            .add(c.j)
            .add(c.jp)
            .add(part == 0 ? "re" : "im")
            .add(pick(q))
            .add(pick(o))
            .add(a ? std::optional<double>(pick(*a)) : std::nullopt)
            .add(err);
      }
    }

  RunOutput out(cfg, "metric");
  out.add_file("metric.csv", csv.render());
  out.headline("family", std::string(family_name(plan.model.family)));
  out.headline("gauge", std::string(gauge_name(plan.gauge)));
  out.headline("preset", cfg.metric.preset ? nlohmann::json(*cfg.metric.preset) : nlohmann::json(nullptr));
  out.headline("delta_lambda", protocol.delta_lambda);
  out.headline("max_abs_error", max_err);
  out.headline("rows", csv.size());
  return out;
}

// ---------------------------------------------------------------------------
// Chern numbers

inline SphereGrid default_grid(const RunConfig& cfg) {
  const bool second = cfg.chern.invariant == "second";
  const bool quench = cfg.chern.source == GeometrySource::quench;
  if (cfg.chern.grid) {
    const auto& g = *cfg.chern.grid;
    if (second) {
      if (g.size() != 4) throw ConfigError("chern.grid needs four cell counts for the second Chern number");
      return SphereGrid::s4(g[0], g[1], g[2], g[3]);
    }
    if (g.size() != 2) throw ConfigError("chern.grid needs two cell counts for the real Chern number");
    return SphereGrid::s2(g[0], g[1]);
  }
  if (second) return quench ? SphereGrid::s4(12, 12, 12, 12) : SphereGrid::s4(20, 20, 20, 40);
  return quench ? SphereGrid::s2(50, 50) : SphereGrid::s2(100, 100);
}

inline ModelSpec chern_model(const RunConfig& cfg) {
  const bool second = cfg.chern.invariant == "second";
  const Family f = cfg.family.value_or(second ? Family::yang_eff : Family::dirac3d_eff);
  return cfg.model(f);
}

inline ChernOptions chern_options(const RunConfig& cfg, const ModelSpec& m) {
  ChernOptions o;
  o.gauge = cfg.gauge_for(m);
  o.geometry = cfg.geometry();
  o.protocol = cfg.protocol_for(m);
  o.threads = cfg.thread_count();
  return o;
}

inline ChernResult compute_chern(const RunConfig& cfg) {
  const ModelSpec m = chern_model(cfg);
  const SphereGrid grid = default_grid(cfg);
  const ChernOptions opt = chern_options(cfg, m);
  const bool curvature = cfg.chern.method == "curvature";
  try {
    if (cfg.chern.invariant == "real") {
      return curvature ? real_chern_from_curvature(m, grid, cfg.chern.source, opt)
                       : real_chern_from_metric(m, grid, cfg.chern.source, opt);
    }
    if (curvature) return second_chern_from_curvature(m, grid, cfg.chern.source, opt);
    SecondChernMetricOptions mo;
    mo.normalization = cfg.chern.normalization;
    const auto& c = cfg.chern.calibration_grid;
    mo.calibration_grid = SphereGrid::s4(c[0], c[1], c[2], c[3]);
    mo.sign_samples = cfg.chern.sign_samples;
    mo.seed = cfg.seed;
    return second_chern_from_metric(m, grid, cfg.chern.source, opt, mo);
  } catch (const ContractViolation& e) {
    throw ConfigError(e.what());
  }
}

inline RunOutput cmd_chern(const RunConfig& cfg) {
  const ChernResult r = compute_chern(cfg);
  RunOutput out(cfg, "chern");
  out.add_file("chern.json", render_json(chern_json(r)));
  out.headline("invariant", cfg.chern.invariant);
  out.headline("value", r.value);
  if (r.mod2) out.headline("mod2", *r.mod2);
  return out;
}

// ---------------------------------------------------------------------------
// T and delta-lambda sweeps of the quench real Chern number

struct SweepRow {
  std::string series;
  double T = 0.0, delta_lambda = 0.0;
  ChernResult result;
};

inline bool non_increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[i - 1]) return false;
  return true;
}

inline RunOutput cmd_sweep(const RunConfig& cfg) {
  if (cfg.sweep.T.empty() && cfg.sweep.delta_lambda.empty())
    throw ConfigError("sweep: both sweep.T and sweep.delta_lambda are empty");
  RunConfig base = cfg;
  base.chern.invariant = "real";
  base.chern.method = "metric";
  base.chern.source = GeometrySource::quench;
  const ModelSpec m = chern_model(base);
  const double dl0 = base.delta_lambda_for(m);

  std::vector<SweepRow> rows;
  for (double t : cfg.sweep.T) {
    RunConfig c = base;
    c.T = t;
    c.delta_lambda = dl0;
    rows.push_back({"T", t, dl0, compute_chern(c)});
  }
  for (double dl : cfg.sweep.delta_lambda) {
    RunConfig c = base;
    c.delta_lambda = dl;
    rows.push_back({"delta_lambda", base.T, dl, compute_chern(c)});
  }

  CsvTable csv({"series", "T", "delta_lambda", "value", "abs_error", "mod2"});
  std::vector<double> err_T, err_dl;
  for (const auto& r : rows) {
    const double err = std::abs(r.result.value - 1.0);
    (r.series == "T" ? err_T : err_dl).push_back(err);
    csv.row().add(r.series).add(r.T).add(r.delta_lambda).add(r.result.value).add(err).add(r.result.mod2.value_or(0));
  }
  nlohmann::json summary;
  summary["T_non_increasing"] = non_increasing(err_T);
  summary["delta_lambda_non_increasing"] = non_increasing(err_dl);
  summary["T_abs_errors"] = err_T;
  summary["delta_lambda_abs_errors"] = err_dl;
  summary["grid"] = default_grid(base).counts();

  RunOutput out(cfg, "sweep");
  out.add_file("sweep.csv", csv.render());
  out.add_file("sweep_summary.json", render_json(summary));
  out.headline("T_non_increasing", summary["T_non_increasing"]);
  out.headline("delta_lambda_non_increasing", summary["delta_lambda_non_increasing"]);
  return out;
}

}  // namespace qmetric::toolkit
