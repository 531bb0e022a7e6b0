#pragma once

// Run configuration: a JSON document merged as defaults <- file <- flags,
// then validated into typed settings. Objects merge key by key; any other
// value (null included, meaning "automatic") replaces the lower layer.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <locale>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qmetric/chern.hpp"
#include "qmetric/errors.hpp"
#include "qmetric/geometry.hpp"
#include "qmetric/models.hpp"
#include "qmetric/quench.hpp"

namespace qmetric::toolkit {

using json = nlohmann::json;

// Bad or inconsistent user configuration (exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

inline json default_config() {
  return json::parse(R"({
    "model": {"family": null, "mass": null, "sign": 1, "frozen": null, "degeneracy": 2},
    "gauge": "auto",
    "fd_step": 1e-4,
    "quench": {"schedule": "linear", "delta_lambda": null, "T": 0.001, "time_unit": "two-pi", "substeps": 100},
    "metric": {"preset": null, "fixed": null, "sweep_axis": 0, "sweep_range": null, "points": 24, "components": null},
    "chern": {"invariant": "real", "method": "metric", "source": "quench", "normalization": "oracle-calibrated",
              "grid": null, "calibration_grid": [12, 12, 12, 12], "sign_samples": 16},
    "sweep": {"T": [0.05, 0.01, 0.001], "delta_lambda": ["pi/20", "pi/50", "pi/100"]},
    "validate": {"quick": false, "corrupt": null},
    "seed": 20240601,
    "threads": 0,
    "out": "out"
  })");
}

// Keys that only affect where and how fast a run executes; they are left out
// of the run id so that worker count never changes the output location.
inline const std::vector<std::string>& execution_keys() {
  static const std::vector<std::string> keys{"threads", "out"};
  return keys;
}

// "pi/100", "3*pi/4", "pi", "0.25" or a plain number.
inline double parse_angle(const json& v, const std::string& where) {
  if (v.is_number()) return v.get<double>();
  if (!v.is_string()) throw ConfigError(where + ": expected a number or an expression like \"pi/100\"");
  std::string s = v.get<std::string>();
  s.erase(std::remove(s.begin(), s.end(), ' '), s.end());
  auto number = [&](const std::string& t) {
    std::istringstream in(t);
    in.imbue(std::locale::classic());
    double x = 0.0;
    if (!(in >> x) || !in.eof()) throw ConfigError(where + ": cannot read '" + s + "'");
    return x;
  };
  const auto at = s.find("pi");
  if (at == std::string::npos) return number(s);
  double factor = 1.0, divisor = 1.0;
  const std::string head = s.substr(0, at), tail = s.substr(at + 2);
  if (!head.empty()) {
    if (head.back() != '*') throw ConfigError(where + ": expected 'k*pi' in '" + s + "'");
    factor = number(head.substr(0, head.size() - 1));
  }
  if (!tail.empty()) {
    if (tail.front() != '/') throw ConfigError(where + ": expected 'pi/n' in '" + s + "'");
    divisor = number(tail.substr(1));
    if (divisor == 0.0) throw ConfigError(where + ": division by zero in '" + s + "'");
  }
  return factor * kPi / divisor;
}

namespace detail {

inline void overlay(json& base, const json& patch) {
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    if (it.value().is_object() && base.contains(it.key()) && base[it.key()].is_object())
      overlay(base[it.key()], it.value());
    else
      base[it.key()] = it.value();
  }
}

}  // namespace detail

inline void merge_layer(json& base, const json& patch, const std::string& layer) {
  if (!patch.is_object()) throw ConfigError(layer + ": configuration must be a JSON object");
  detail::overlay(base, patch);
}

inline json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

namespace detail {

// Rejects keys the schema does not know, naming the allowed ones.
inline void check_keys(const json& doc, const json& schema, const std::string& path) {
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string where = path.empty() ? it.key() : path + "." + it.key();
    if (!schema.contains(it.key())) {
      std::string allowed;
      for (auto s = schema.begin(); s != schema.end(); ++s) allowed += (allowed.empty() ? "" : ", ") + s.key();
      throw ConfigError("unknown config key '" + where + "' (allowed: " + allowed + ")");
    }
    if (schema[it.key()].is_object() && !it.value().is_null()) {
      if (!it.value().is_object()) throw ConfigError("config key '" + where + "' must be an object");
      check_keys(it.value(), schema[it.key()], where);
    }
  }
}

template <class T>
T get(const json& doc, const std::string& path) {
  const json* v = &doc;
  std::string key;
  std::istringstream in(path);
  while (std::getline(in, key, '.')) v = &v->at(key);
  try {
    return v->get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + path + "' has the wrong type: " + v->dump());
  }
}

inline const json& node(const json& doc, const std::string& path) {
  const json* v = &doc;
  std::string key;
  std::istringstream in(path);
  while (std::getline(in, key, '.')) v = &v->at(key);
  return *v;
}

inline std::vector<std::size_t> counts(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw ConfigError(where + ": expected a non-empty array of cell counts");
  std::vector<std::size_t> out;
  for (const auto& x : v) {
    if (!x.is_number_integer() || x.get<long long>() <= 0) throw ConfigError(where + ": cell counts must be positive integers");
    out.push_back(x.get<std::size_t>());
  }
  return out;
}

}  // namespace detail

// Component selector in 1-based indices: mu, nu, j, j'.
struct ComponentSpec {
  std::size_t mu = 1, nu = 1, j = 1, jp = 1;
};

struct MetricSettings {
  std::optional<std::string> preset;
  std::vector<double> fixed;  // point with the swept coordinate overwritten
  std::size_t sweep_axis = 0;  // 0-based
  double sweep_lo = 0.0, sweep_hi = kPi;
  std::size_t points = 24;
  std::vector<ComponentSpec> components;
};

struct ChernSettings {
  std::string invariant = "real";  // real | second
  std::string method = "metric";   // curvature | metric
  GeometrySource source = GeometrySource::quench;
  Normalization normalization = Normalization::oracle_calibrated;
  std::optional<std::vector<std::size_t>> grid;
  std::vector<std::size_t> calibration_grid{12, 12, 12, 12};
  std::size_t sign_samples = 16;
};

struct SweepSettings {
  std::vector<double> T;
  std::vector<double> delta_lambda;
};

struct ValidateSettings {
  bool quick = false;
  std::optional<std::string> corrupt;
};

struct RunConfig {
  json doc;  // fully merged document, echoed into the manifest
  std::optional<Family> family;
  std::optional<double> mass;
  int sign = +1;
  std::optional<double> frozen;
  std::size_t degeneracy = 2;
  std::optional<Gauge> gauge;  // empty means the family default
  double fd_step = 1e-4;
  ScheduleKind schedule = ScheduleKind::linear;
  std::optional<double> delta_lambda;
  double T = 0.001;
  TimeUnit time_unit = TimeUnit::two_pi;
  std::size_t substeps = 100;
  MetricSettings metric;
  ChernSettings chern;
  SweepSettings sweep;
  ValidateSettings validate;
  std::uint64_t seed = 20240601;
  std::size_t threads = 0;
  std::string out = "out";

  // Model with family-specific defaults filled in.
  ModelSpec model(Family f) const {
    ModelSpec s;
    switch (f) {
      case Family::dirac3d_lattice: s = ModelSpec::dirac3d_lattice(); break;
      case Family::dirac3d_eff: s = ModelSpec::dirac3d_eff(); break;
      case Family::yang5d_lattice: s = ModelSpec::yang5d_lattice(); break;
      case Family::yang_eff: s = ModelSpec::yang_eff(); break;
      case Family::lattice_4d: s = ModelSpec::lattice_4d(); break;
      case Family::experimental_4level: s = ModelSpec::experimental_4level(); break;
      case Family::custom: throw ConfigError("model.family: the custom family is only available through the library API");
    }
    if (mass) s.mass = *mass;
    s.sign = sign;
    if (frozen) {
      if (f != Family::lattice_4d) throw ConfigError("model.frozen only applies to lattice-4d");
      s.frozen_kv = *frozen;
    }
    s.degeneracy = degeneracy;
    return s;
  }

  Gauge gauge_for(const ModelSpec& s) const { return gauge.value_or(default_gauge(s)); }

  double delta_lambda_for(const ModelSpec& s) const {
    if (delta_lambda) return *delta_lambda;
    return parameter_dim(s) >= 4 ? kPi / 80 : kPi / 100;
  }

  QuenchProtocol protocol_for(const ModelSpec& s) const {
    QuenchProtocol p;
    p.delta_lambda = delta_lambda_for(s);
    p.schedule = schedule == ScheduleKind::sudden ? Schedule::sudden() : Schedule::linear(T, substeps, time_unit);
    return p;
  }

  GeometryOptions geometry() const {
    GeometryOptions g;
    g.fd_step = fd_step;
    return g;
  }

  std::size_t thread_count() const { return threads == 0 ? default_thread_count() : threads; }

  // Canonical text hashed into the run id.
  std::string canonical() const {
    json c = doc;
    for (const auto& k : execution_keys()) c.erase(k);
    return c.dump();
  }
};

inline RunConfig parse_config(const json& merged) {
  detail::check_keys(merged, default_config(), "");
  RunConfig c;
  c.doc = merged;
  using detail::get;
  using detail::node;
  try {
    const json& fam = node(merged, "model.family");
    if (!fam.is_null()) c.family = parse_family(get<std::string>(merged, "model.family"));
    if (!node(merged, "model.mass").is_null()) c.mass = get<double>(merged, "model.mass");
    c.sign = get<int>(merged, "model.sign");
    if (c.sign != 1 && c.sign != -1) throw ConfigError("model.sign must be +1 or -1");
    if (!node(merged, "model.frozen").is_null()) c.frozen = parse_angle(node(merged, "model.frozen"), "model.frozen");
    c.degeneracy = get<std::size_t>(merged, "model.degeneracy");
    if (c.degeneracy < 1 || c.degeneracy > 3) throw ConfigError("model.degeneracy must be 1, 2 or 3");

    const auto g = get<std::string>(merged, "gauge");
    if (g != "auto") c.gauge = parse_gauge(g);
    c.fd_step = get<double>(merged, "fd_step");
    if (!(c.fd_step > 0.0)) throw ConfigError("fd_step must be positive");

    c.schedule = parse_schedule(get<std::string>(merged, "quench.schedule"));
    if (!node(merged, "quench.delta_lambda").is_null()) {
      c.delta_lambda = parse_angle(node(merged, "quench.delta_lambda"), "quench.delta_lambda");
      if (!(*c.delta_lambda > 0.0)) throw ConfigError("quench.delta_lambda must be positive");
    }
    c.T = get<double>(merged, "quench.T");
    if (!(c.T >= 0.0) || !std::isfinite(c.T)) throw ConfigError("quench.T must be finite and non-negative");
    c.time_unit = parse_time_unit(get<std::string>(merged, "quench.time_unit"));
    c.substeps = get<std::size_t>(merged, "quench.substeps");
    if (c.substeps < 1) throw ConfigError("quench.substeps must be at least 1");

    const json& m = node(merged, "metric");
    if (!m.at("preset").is_null()) c.metric.preset = m.at("preset").get<std::string>();
    if (!m.at("fixed").is_null()) {
      if (!m.at("fixed").is_array()) throw ConfigError("metric.fixed must be an array of coordinates");
      for (const auto& x : m.at("fixed")) c.metric.fixed.push_back(parse_angle(x, "metric.fixed"));
    }
    c.metric.sweep_axis = get<std::size_t>(merged, "metric.sweep_axis");
    if (!m.at("sweep_range").is_null()) {
      const json& r = m.at("sweep_range");
      if (!r.is_array() || r.size() != 2) throw ConfigError("metric.sweep_range must be [lo, hi]");
      c.metric.sweep_lo = parse_angle(r[0], "metric.sweep_range");
      c.metric.sweep_hi = parse_angle(r[1], "metric.sweep_range");
      if (!(c.metric.sweep_hi > c.metric.sweep_lo)) throw ConfigError("metric.sweep_range needs lo < hi");
    }
    c.metric.points = get<std::size_t>(merged, "metric.points");
    if (c.metric.points < 1) throw ConfigError("metric.points must be at least 1");
    if (!m.at("components").is_null()) {
      for (const auto& x : m.at("components")) {
        if (!x.is_array() || x.size() != 4)
          throw ConfigError("metric.components entries must be [mu, nu, j, jprime] (1-based)");
        ComponentSpec s{x[0].get<std::size_t>(), x[1].get<std::size_t>(), x[2].get<std::size_t>(),
                        x[3].get<std::size_t>()};
        if (s.mu < 1 || s.nu < 1 || s.j < 1 || s.jp < 1) throw ConfigError("metric.components indices are 1-based");
        c.metric.components.push_back(s);
      }
    }

    c.chern.invariant = get<std::string>(merged, "chern.invariant");
    if (c.chern.invariant != "real" && c.chern.invariant != "second")
      throw ConfigError("chern.invariant must be 'real' or 'second'");
    c.chern.method = get<std::string>(merged, "chern.method");
    if (c.chern.method != "curvature" && c.chern.method != "metric")
      throw ConfigError("chern.method must be 'curvature' or 'metric'");
    c.chern.source = parse_source(get<std::string>(merged, "chern.source"));
    if (c.chern.method == "curvature" && c.chern.source == GeometrySource::quench)
      throw ConfigError("chern.source 'quench' needs chern.method 'metric' (quenches measure the metric)");
    c.chern.normalization = parse_normalization(get<std::string>(merged, "chern.normalization"));
    if (!node(merged, "chern.grid").is_null()) c.chern.grid = detail::counts(node(merged, "chern.grid"), "chern.grid");
    c.chern.calibration_grid = detail::counts(node(merged, "chern.calibration_grid"), "chern.calibration_grid");
    if (c.chern.calibration_grid.size() != 4) throw ConfigError("chern.calibration_grid needs four cell counts");
    c.chern.sign_samples = get<std::size_t>(merged, "chern.sign_samples");
    if (c.chern.sign_samples < 1) throw ConfigError("chern.sign_samples must be at least 1");

    for (const auto& x : node(merged, "sweep.T")) {
      const double t = parse_angle(x, "sweep.T");
      if (!(t >= 0.0)) throw ConfigError("sweep.T values must be non-negative");
      c.sweep.T.push_back(t);
    }
    for (const auto& x : node(merged, "sweep.delta_lambda")) {
      const double d = parse_angle(x, "sweep.delta_lambda");
      if (!(d > 0.0)) throw ConfigError("sweep.delta_lambda values must be positive");
      c.sweep.delta_lambda.push_back(d);
    }

    c.validate.quick = get<bool>(merged, "validate.quick");
    if (!node(merged, "validate.corrupt").is_null()) {
      c.validate.corrupt = get<std::string>(merged, "validate.corrupt");
      if (*c.validate.corrupt != "dirac-algebra")
        throw ConfigError("validate.corrupt supports only 'dirac-algebra'");
    }

    c.seed = get<std::uint64_t>(merged, "seed");
    c.threads = get<std::size_t>(merged, "threads");
    c.out = get<std::string>(merged, "out");
  } catch (const ConfigError&) {
    throw;
  } catch (const ContractViolation& e) {
    throw ConfigError(e.what());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
  return c;
}

// defaults <- file <- flags
inline RunConfig resolve_config(const std::optional<std::string>& file, const json& flags) {
  json doc = default_config();
  if (file) merge_layer(doc, load_config_file(*file), "config file");
  merge_layer(doc, flags, "command-line flags");
  return parse_config(doc);
}

}  // namespace qmetric::toolkit
