// qmetric: quench extraction of the non-Abelian quantum metric and the Chern
// numbers built from it.
//
//   qmetric metric   --preset fig-1a
//   qmetric chern    --invariant second --source quench
//   qmetric sweep
//   qmetric validate --quick
//
// Exit codes: 0 success, 1 validation failure, 2 configuration error,
// 3 numerical-quality error.

#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qmetric/toolkit/commands.hpp"
#include "qmetric/toolkit/config.hpp"
#include "qmetric/toolkit/output.hpp"
#include "qmetric/toolkit/validate.hpp"

namespace {

using qmetric::toolkit::json;

enum Exit { kOk = 0, kValidationFailed = 1, kConfigError = 2, kQualityError = 3 };

// Flags the user actually passed, as a merge patch over defaults and file.
struct Flags {
  std::optional<std::string> config, out, time_unit;
  std::optional<std::size_t> threads;
  std::optional<std::uint64_t> seed;
  // model / protocol
  std::optional<std::string> family, gauge, delta_lambda, schedule;
  std::optional<double> mass, T;
  std::optional<int> sign;
  std::optional<std::size_t> substeps;
  // metric
  std::optional<std::string> preset;
  std::optional<std::size_t> points;
  // chern
  std::optional<std::string> invariant, method, source, normalization;
  std::vector<std::size_t> grid;
  // sweep
  std::vector<std::string> sweep_T, sweep_dl;
  // validate
  bool quick = false;
  std::optional<std::string> corrupt;

  json patch() const {
    json p = json::object();
    auto set = [&](const char* a, const char* b, const auto& v) {
      if (v) (b ? p[a][b] : p[a]) = *v;
    };
    set("out", nullptr, out);
    set("threads", nullptr, threads);
    set("seed", nullptr, seed);
    set("quench", "time_unit", time_unit);
    set("model", "family", family);
    set("model", "mass", mass);
    set("model", "sign", sign);
    set("gauge", nullptr, gauge);
    set("quench", "delta_lambda", delta_lambda);
    set("quench", "schedule", schedule);
    set("quench", "T", T);
    set("quench", "substeps", substeps);
    set("metric", "preset", preset);
    set("metric", "points", points);
    set("chern", "invariant", invariant);
    set("chern", "method", method);
    set("chern", "source", source);
    set("chern", "normalization", normalization);
    if (!grid.empty()) p["chern"]["grid"] = grid;
    if (!sweep_T.empty()) p["sweep"]["T"] = sweep_T;
    if (!sweep_dl.empty()) p["sweep"]["delta_lambda"] = sweep_dl;
    if (quick) p["validate"]["quick"] = true;
    set("validate", "corrupt", corrupt);
    return p;
  }
};

void add_protocol_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--family", f.family, "model family (dirac3d-eff, yang-eff, lattice-4d, ...)");
  sub->add_option("--mass", f.mass, "mass term of the lattice families");
  sub->add_option("--sign", f.sign, "monopole sign, +1 or -1");
  sub->add_option("--gauge", f.gauge, "analytic, reference-projection or eigensolver-raw");
  sub->add_option("--delta-lambda", f.delta_lambda, "quench step, e.g. pi/100");
  sub->add_option("--T", f.T, "ramp time in the chosen time unit");
  sub->add_option("--substeps", f.substeps, "midpoint substeps per ramp");
  sub->add_option("--schedule", f.schedule, "linear or sudden");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quench extraction of the non-Abelian quantum metric"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand
  Flags f;
  app.add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--out", f.out, "output root directory");
  app.add_option("--threads", f.threads, "worker threads (0 = all cores)");
  app.add_option("--seed", f.seed, "seed for randomized validation draws");
  app.add_option("--time-unit", f.time_unit, "two-pi or one");

  auto* metric = app.add_subcommand("metric", "metric components along a one-parameter sweep");
  metric->add_option("--preset", f.preset, "fig-1a ... fig-3d");
  metric->add_option("--points", f.points, "sweep points");
  add_protocol_flags(metric, f);

  auto* chern = app.add_subcommand("chern", "real or second Chern number");
  chern->add_option("--invariant", f.invariant, "real or second");
  chern->add_option("--method", f.method, "curvature or metric");
  chern->add_option("--source", f.source, "analytic, fd or quench");
  chern->add_option("--normalization", f.normalization, "oracle-calibrated or paper-printed");
  chern->add_option("--grid", f.grid, "cell counts per angle")->expected(2, 4);
  add_protocol_flags(chern, f);

  auto* sweep = app.add_subcommand("sweep", "quench real Chern number over T and delta-lambda");
  sweep->add_option("--T-list", f.sweep_T, "ramp times");
  sweep->add_option("--dl-list", f.sweep_dl, "quench steps, e.g. pi/20 pi/50");
  sweep->add_option("--grid", f.grid, "cell counts per angle")->expected(2);
  add_protocol_flags(sweep, f);

  auto* validate = app.add_subcommand("validate", "run the invariant suite");
  validate->add_flag("--quick", f.quick, "reduced sample counts");
  validate->add_option("--corrupt", f.corrupt, "inject a fault (dirac-algebra)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  using namespace qmetric::toolkit;
  try {
    const RunConfig cfg = resolve_config(f.config, f.patch());
    std::optional<RunOutput> out;
    int status = kOk;
    if (metric->parsed()) {
      out.emplace(cmd_metric(cfg));
    } else if (chern->parsed()) {
      out.emplace(cmd_chern(cfg));
    } else if (sweep->parsed()) {
      out.emplace(cmd_sweep(cfg));
    } else {
      ValidateReport report;
      out.emplace(cmd_validate(cfg, report));
      for (const auto& c : report.checks)
        std::cout << (c.passed ? "pass " : "FAIL ") << c.name << std::setprecision(3) << "  residual=" << c.residual
                  << "  tol=" << c.tolerance << "\n";
      if (!report.passed()) status = kValidationFailed;
    }
    const auto dir = out->commit();
    std::cout << "run " << out->id() << " -> " << dir.string() << "\n";
    std::cout << out->manifest()["headline"].dump() << "\n";
    return status;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfigError;
  } catch (const qmetric::ContractViolation& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfigError;
  } catch (const qmetric::Error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kQualityError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kQualityError;
  }
}
