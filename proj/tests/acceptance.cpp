// End-to-end acceptance run: one PASS/FAIL line per criterion, nonzero exit
// if any fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include "qmetric/chern.hpp"
#include "qmetric/toolkit/commands.hpp"
#include "qmetric/toolkit/validate.hpp"

using namespace qmetric;
using namespace qmetric::toolkit;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x, int prec = 6) {
  std::ostringstream os;
  os.precision(prec);
  os << x;
  return os.str();
}

std::size_t hw_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

int failures = 0;

void criterion(const std::string& name, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << " [" << fmt(secs, 3) << " s]"
            << std::endl;
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. finite differences against the closed-form monopole geometry
Outcome fd_vs_analytic() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto s = ModelSpec::dirac3d_eff();
  double worst = 0.0;
  for (int i = 0; i < 20; ++i)
    for (int k = 0; k < 20; ++k) {
      const auto p = ParameterPoint::sphere2(kPi * (i + 0.5) / 20, 2 * kPi * (k + 0.5) / 20);
      const auto fd = fd_geometry(s, p, Gauge::analytic);
      const double st = std::sin(p[0]);
      for (std::size_t mu = 0; mu < 2; ++mu)
        for (std::size_t nu = 0; nu < 2; ++nu)
          for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t jp = 0; jp < 2; ++jp) {
              double g = 0.0;
              if (j == jp && mu == nu) g = mu == 0 ? 0.25 : 0.25 * st * st;
              cplx f = 0.0;
              if (mu != nu && j != jp) f = cplx(0, 0.5 * st) * (mu == 0 ? 1.0 : -1.0) * (j == 0 ? 1.0 : -1.0);
              worst = std::max(worst, std::abs(fd.metric(mu, nu, j, jp) - g));
              worst = std::max(worst, std::abs(fd.curvature(mu, nu, j, jp) - f));
            }
    }
  const double secs = elapsed(t0);
  return {worst <= 1e-6 && secs < 5.0, "max |fd - closed form| = " + fmt(worst, 3) + ", " + fmt(secs, 3) + " s"};
}

// 2. full quench metric at the equator
Outcome quench_components() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto s = ModelSpec::dirac3d_eff();
  const auto p = ParameterPoint::sphere2(kPi / 2, kPi / 4);
  QuenchProtocol proto;
  proto.delta_lambda = kPi / 100;
  proto.schedule = Schedule::linear(0.001);
  const auto m = measure_metric(s, p, all_components(2, 2), proto, Gauge::analytic);
  const double secs = elapsed(t0);
  double worst = 0.0;
  for (std::size_t mu = 0; mu < 2; ++mu)
    for (std::size_t nu = 0; nu < 2; ++nu)
      for (std::size_t j = 0; j < 2; ++j)
        for (std::size_t jp = 0; jp < 2; ++jp) {
          const double want = (mu == nu && j == jp) ? 0.25 : 0.0;  // sin(pi/2) = 1
          worst = std::max(worst, std::abs(m.estimate(mu, nu, j, jp) - want));
        }
  return {worst <= 2e-2 && secs < 1.0,
          std::to_string(m.runs.size()) + " runs, max entry error " + fmt(worst, 3) + ", " + fmt(secs, 3) + " s"};
}

// 3. real Chern number
Outcome real_chern() {
  const auto t0 = std::chrono::steady_clock::now();
  ChernOptions opt;
  opt.gauge = Gauge::analytic;
  opt.threads = hw_threads();
  const auto s = ModelSpec::dirac3d_eff();
  const auto oracle = real_chern_from_curvature(s, SphereGrid::s2(100, 100), GeometrySource::analytic, opt);
  opt.protocol.delta_lambda = kPi / 100;
  opt.protocol.schedule = Schedule::linear(0.001);
  const auto q = real_chern_from_metric(s, SphereGrid::s2(50, 50), GeometrySource::quench, opt);
  const double secs = elapsed(t0);
  const bool ok = std::abs(oracle.value - 1.0) <= 1e-3 && std::abs(q.value - 0.9899) <= 0.02 && q.mod2 == 1 &&
                  secs < 120.0;
  return {ok, "oracle " + fmt(oracle.value, 7) + ", quench " + fmt(q.value, 7) + " (reference 0.9899), mod2 " +
                  std::to_string(q.mod2.value_or(-1))};
}

// 4. second Chern number
Outcome second_chern() {
  const auto t0 = std::chrono::steady_clock::now();
  ChernOptions opt;
  opt.threads = hw_threads();
  const auto s = ModelSpec::yang_eff();
  const auto c12 = second_chern_from_curvature(s, SphereGrid::s4(12, 12, 12, 12), GeometrySource::analytic, opt);
  const auto c20 = second_chern_from_curvature(s, SphereGrid::s4(20, 20, 20, 40), GeometrySource::analytic, opt);
  const auto tq = std::chrono::steady_clock::now();
  opt.protocol.delta_lambda = kPi / 80;
  opt.protocol.schedule = Schedule::linear(0.001);
  SecondChernMetricOptions mopt;
  mopt.normalization = Normalization::oracle_calibrated;
  const auto q = second_chern_from_metric(s, SphereGrid::s4(12, 12, 12, 12), GeometrySource::quench, opt, mopt);
  const double qsecs = elapsed(tq), secs = elapsed(t0);
  const double limit = opt.threads >= 8 ? 180.0 : 900.0;
  const bool ok12 = std::abs(c12.value + 1.0) <= 2e-2, ok20 = std::abs(c20.value + 1.0) <= 1e-3;
  const bool okq = std::abs(q.value + 0.9627) <= 0.04, okt = secs < limit;
  auto mark = [](bool b) { return std::string(b ? " ok" : " OUT OF TOLERANCE"); };
  return {ok12 && ok20 && okq && okt,
          "curvature 12^4 " + fmt(c12.value, 7) + mark(ok12) + ", 20x20x20x40 " + fmt(c20.value, 7) + mark(ok20) +
              ", quench " + fmt(q.value, 7) + mark(okq) + " (reference -0.9627, printed normalization " +
              fmt(q.value_paper_printed.value_or(0.0), 7) + "), quench " + fmt(qsecs, 3) + " s on " +
              std::to_string(opt.threads) + " thread(s)" + mark(okt)};
}

// 5. determinant relations and the metric-form normalization
Outcome det_relations() {
  std::mt19937_64 rng(515);
  std::uniform_real_distribution<double> th(0.1, kPi - 0.1), ph(0.1, 2 * kPi - 0.1);
  double worst_an = 0.0, worst_fd = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto s = ModelSpec::dirac3d_eff(i % 2 ? -1 : 1);
    const auto p = ParameterPoint::sphere2(th(rng), ph(rng));
    const auto an = analytic_reference(s, p);
    const auto ra = det_relation_check(an.metric, an.curvature);
    worst_an = std::max({worst_an, std::abs(ra.band12), std::abs(ra.band21)});
    const auto fd = fd_geometry(s, p, Gauge::analytic);
    const auto rf = det_relation_check(fd.metric, fd.curvature);
    worst_fd = std::max({worst_fd, std::abs(rf.band12), std::abs(rf.band21)});
  }
  ChernOptions opt;
  opt.threads = hw_threads();
  const auto chk = sqrt_detG_vs_F_check(ModelSpec::yang_eff(), random_s4_points(100, 2024), opt);
  const auto grid = SphereGrid::s4(12, 12, 12, 12);
  const auto curv = second_chern_from_curvature(ModelSpec::yang_eff(), grid, GeometrySource::analytic, opt);
  const auto met = second_chern_from_metric(ModelSpec::yang_eff(), grid, GeometrySource::fd, opt);
  const bool ok = worst_an <= 1e-12 && worst_fd <= 1e-5 && chk.ratio_spread <= 1e-6 &&
                  std::abs(met.value - curv.value) <= 2e-2;
  return {ok, "analytic " + fmt(worst_an, 3) + ", fd " + fmt(worst_fd, 3) + ", |calF|/sqrt(detG) = " +
                  fmt(chk.ratio_mean, 9) + " spread " + fmt(chk.ratio_spread, 3) + ", calibrated metric " +
                  fmt(met.value, 7) + " vs curvature " + fmt(curv.value, 7) + " (ratio to printed constant " +
                  fmt(met.calibration_ratio.value_or(0.0), 9) + ")"};
}

// 6. convergence of the quench real Chern number
Outcome convergence() {
  const auto s = ModelSpec::dirac3d_eff();
  const auto grid = SphereGrid::s2(50, 50);
  ChernOptions opt;
  opt.gauge = Gauge::analytic;
  opt.threads = hw_threads();
  auto dev = [&](double T, double dl) {
    opt.protocol.delta_lambda = dl;
    opt.protocol.schedule = Schedule::linear(T);
    return std::abs(real_chern_from_metric(s, grid, GeometrySource::quench, opt).value - 1.0);
  };
  std::vector<double> t_dev, dl_dev;
  for (double T : {0.05, 0.01, 0.001}) t_dev.push_back(dev(T, kPi / 100));
  for (double dl : {kPi / 20, kPi / 50, kPi / 100}) dl_dev.push_back(dev(0.001, dl));
  const bool ok = non_increasing(t_dev) && non_increasing(dl_dev);
  auto list = [](const std::vector<double>& v) {
    std::string out;
    for (double x : v) out += (out.empty() ? "" : ", ") + fmt(x, 3);
    return "{" + out + "}";
  };
  return {ok, "|C_R - 1| over T " + list(t_dev) + ", over step " + list(dl_dev)};
}

// 7. property suite
Outcome property_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  ValidateOptions o;
  o.quick = false;
  o.threads = hw_threads();
  const auto report = run_validation(o);
  const double secs = elapsed(t0);
  std::string failed;
  for (const auto& f : report.failures()) failed += " " + f;
  return {report.passed() && secs < 120.0,
          std::to_string(report.checks.size()) + " checks" + (failed.empty() ? "" : ", failed:" + failed) + ", " +
              fmt(secs, 3) + " s"};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 8. byte-identical outputs across worker counts
Outcome reproducibility() {
  const fs::path root = fs::temp_directory_path() / "qmetric_acceptance_repro";
  fs::remove_all(root);
  const std::vector<std::pair<std::string, json>> runs = {
      {"chern.json", json::parse(R"({"chern": {"invariant": "real", "method": "metric", "source": "quench",
                                              "grid": [20, 20]}})")},
      {"chern.json", json::parse(R"({"chern": {"invariant": "second", "method": "metric", "source": "fd",
                                              "grid": [6, 6, 6, 6], "calibration_grid": [6, 6, 6, 6]}})")},
      {"metric.csv", json::parse(R"({"metric": {"preset": "fig-3b", "points": 8}})")},
      {"sweep.csv", json::parse(R"({"chern": {"grid": [10, 10]}})")},
  };
  std::size_t compared = 0;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    std::vector<std::string> outputs;
    std::vector<std::string> ids;
    for (int t : {1, 4, 8}) {
      json patch = runs[r].second;
      patch["threads"] = t;
      patch["out"] = (root / ("t" + std::to_string(t))).string();
      const RunConfig cfg = resolve_config(std::nullopt, patch);
      RunOutput out = runs[r].first == "metric.csv"  ? cmd_metric(cfg)
                      : runs[r].first == "sweep.csv" ? cmd_sweep(cfg)
                                                     : cmd_chern(cfg);
      const fs::path dir = out.commit();
      outputs.push_back(read_file(dir / runs[r].first));
      ids.push_back(out.id());
    }
    if (outputs[0].empty() || outputs[0] != outputs[1] || outputs[0] != outputs[2] || ids[0] != ids[1] ||
        ids[0] != ids[2])
      return {false, runs[r].first + " differs across 1/4/8 threads (run " + std::to_string(r) + ")"};
    ++compared;
  }
  fs::remove_all(root);
  return {true, std::to_string(compared) + " runs byte-identical at 1, 4 and 8 threads"};
}

// lattice-4d presets: quench against the finite-difference oracle
Outcome lattice_presets() {
  double worst = 0.0;
  std::string detail;
  for (const char* name : {"fig-3a", "fig-3b", "fig-3c", "fig-3d"}) {
    json patch;
    patch["metric"]["preset"] = name;
    patch["threads"] = hw_threads();
    const RunOutput out = cmd_metric(resolve_config(std::nullopt, patch));
    const double err = out.manifest()["headline"]["max_abs_error"].get<double>();
    worst = std::max(worst, err);
    detail += std::string(detail.empty() ? "" : ", ") + name + " " + fmt(err, 3);
  }
  return {worst <= 2e-2, "max |quench - oracle|: " + detail};
}

}  // namespace

int main() {
  std::cout << "acceptance run on " << hw_threads() << " hardware thread(s)" << std::endl;
  criterion("criterion-1 fd-vs-analytic", fd_vs_analytic);
  criterion("criterion-2 quench-components", quench_components);
  criterion("criterion-3 real-chern", real_chern);
  criterion("criterion-4 second-chern", second_chern);
  criterion("criterion-5 determinant-relations", det_relations);
  criterion("criterion-6 convergence-trends", convergence);
  criterion("criterion-7 property-suite", property_suite);
  criterion("criterion-8 reproducibility", reproducibility);
  criterion("lattice-4d-self-consistency", lattice_presets);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criterion/criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
