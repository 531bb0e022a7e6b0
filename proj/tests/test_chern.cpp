#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qmetric/chern.hpp"

using namespace qmetric;

namespace {

// Midpoint-rule values of the closed-form integrands:
//   real Chern density  sin(theta)           -> (2 pi / 4 pi) sum sin
//   second Chern density -sign s1^3 s2^2 s3 / 2 over S4
double real_chern_midpoint(int nt) { return 0.5 * oracle::midpoint_sin_power(1, nt); }

double second_chern_midpoint(int n1, int n2, int n3, int sign) {
  return -sign * 3.0 / (4.0 * kPi * kPi) * 0.5 * 2.0 * kPi * oracle::midpoint_sin_power(3, n1) *
         oracle::midpoint_sin_power(2, n2) * oracle::midpoint_sin_power(1, n3);
}

}  // namespace

TEST(SphereGrid, NodesAndMeasure) {
  const auto g = SphereGrid::s2(4, 8);
  EXPECT_EQ(g.size(), 32u);
  EXPECT_DOUBLE_EQ(g.cell_measure(), (kPi / 4) * (2 * kPi / 8));
  // last angle fastest
  EXPECT_DOUBLE_EQ(g.node(1)[1], 1.5 * 2 * kPi / 8);
  EXPECT_DOUBLE_EQ(g.node(1)[0], 0.5 * kPi / 4);
  EXPECT_DOUBLE_EQ(g.node(8)[0], 1.5 * kPi / 4);
  EXPECT_EQ(g.label(), "4x8");
  const auto h = SphereGrid::s4(2, 3, 4, 5);
  EXPECT_EQ(h.size(), 120u);
  EXPECT_EQ(h.node(119).chart(), Chart::sphere_s4);
  EXPECT_THROW(SphereGrid::s2(0, 3), ContractViolation);
  EXPECT_THROW(SphereGrid(SphereKind::s4, {1, 2}), ContractViolation);
}

TEST(Names, SourceAndNormalizationRoundTrip) {
  for (auto s : {GeometrySource::analytic, GeometrySource::fd, GeometrySource::quench})
    EXPECT_EQ(parse_source(source_name(s)), s);
  for (auto n : {Normalization::paper_printed, Normalization::oracle_calibrated})
    EXPECT_EQ(parse_normalization(normalization_name(n)), n);
  EXPECT_THROW(parse_source("magic"), ContractViolation);
}

TEST(ChernResult, FinishRoundsAndFlags) {
  ChernResult r;
  r.value = -0.97;
  r.finish(true, 0.05);
  EXPECT_NEAR(r.deviation, 0.03, 1e-15);
  EXPECT_FALSE(r.coarse);
  EXPECT_EQ(r.mod2, 1);
  r.value = 1.9;
  r.finish(false, 0.05);
  EXPECT_TRUE(r.coarse);
  EXPECT_EQ(r.mod2, 1);  // untouched when not requested
  r.mod2.reset();
  r.value = 2.01;
  r.finish(true, 0.05);
  EXPECT_EQ(r.mod2, 0);
}

TEST(RealChern, AnalyticCurvatureMatchesMidpointOracle) {
  for (int n : {10, 40, 100}) {
    const auto r = real_chern_from_curvature(ModelSpec::dirac3d_eff(), SphereGrid::s2(n, n), GeometrySource::analytic);
    EXPECT_NEAR(r.value, real_chern_midpoint(n), 1e-12);
    EXPECT_EQ(r.method, "curvature-oracle");
    EXPECT_EQ(r.source, "analytic");
    EXPECT_FALSE(r.delta_lambda.has_value());
  }
  const auto r = real_chern_from_curvature(ModelSpec::dirac3d_eff(), SphereGrid::s2(100, 100), GeometrySource::analytic);
  EXPECT_NEAR(r.value, 1.0, 1e-3);
  EXPECT_EQ(r.mod2, 1);
}

TEST(RealChern, MonopoleAntisymmetry) {
  const auto g = SphereGrid::s2(30, 30);
  const auto p = real_chern_from_curvature(ModelSpec::dirac3d_eff(+1), g, GeometrySource::analytic);
  const auto m = real_chern_from_curvature(ModelSpec::dirac3d_eff(-1), g, GeometrySource::analytic);
  EXPECT_NEAR(p.value + m.value, 0.0, 1e-13);
  const auto fp = real_chern_from_curvature(ModelSpec::dirac3d_eff(+1), g, GeometrySource::fd);
  const auto fm = real_chern_from_curvature(ModelSpec::dirac3d_eff(-1), g, GeometrySource::fd);
  EXPECT_NEAR(fp.value + fm.value, 0.0, 1e-6);
}

TEST(RealChern, FiniteDifferenceAgreesWithAnalytic) {
  const auto g = SphereGrid::s2(30, 30);
  const auto an = real_chern_from_curvature(ModelSpec::dirac3d_eff(), g, GeometrySource::analytic);
  for (Gauge gauge : {Gauge::analytic, Gauge::reference_projection}) {
    ChernOptions opt;
    opt.gauge = gauge;
    EXPECT_NEAR(real_chern_from_curvature(ModelSpec::dirac3d_eff(), g, GeometrySource::fd, opt).value, an.value, 1e-6);
  }
}

TEST(RealChern, MetricFormMatchesCurvatureForm) {
  const auto g = SphereGrid::s2(40, 40);
  const auto an = real_chern_from_metric(ModelSpec::dirac3d_eff(), g, GeometrySource::analytic);
  EXPECT_NEAR(an.value, real_chern_midpoint(40), 1e-12);
  EXPECT_EQ(an.method, "metric-oracle");
  ChernOptions opt;
  opt.gauge = Gauge::analytic;
  EXPECT_NEAR(real_chern_from_metric(ModelSpec::dirac3d_eff(), g, GeometrySource::fd, opt).value, an.value, 1e-6);
}

TEST(RealChern, QuenchOnCoarseGridTracksOracle) {
  const auto g = SphereGrid::s2(10, 10);
  ChernOptions opt;
  opt.gauge = Gauge::analytic;
  const auto q = real_chern_from_metric(ModelSpec::dirac3d_eff(), g, GeometrySource::quench, opt);
  EXPECT_NEAR(q.value, real_chern_midpoint(10), 2e-3);
  EXPECT_EQ(q.method, "metric-quench");
  EXPECT_EQ(q.clamped_nodes, 0u);
  ASSERT_TRUE(q.delta_lambda.has_value());
  EXPECT_DOUBLE_EQ(*q.delta_lambda, kPi / 100);
  EXPECT_EQ(q.time_unit, std::optional<std::string>("two-pi"));
}

TEST(RealChern, ThreadCountDoesNotChangeBits) {
  const auto g = SphereGrid::s2(16, 16);
  ChernOptions opt;
  const double ref = real_chern_from_curvature(ModelSpec::dirac3d_eff(), g, GeometrySource::fd, opt).value;
  for (std::size_t t : {4u, 8u}) {
    opt.threads = t;
    EXPECT_EQ(real_chern_from_curvature(ModelSpec::dirac3d_eff(), g, GeometrySource::fd, opt).value, ref);
  }
}

TEST(RealChern, RejectsIncompatibleInput) {
  EXPECT_THROW(real_chern_from_curvature(ModelSpec::dirac3d_eff(), SphereGrid::s4(2, 2, 2, 2), GeometrySource::analytic),
               ContractViolation);
  EXPECT_THROW(real_chern_from_curvature(ModelSpec::yang_eff(), SphereGrid::s2(4, 4), GeometrySource::analytic),
               ContractViolation);
  EXPECT_THROW(real_chern_from_curvature(ModelSpec::dirac3d_eff(), SphereGrid::s2(4, 4), GeometrySource::quench),
               ContractViolation);
}

TEST(ClampBudget, ThrowsWhenExceeded) {
  EXPECT_NO_THROW(detail::enforce_clamp_budget(1, 100, 0.01));
  EXPECT_THROW(detail::enforce_clamp_budget(2, 100, 0.01), QualityError);
  EXPECT_TRUE(detail::clamped_sqrt(-1e-9).clamped);
  EXPECT_EQ(detail::clamped_sqrt(4.0).value, 2.0);
}

TEST(Determinant, MatchesCofactorExpansion) {
  oracle::Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    std::array<std::array<double, 3>, 3> a{};
    for (auto& r : a)
      for (auto& x : r) x = oracle::uniform(rng, -2, 2);
    const double want = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                        a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                        a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    EXPECT_NEAR(detail::determinant<3>(a), want, 1e-12);
  }
  EXPECT_EQ(detail::determinant<2>({{{1, 2}, {2, 4}}}), 0.0);
}

TEST(SecondChern, AnalyticCurvatureMatchesMidpointOracle) {
  for (int sign : {+1, -1}) {
    const auto r =
        second_chern_from_curvature(ModelSpec::yang_eff(sign), SphereGrid::s4(8, 8, 8, 8), GeometrySource::analytic);
    EXPECT_NEAR(r.value, second_chern_midpoint(8, 8, 8, sign), 1e-12);
    EXPECT_FALSE(r.mod2.has_value());
  }
}

TEST(SecondChern, FiniteDifferenceAgreesWithAnalytic) {
  const auto g = SphereGrid::s4(6, 6, 6, 6);
  const auto an = second_chern_from_curvature(ModelSpec::yang_eff(), g, GeometrySource::analytic);
  const auto fd = second_chern_from_curvature(ModelSpec::yang_eff(), g, GeometrySource::fd);
  EXPECT_NEAR(fd.value, an.value, 1e-6);
}

TEST(SecondChern, CalFIsFortyEightRootDetG) {
  const auto chk = sqrt_detG_vs_F_check(ModelSpec::yang_eff(), random_s4_points(100, 7));
  EXPECT_NEAR(chk.ratio_mean, 48.0, 1e-5);
  EXPECT_LT(chk.ratio_spread, 1e-6);
  EXPECT_LT(chk.max_relative_deviation, 1e-6);
  EXPECT_TRUE(chk.sign_constant);
  EXPECT_EQ(chk.signs.front(), -1);
  const auto neg = sqrt_detG_vs_F_check(ModelSpec::yang_eff(-1), random_s4_points(20, 7));
  EXPECT_TRUE(neg.sign_constant);
  EXPECT_EQ(neg.signs.front(), 1);
}

TEST(SecondChern, RootDetGHasClosedForm) {
  // G = diag(1, s1^2, s1^2 s2^2, s1^2 s2^2 s3^2) / 2
  for (const auto& p : random_s4_points(20, 3)) {
    const double s1 = std::sin(p[0]), s2 = std::sin(p[1]), s3 = std::sin(p[2]);
    EXPECT_NEAR(sqrt_det_g(analytic_reference(ModelSpec::yang_eff(), p).metric), s1 * s1 * s1 * s2 * s2 * s3 / 4,
                1e-15);
  }
}

TEST(SecondChern, CalibrationRatioIsOneHalf) {
  for (int n : {4, 8}) {
    const auto cal = calibrate_second_chern(SphereGrid::s4(n, n, n, n));
    EXPECT_NEAR(cal.ratio, 0.5, 1e-12);
    EXPECT_NEAR(cal.factor, 3.0 / (2.0 * kPi * kPi), 1e-12);
  }
}

TEST(SecondChern, MetricOracleMatchesCurvature) {
  const auto g = SphereGrid::s4(6, 6, 6, 6);
  SecondChernMetricOptions mopt;
  mopt.calibration_grid = SphereGrid::s4(6, 6, 6, 6);
  const auto curv = second_chern_from_curvature(ModelSpec::yang_eff(), g, GeometrySource::analytic);
  const auto met = second_chern_from_metric(ModelSpec::yang_eff(), g, GeometrySource::analytic, {}, mopt);
  EXPECT_NEAR(met.value, curv.value, 1e-12);
  EXPECT_NEAR(*met.value_paper_printed, 2.0 * curv.value, 1e-12);
  EXPECT_EQ(met.normalization, "oracle-calibrated");
  mopt.normalization = Normalization::paper_printed;
  const auto printed = second_chern_from_metric(ModelSpec::yang_eff(), g, GeometrySource::analytic, {}, mopt);
  EXPECT_EQ(printed.value, *printed.value_paper_printed);
}

TEST(SecondChern, QuenchMetricTracksOracleOnCoarseGrid) {
  const auto g = SphereGrid::s4(4, 4, 4, 4);
  SecondChernMetricOptions mopt;
  mopt.calibration_grid = g;
  ChernOptions opt;
  opt.protocol.delta_lambda = kPi / 80;
  opt.threads = 4;
  const auto oracle_value = second_chern_from_metric(ModelSpec::yang_eff(), g, GeometrySource::analytic, opt, mopt);
  const auto q = second_chern_from_metric(ModelSpec::yang_eff(), g, GeometrySource::quench, opt, mopt);
  EXPECT_NEAR(q.value, oracle_value.value, 1e-2);
  EXPECT_EQ(q.clamped_nodes, 0u);
}

TEST(SecondChern, RejectsIncompatibleInput) {
  EXPECT_THROW(second_chern_from_curvature(ModelSpec::dirac3d_eff(), SphereGrid::s4(2, 2, 2, 2), GeometrySource::analytic),
               ContractViolation);
  EXPECT_THROW(second_chern_from_curvature(ModelSpec::yang_eff(), SphereGrid::s2(2, 2), GeometrySource::analytic),
               ContractViolation);
  EXPECT_THROW(calF(analytic_reference(ModelSpec::yang_eff(), ParameterPoint::sphere4(1, 1, 1, 1)).curvature),
               ContractViolation);
}
