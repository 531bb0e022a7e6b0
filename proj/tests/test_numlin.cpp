#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qmetric/models.hpp"
#include "qmetric/numlin.hpp"

using namespace qmetric;

namespace {
using Frame4 = Frame<4>;

template <class M>
double max_diff(const M& a, const oracle::Mat& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j) d = std::max(d, std::abs(a(i, j) - b[i][j]));
  return d;
}

Matrix2 diag2(double a, double b) {
  Matrix2 m;
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

}  // namespace

TEST(HermitianEig, DiagonalInputIsSortedWithPermutedColumns) {
  const auto sd = hermitian_eig(diag2(2.0, -1.0));
  EXPECT_EQ(sd.eigenvalues[0], -1.0);
  EXPECT_EQ(sd.eigenvalues[1], 2.0);
  EXPECT_NEAR(std::abs(sd.eigenvectors(1, 0)), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(sd.eigenvectors(0, 1)), 1.0, 1e-15);
  EXPECT_EQ(std::abs(sd.eigenvectors(0, 0)), 0.0);
}

TEST(HermitianEig, ZeroMatrixGivesIdentityColumns) {
  const auto sd = hermitian_eig(Matrix4{});
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(sd.eigenvalues[k], 0.0);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(sd.eigenvectors(i, k), i == k ? cplx(1.0) : cplx(0.0));
  }
}

TEST(HermitianEig, AlphaXIsDoublyDegenerateAtPlusMinusOne) {
  const Matrix4& ax = alpha_matrices()[0];
  const auto sd = hermitian_eig(ax);
  const double want[4] = {-1, -1, 1, 1};
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(sd.eigenvalues[k], want[k], 1e-14);

  // characteristic polynomial: +-1 are double roots
  const auto c = oracle::char_poly(oracle::to_mat(ax));
  for (double x : {-1.0, 1.0}) {
    EXPECT_NEAR(std::abs(oracle::poly_eval(c, x)), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(oracle::poly_derivative(c, x)), 0.0, 1e-12);
  }
}

TEST(HermitianEig, RandomMatricesReconstructAndSatisfyResiduals) {
  oracle::Rng rng(11);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + static_cast<std::size_t>(t) % 8;
    const DenseMatrix h = oracle::random_hermitian(rng, n);
    const auto sd = hermitian_eig(h);
    DenseMatrix d(n);
    for (std::size_t k = 0; k < n; ++k) d(k, k) = sd.eigenvalues[k];
    EXPECT_LE(max_abs_diff(sd.eigenvectors * d * adjoint(sd.eigenvectors), h), 1e-10);
    EXPECT_LE(max_abs_diff(adjoint(sd.eigenvectors) * sd.eigenvectors, DenseMatrix::identity(n)), 1e-12);
    for (std::size_t k = 0; k + 1 < n; ++k) EXPECT_LE(sd.eigenvalues[k], sd.eigenvalues[k + 1]);
    // eigenvalues are roots of the characteristic polynomial
    const auto c = oracle::char_poly(oracle::to_mat(h));
    double scale = 0.0;
    for (const auto& x : c) scale = std::max(scale, std::abs(x));
    for (std::size_t k = 0; k < n; ++k) {
      Vector<8> v{}, hv{};
      for (std::size_t i = 0; i < n; ++i) v[i] = sd.eigenvectors(i, k);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) hv[i] += h(i, j) * v[j];
      double res = 0.0;
      for (std::size_t i = 0; i < n; ++i) res += std::norm(hv[i] - sd.eigenvalues[k] * v[i]);
      EXPECT_LE(std::sqrt(res), 1e-10 * (1.0 + std::abs(sd.eigenvalues[k])));
    }
  }
}

TEST(HermitianEig, IsBitwiseDeterministic) {
  oracle::Rng rng(5);
  const DenseMatrix h = oracle::random_hermitian(rng, 6);
  const auto a = hermitian_eig(h);
  const auto b = hermitian_eig(h);
  EXPECT_EQ(a.eigenvalues, b.eigenvalues);
  EXPECT_TRUE(a.eigenvectors == b.eigenvectors);
}

TEST(HermitianEig, RejectsNonHermitianInput) {
  Matrix2 m;
  m(0, 1) = 1.0;
  EXPECT_THROW(hermitian_eig(m), ContractViolation);
}

TEST(HermitianEig, HermitianToleranceScalesWithNorm) {
  Matrix2 m = diag2(1e6, -1e6);
  m(0, 1) = cplx(1.0, 0.0);
  m(1, 0) = cplx(1.0, 5e-7);  // 5e-7 <= 1e-12 * 1e6
  EXPECT_TRUE(is_hermitian(m));
  m(1, 0) = cplx(1.0, 5e-6);
  EXPECT_FALSE(is_hermitian(m));
}

TEST(UnitaryExp, TrivialCases) {
  EXPECT_LE(max_abs_diff(unitary_exp(Matrix4{}, 0.5), Matrix4::identity()), 0.0);
  EXPECT_LE(max_abs_diff(unitary_exp(diag2(1.0, -1.0), kPi), Matrix2::identity() * cplx(-1.0)), 1e-15);
}

TEST(UnitaryExp, MatchesTaylorSeries) {
  const Matrix4& az = alpha_matrices()[2];
  EXPECT_LE(max_diff(unitary_exp(az, 0.01), oracle::taylor_exp(oracle::to_mat(az), 0.01)), 1e-14);
  oracle::Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const DenseMatrix h = oracle::random_hermitian(rng, 4);
    EXPECT_LE(max_diff(unitary_exp(h, 0.05), oracle::taylor_exp(oracle::to_mat(h), 0.05, 30)), 1e-13);
  }
}

TEST(UnitaryExp, GroupPropertyAndUnitarity) {
  oracle::Rng rng(17);
  for (int t = 0; t < 50; ++t) {
    const DenseMatrix h = oracle::random_hermitian(rng, 1 + t % 6);
    const double a = oracle::uniform(rng, -3, 3), b = oracle::uniform(rng, -3, 3);
    const DenseMatrix u = unitary_exp(h, a);
    EXPECT_LE(max_abs_diff(u * unitary_exp(h, b), unitary_exp(h, a + b)), 1e-11);
    EXPECT_LE(max_abs_diff(adjoint(u) * u, DenseMatrix::identity(h.dim())), 1e-12);
  }
}

TEST(UnitaryExp, ApplyToVectorAgreesWithMatrix) {
  oracle::Rng rng(23);
  for (int t = 0; t < 20; ++t) {
    Matrix4 h;
    const DenseMatrix d = oracle::random_hermitian(rng, 4);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) h(i, j) = d(i, j);
    Vector4 v{cplx(oracle::uniform(rng, -1, 1)), cplx(0, 1), 0.5, -0.25};
    const Vector4 a = apply_unitary_exp(h, 0.7, v);
    const Vector4 b = unitary_exp(h, 0.7) * v;
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(std::abs(a[i] - b[i]), 0.0, 1e-13);
  }
  EXPECT_THROW(apply_unitary_exp(Matrix4{}, std::nan(""), Vector4{}), ContractViolation);
}

namespace {

Frame4 random_frame(oracle::Rng& rng, std::size_t n) {
  std::normal_distribution<double> g;
  Frame4 f(n);
  for (auto& v : f)
    for (auto& x : v) x = {g(rng), g(rng)};
  return lowdin_orthonormalize(f);
}

Frame4 rotate(const Frame4& f, const DenseMatrix& u) {
  Frame4 out(f.size());
  for (std::size_t k = 0; k < f.size(); ++k)
    for (std::size_t j = 0; j < f.size(); ++j) out[k] = axpy(u(j, k), f[j], out[k]);
  return out;
}

double frame_diff(const Frame4& a, const Frame4& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    for (std::size_t i = 0; i < 4; ++i) d = std::max(d, std::abs(a[k][i] - b[k][i]));
  return d;
}

}  // namespace

TEST(SubspaceAlign, IdentityAndPermutation) {
  oracle::Rng rng(1);
  const Frame4 ref = random_frame(rng, 2);
  EXPECT_LE(frame_diff(subspace_align(ref, ref), ref), 1e-14);
  const Frame4 swapped{ref[1], ref[0]};
  EXPECT_LE(frame_diff(subspace_align(swapped, ref), ref), 1e-12);
}

TEST(SubspaceAlign, RecoversHermitianPositiveOverlapAfterRandomRotation) {
  oracle::Rng rng(2);
  for (int t = 0; t < 50; ++t) {
    const Frame4 ref = random_frame(rng, 2);
    const Frame4 other = random_frame(rng, 2);
    // a generic nearby subspace: mix a little of another frame in
    Frame4 mixed = ref;
    for (std::size_t k = 0; k < 2; ++k) mixed[k] = axpy(cplx(0.3), other[k], mixed[k]);
    mixed = lowdin_orthonormalize(mixed);
    const Frame4 basis = rotate(mixed, unitary_exp(oracle::random_hermitian(rng, 2), 1.3));
    const Frame4 aligned = subspace_align(basis, ref);
    EXPECT_LE(orthonormality_residual(aligned), 1e-12);
    const DenseMatrix w = overlap(ref, aligned);
    EXPECT_LE(hermiticity_residual(w), 1e-12);
    EXPECT_GT(hermitian_eig((w + adjoint(w)) * cplx(0.5)).eigenvalues.front(), 0.0);
    // same span: projector onto the span is unchanged
    const DenseMatrix pa = overlap(aligned, basis);
    EXPECT_LE(max_abs_diff(adjoint(pa) * pa, DenseMatrix::identity(2)), 1e-12);
    // idempotent
    EXPECT_LE(frame_diff(subspace_align(aligned, ref), aligned), 1e-12);
  }
}

TEST(SubspaceAlign, OrthogonalSubspaceIsSingular) {
  Frame4 a{{1, 0, 0, 0}, {0, 1, 0, 0}};
  Frame4 b{{0, 0, 1, 0}, {0, 0, 0, 1}};
  try {
    subspace_align(b, a);
    FAIL() << "expected a gauge singularity";
  } catch (const GaugeSingularity& e) {
    EXPECT_LT(e.sigma_min(), 1e-8);
  }
  EXPECT_THROW(subspace_align(Frame4{a[0]}, a), ContractViolation);
}
