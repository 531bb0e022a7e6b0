#pragma once

// Dense complex linear algebra for the small operators used throughout the
// library: Hermitian eigendecomposition (cyclic Jacobi), unitary propagators
// and gauge alignment of degenerate frames.
//
// Two matrix types share the algorithms through the SquareComplexMatrix
// concept: Matrix<N> (compile-time size, used for Hilbert-space operators)
// and DenseMatrix (run-time size, used for N x N band blocks).

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "qmetric/errors.hpp"

namespace qmetric {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr cplx kI{0.0, 1.0};

template <std::size_t N>
using Vector = std::array<cplx, N>;

template <std::size_t N>
class Matrix {
 public:
  using RealArray = std::array<double, N>;
  using Column = Vector<N>;

  constexpr Matrix() : a_{} {}

  static constexpr std::size_t dim() noexcept { return N; }

  static Matrix zeros(std::size_t n = N) {
    check_dim(n);
    return Matrix{};
  }
  static Matrix identity(std::size_t n = N) {
    check_dim(n);
    Matrix m;
    for (std::size_t i = 0; i < N; ++i) m(i, i) = 1.0;
    return m;
  }
  static RealArray make_real_array(std::size_t n = N) {
    check_dim(n);
    return RealArray{};
  }
  static Column make_column(std::size_t n = N) {
    check_dim(n);
    return Column{};
  }

  cplx& operator()(std::size_t r, std::size_t c) noexcept { return a_[r * N + c]; }
  const cplx& operator()(std::size_t r, std::size_t c) const noexcept { return a_[r * N + c]; }

  Matrix& operator+=(const Matrix& o) noexcept {
    for (std::size_t i = 0; i < N * N; ++i) a_[i] += o.a_[i];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) noexcept {
    for (std::size_t i = 0; i < N * N; ++i) a_[i] -= o.a_[i];
    return *this;
  }
  Matrix& operator*=(cplx s) noexcept {
    for (auto& x : a_) x *= s;
    return *this;
  }
  friend Matrix operator+(Matrix a, const Matrix& b) noexcept { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) noexcept { return a -= b; }
  friend Matrix operator*(Matrix a, cplx s) noexcept { return a *= s; }
  friend Matrix operator*(cplx s, Matrix a) noexcept { return a *= s; }
  friend Matrix operator*(const Matrix& a, const Matrix& b) noexcept {
    Matrix c;
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t k = 0; k < N; ++k) {
        const cplx aik = a(i, k);
        for (std::size_t j = 0; j < N; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }
  friend bool operator==(const Matrix&, const Matrix&) = default;

  std::span<const cplx> data() const noexcept { return a_; }

 private:
  static void check_dim(std::size_t n) {
    if (n != N) throw ContractViolation("fixed-size matrix constructed with mismatched dimension");
  }
  std::array<cplx, N * N> a_;
};

// Run-time sized square matrix.
class DenseMatrix {
 public:
  using RealArray = std::vector<double>;
  using Column = std::vector<cplx>;

  DenseMatrix() = default;
  explicit DenseMatrix(std::size_t n) : n_(n), a_(n * n) {}

  std::size_t dim() const noexcept { return n_; }

  static DenseMatrix zeros(std::size_t n) { return DenseMatrix(n); }
  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
  static RealArray make_real_array(std::size_t n) { return RealArray(n); }
  static Column make_column(std::size_t n) { return Column(n); }

  cplx& operator()(std::size_t r, std::size_t c) noexcept { return a_[r * n_ + c]; }
  const cplx& operator()(std::size_t r, std::size_t c) const noexcept { return a_[r * n_ + c]; }

  DenseMatrix& operator+=(const DenseMatrix& o) {
    same_dim(o);
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
    return *this;
  }
  DenseMatrix& operator-=(const DenseMatrix& o) {
    same_dim(o);
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
    return *this;
  }
  DenseMatrix& operator*=(cplx s) noexcept {
    for (auto& x : a_) x *= s;
    return *this;
  }
  friend DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b) { return a += b; }
  friend DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b) { return a -= b; }
  friend DenseMatrix operator*(DenseMatrix a, cplx s) { return a *= s; }
  friend DenseMatrix operator*(cplx s, DenseMatrix a) { return a *= s; }
  friend DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
    a.same_dim(b);
    DenseMatrix c(a.n_);
    for (std::size_t i = 0; i < a.n_; ++i)
      for (std::size_t k = 0; k < a.n_; ++k) {
        const cplx aik = a(i, k);
        for (std::size_t j = 0; j < a.n_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }
  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

  std::span<const cplx> data() const noexcept { return a_; }

 private:
  void same_dim(const DenseMatrix& o) const {
    if (o.n_ != n_) throw ContractViolation("dense matrix dimension mismatch");
  }
  std::size_t n_ = 0;
  std::vector<cplx> a_;
};

template <class M>
concept SquareComplexMatrix = requires(M m, const M cm, std::size_t i) {
  { cm.dim() } -> std::convertible_to<std::size_t>;
  { m(i, i) } -> std::same_as<cplx&>;
  { cm(i, i) } -> std::same_as<const cplx&>;
  { M::zeros(i) } -> std::same_as<M>;
  { M::identity(i) } -> std::same_as<M>;
  { M::make_real_array(i) };
  { M::make_column(i) };
};

// ---------------------------------------------------------------------------
// elementwise helpers

template <SquareComplexMatrix M>
M adjoint(const M& a) {
  const std::size_t n = a.dim();
  M r = M::zeros(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) r(i, j) = std::conj(a(j, i));
  return r;
}

template <SquareComplexMatrix M>
M conjugate(const M& a) {
  const std::size_t n = a.dim();
  M r = M::zeros(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) r(i, j) = std::conj(a(i, j));
  return r;
}

template <SquareComplexMatrix M>
double max_abs(const M& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j) m = std::max(m, std::abs(a(i, j)));
  return m;
}

template <SquareComplexMatrix M>
double max_abs_diff(const M& a, const M& b) {
  if (a.dim() != b.dim()) throw ContractViolation("max_abs_diff: dimension mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
  return m;
}

template <SquareComplexMatrix M>
double frobenius_norm(const M& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j) s += std::norm(a(i, j));
  return std::sqrt(s);
}

template <SquareComplexMatrix M>
cplx trace(const M& a) {
  cplx t = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) t += a(i, i);
  return t;
}

template <SquareComplexMatrix M>
bool all_finite(const M& a) {
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j)
      if (!std::isfinite(a(i, j).real()) || !std::isfinite(a(i, j).imag())) return false;
  return true;
}

// max|A - A^dagger|
template <SquareComplexMatrix M>
double hermiticity_residual(const M& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = i; j < a.dim(); ++j) m = std::max(m, std::abs(a(i, j) - std::conj(a(j, i))));
  return m;
}

template <SquareComplexMatrix M>
bool is_hermitian(const M& a) {
  return all_finite(a) && hermiticity_residual(a) <= 1e-12 * std::max(1.0, max_abs(a));
}

template <SquareComplexMatrix M>
M commutator(const M& a, const M& b) {
  return a * b - b * a;
}

template <SquareComplexMatrix M>
M anticommutator(const M& a, const M& b) {
  return a * b + b * a;
}

// ---------------------------------------------------------------------------
// vectors and frames

template <class V>
cplx inner(const V& a, const V& b) noexcept {
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

template <class V>
double norm(const V& a) noexcept {
  double s = 0.0;
  for (const auto& x : a) s += std::norm(x);
  return std::sqrt(s);
}

template <std::size_t N>
Vector<N> operator*(const Matrix<N>& a, const Vector<N>& v) noexcept {
  Vector<N> r{};
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) r[i] += a(i, j) * v[j];
  return r;
}

template <std::size_t N>
Vector<N> axpy(cplx alpha, const Vector<N>& x, Vector<N> y) noexcept {
  for (std::size_t i = 0; i < N; ++i) y[i] += alpha * x[i];
  return y;
}

template <std::size_t N>
using Frame = std::vector<Vector<N>>;

template <SquareComplexMatrix M>
typename M::Column column(const M& a, std::size_t k) {
  auto c = M::make_column(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) c[i] = a(i, k);
  return c;
}

// G_{jk} = <a_j|b_k>
template <std::size_t N>
DenseMatrix overlap(const Frame<N>& a, const Frame<N>& b) {
  if (a.size() != b.size()) throw ContractViolation("overlap: frames differ in size");
  DenseMatrix w(a.size());
  for (std::size_t j = 0; j < a.size(); ++j)
    for (std::size_t k = 0; k < b.size(); ++k) w(j, k) = inner(a[j], b[k]);
  return w;
}

// Frame times a small coefficient matrix: out_k = sum_j in_j c(j,k).
template <std::size_t N>
Frame<N> combine(const Frame<N>& in, const DenseMatrix& c) {
  if (c.dim() != in.size()) throw ContractViolation("combine: coefficient size mismatch");
  Frame<N> out(in.size(), Vector<N>{});
  for (std::size_t k = 0; k < in.size(); ++k)
    for (std::size_t j = 0; j < in.size(); ++j) out[k] = axpy(c(j, k), in[j], out[k]);
  return out;
}

template <std::size_t N>
double orthonormality_residual(const Frame<N>& f) {
  const DenseMatrix g = overlap(f, f);
  return max_abs_diff(g, DenseMatrix::identity(f.size()));
}

// ---------------------------------------------------------------------------
// eigendecomposition

template <SquareComplexMatrix M>
struct SpectralDecomposition {
  typename M::RealArray eigenvalues;  // ascending
  M eigenvectors;                      // column k pairs with eigenvalues[k]
};

namespace detail {

template <SquareComplexMatrix M>
double off_diagonal_norm(const M& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j)
      if (i != j) s += std::norm(a(i, j));
  return std::sqrt(s);
}

// One complex Jacobi rotation annihilating a(p,q). The unitary is
// U = diag(1, e^{-i alpha}) R restricted to (p,q), R the real Jacobi rotation
// of the phase-stripped pair; a <- U^dagger a U and v <- v U.
template <SquareComplexMatrix M>
void jacobi_rotate(M& a, M& v, std::size_t p, std::size_t q) {
  const cplx apq = a(p, q);
  const double r = std::abs(apq);
  if (r == 0.0) return;
  const cplx ph = apq / r;
  const cplx phc = std::conj(ph);
  const double app = a(p, p).real();
  const double aqq = a(q, q).real();
  const double zeta = (aqq - app) / (2.0 * r);
  double t;
  if (std::abs(zeta) > 1e150) {
    t = 0.5 / zeta;
  } else {
    t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
  }
  const double c = 1.0 / std::sqrt(1.0 + t * t);
  const double s = t * c;
  const std::size_t n = a.dim();

  for (std::size_t k = 0; k < n; ++k) {
    const cplx akp = a(k, p), akq = a(k, q);
    a(k, p) = c * akp - s * phc * akq;
    a(k, q) = s * akp + c * phc * akq;
  }
  for (std::size_t k = 0; k < n; ++k) {
    const cplx apk = a(p, k), aqk = a(q, k);
    a(p, k) = c * apk - s * ph * aqk;
    a(q, k) = s * apk + c * ph * aqk;
  }
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  a(p, p) = app - t * r;
  a(q, q) = aqq + t * r;
  for (std::size_t k = 0; k < n; ++k) {
    const cplx vkp = v(k, p), vkq = v(k, q);
    v(k, p) = c * vkp - s * phc * vkq;
    v(k, q) = s * vkp + c * phc * vkq;
  }
}

}  // namespace detail

inline constexpr std::size_t kJacobiMaxSweeps = 100;
inline constexpr double kJacobiTolerance = 1e-14;

template <SquareComplexMatrix M>
void require_hermitian(const M& h, const char* who) {
  if (!all_finite(h)) throw ContractViolation(std::string(who) + ": non-finite matrix entry");
  if (!is_hermitian(h)) throw ContractViolation(std::string(who) + ": matrix is not Hermitian");
}

// Cyclic Jacobi eigensolver. Eigenvalues ascending (stable with respect to
// the diagonal order on ties); the basis inside a degenerate cluster is
// whatever the rotations produce.
template <SquareComplexMatrix M>
SpectralDecomposition<M> hermitian_eig(const M& h) {
  require_hermitian(h, "hermitian_eig");
  const std::size_t n = h.dim();
  M a = h;
  M v = M::identity(n);
  for (std::size_t i = 0; i < n; ++i) a(i, i) = a(i, i).real();

  const double tol = kJacobiTolerance * frobenius_norm(h);
  std::size_t sweep = 0;
  while (detail::off_diagonal_norm(a) > tol) {
    if (sweep == kJacobiMaxSweeps) throw ConvergenceError("hermitian_eig: Jacobi did not converge", sweep);
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) detail::jacobi_rotate(a, v, p, q);
    ++sweep;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x).real() < a(y, y).real(); });

  SpectralDecomposition<M> out{M::make_real_array(n), M::zeros(n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.eigenvalues[k] = a(order[k], order[k]).real();
    for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, k) = v(i, order[k]);
  }
  return out;
}

// f(H) = V diag(f(E)) V^dagger
template <SquareComplexMatrix M, class F>
M spectral_apply(const SpectralDecomposition<M>& sd, F&& f) {
  const std::size_t n = sd.eigenvectors.dim();
  M r = M::zeros(n);
  for (std::size_t k = 0; k < n; ++k) {
    const cplx fk = f(sd.eigenvalues[k]);
    for (std::size_t i = 0; i < n; ++i) {
      const cplx vik = sd.eigenvectors(i, k) * fk;
      for (std::size_t j = 0; j < n; ++j) r(i, j) += vik * std::conj(sd.eigenvectors(j, k));
    }
  }
  return r;
}

// exp(-i H dt), hbar = 1.
template <SquareComplexMatrix M>
M unitary_exp(const M& h, double dt) {
  if (!std::isfinite(dt)) throw ContractViolation("unitary_exp: non-finite time step");
  const auto sd = hermitian_eig(h);
  return spectral_apply(sd, [dt](double e) { return std::polar(1.0, -e * dt); });
}

// exp(-i H dt) v without forming the propagator.
template <std::size_t N>
Vector<N> apply_unitary_exp(const Matrix<N>& h, double dt, const Vector<N>& v) {
  if (!std::isfinite(dt)) throw ContractViolation("apply_unitary_exp: non-finite time step");
  const auto sd = hermitian_eig(h);
  Vector<N> out{};
  for (std::size_t k = 0; k < N; ++k) {
    cplx proj = 0.0;
    for (std::size_t i = 0; i < N; ++i) proj += std::conj(sd.eigenvectors(i, k)) * v[i];
    proj *= std::polar(1.0, -sd.eigenvalues[k] * dt);
    for (std::size_t i = 0; i < N; ++i) out[i] += sd.eigenvectors(i, k) * proj;
  }
  return out;
}

// ---------------------------------------------------------------------------
// gauge alignment

struct PolarFactor {
  DenseMatrix unitary;
  double sigma_min;
};

// Unitary polar factor of a square matrix, W = U_p P with P = (W^dagger W)^{1/2}.
inline PolarFactor polar_unitary(const DenseMatrix& w) {
  const std::size_t n = w.dim();
  const auto sd = hermitian_eig(adjoint(w) * w);
  const double lmin = std::max(0.0, sd.eigenvalues.front());
  const double sigma_min = std::sqrt(lmin);
  if (sigma_min <= 0.0) return {DenseMatrix::identity(n), 0.0};
  const DenseMatrix inv_sqrt = spectral_apply(sd, [](double l) { return cplx(1.0 / std::sqrt(l)); });
  return {w * inv_sqrt, sigma_min};
}

inline constexpr double kGaugeSigmaFloor = 1e-8;

// Rotates `basis` inside its span so that it is as close as possible (in
// Frobenius norm) to `reference`: returns basis * V with V = polar(W)^dagger,
// W_{jk} = <ref_j|basis_k>. Afterwards <ref_j|aligned_k> is Hermitian PSD.
template <std::size_t N>
Frame<N> subspace_align(const Frame<N>& basis, const Frame<N>& reference) {
  if (basis.size() != reference.size() || basis.empty())
    throw ContractViolation("subspace_align: frames must be non-empty and equally sized");
  const DenseMatrix w = overlap(reference, basis);
  const PolarFactor pf = polar_unitary(w);
  if (pf.sigma_min < kGaugeSigmaFloor)
    throw GaugeSingularity("subspace_align: overlap matrix is near singular", pf.sigma_min);
  return combine(basis, adjoint(pf.unitary));
}

// Symmetric (Loewdin) orthonormalization of a linearly independent frame.
template <std::size_t N>
Frame<N> lowdin_orthonormalize(const Frame<N>& f) {
  const DenseMatrix s = overlap(f, f);
  const auto sd = hermitian_eig(s);
  const double sigma_min = std::sqrt(std::max(0.0, sd.eigenvalues.front()));
  if (sigma_min < kGaugeSigmaFloor)
    throw GaugeSingularity("lowdin_orthonormalize: frame is near linearly dependent", sigma_min);
  const DenseMatrix inv_sqrt = spectral_apply(sd, [](double l) { return cplx(1.0 / std::sqrt(l)); });
  return combine(f, inv_sqrt);
}

}  // namespace qmetric
