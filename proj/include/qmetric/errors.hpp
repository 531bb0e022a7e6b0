#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qmetric {

// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller broke a documented precondition (non-Hermitian input, bad sizes, ...).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::size_t iterations)
      : Error(what + " (after " + std::to_string(iterations) + " sweeps)"),
        iterations_(iterations) {}
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  std::size_t iterations_;
};

// The overlap between two frames (or a reference frame and a subspace) is
// too close to rank deficient to define a smooth gauge.
class GaugeSingularity : public Error {
 public:
  GaugeSingularity(const std::string& what, double sigma_min)
      : Error(what + " (sigma_min=" + std::to_string(sigma_min) + ")"),
        sigma_min_(sigma_min) {}
  double sigma_min() const noexcept { return sigma_min_; }

 private:
  double sigma_min_;
};

class ChartMismatch : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

// Ground and excited clusters touch: the point is (numerically) a monopole.
class GapCollapse : public Error {
 public:
  GapCollapse(const std::string& what, double gap)
      : Error(what + " (gap=" + std::to_string(gap) + ")"), gap_(gap) {}
  double gap() const noexcept { return gap_; }

 private:
  double gap_;
};

class ClusterMismatch : public Error {
 public:
  using Error::Error;
};

class SingularNormalization : public Error {
 public:
  using Error::Error;
};

// Numerical-quality failure of an integration (too many clamped nodes, grid
// too coarse, ...).
class QualityError : public Error {
 public:
  using Error::Error;
};

}  // namespace qmetric
