#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace evplane {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition (shape, orthogonality, ordering...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class SingularMatrix : public Error {
 public:
  SingularMatrix(std::size_t pivot_index, double pivot)
      : Error("singular matrix: pivot " + std::to_string(pivot_index) +
              " has magnitude " + std::to_string(pivot)),
        pivot_index_(pivot_index) {}

  std::size_t pivot_index() const noexcept { return pivot_index_; }

 private:
  std::size_t pivot_index_;
};

class NotPositiveDefinite : public InvalidArgument {
 public:
  explicit NotPositiveDefinite(double smallest_eigenvalue)
      : InvalidArgument("matrix is not positive definite: smallest eigenvalue " +
                        std::to_string(smallest_eigenvalue)),
        smallest_eigenvalue_(smallest_eigenvalue) {}

  double smallest_eigenvalue() const noexcept { return smallest_eigenvalue_; }

 private:
  double smallest_eigenvalue_;
};

class ConvergenceFailure : public Error {
 public:
  using Error::Error;
};

/// The curve left the affine chart: the top m×m block of its frame is singular.
class ChartBreakdown : public Error {
 public:
  explicit ChartBreakdown(double t)
      : Error("chart breakdown at t = " + std::to_string(t)), t_(t) {}

  double t() const noexcept { return t_; }

 private:
  double t_;
};

/// I - ZZ^T is singular: the Lorentzian slope is no longer spacelike.
class SpacelikeBreakdown : public Error {
 public:
  explicit SpacelikeBreakdown(double t)
      : Error("spacelike breakdown (I - ZZ^T singular) at t = " + std::to_string(t)),
        t_(t) {}

  double t() const noexcept { return t_; }

 private:
  double t_;
};

}  // namespace evplane
