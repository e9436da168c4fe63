#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "evplane/errors.hpp"

namespace evplane {

/// Dense real matrix, row-major, with strictly positive dimensions.
///
/// Public constructors reject non-finite entries. Arithmetic results are
/// built in place and are not re-validated; callers that can overflow (the
/// integrator near a blow-up) check `all_finite()` themselves.
class Mat {
 public:
  Mat(std::size_t rows, std::size_t cols);
  Mat(std::size_t rows, std::size_t cols, std::vector<double> entries);
  Mat(std::initializer_list<std::initializer_list<double>> rows);

  static Mat identity(std::size_t n);
  static Mat zeros(std::size_t rows, std::size_t cols) { return Mat(rows, cols); }
  static Mat diagonal(std::span<const double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> entries() const noexcept { return data_; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(data_).subspan(i * cols_, cols_);
  }

  Mat transpose() const;
  Mat block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
  void set_block(std::size_t r0, std::size_t c0, const Mat& src);
  std::vector<double> column(std::size_t j) const;

  double frobenius_norm() const;
  double max_abs() const;
  double trace() const;
  bool all_finite() const;

  Mat& operator+=(const Mat& o);
  Mat& operator-=(const Mat& o);
  Mat& operator*=(double s);

  friend Mat operator+(Mat a, const Mat& b) { return a += b; }
  friend Mat operator-(Mat a, const Mat& b) { return a -= b; }
  friend Mat operator*(Mat a, double s) { return a *= s; }
  friend Mat operator*(double s, Mat a) { return a *= s; }
  friend Mat operator-(Mat a) { return a *= -1.0; }
  friend Mat operator*(const Mat& a, const Mat& b);

  friend bool operator==(const Mat&, const Mat&) = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

/// Standard product; throws InvalidArgument on a.cols != b.rows.
Mat matmul(const Mat& a, const Mat& b);

/// [[top], [bottom]] and [left, right].
Mat vstack(const Mat& top, const Mat& bottom);
Mat hstack(const Mat& left, const Mat& right);

/// ||a - b||_F; throws on shape mismatch.
double distance(const Mat& a, const Mat& b);

/// ||a^T a - I||_F for square a.
double orthogonality_defect(const Mat& a);

/// Relative singularity threshold for LU pivots, scaled by the largest row norm.
inline constexpr double kSingularPivotRelative = 1e-12;

/// LU factorization with partial pivoting (PA = LU, unit lower L).
class LuFactors {
 public:
  /// Throws SingularMatrix when a pivot magnitude falls below
  /// max(kSingularPivotRelative * max_row_norm, absolute_floor). With
  /// `exact_only` set, only an exactly zero pivot is treated as singular.
  explicit LuFactors(const Mat& a, double absolute_floor = 0.0, bool exact_only = false);

  double determinant() const;
  Mat solve(const Mat& rhs) const;
  Mat inverse() const;
  std::size_t size() const noexcept { return lu_.rows(); }

 private:
  Mat lu_;
  std::vector<std::size_t> perm_;
  int sign_ = 1;
};

struct InverseWithDet {
  double det;
  Mat inv;
};

InverseWithDet invert_with_det(const Mat& a);

/// Determinant by partial-pivot elimination. Never throws on singular input
/// (returns the pivot product, possibly 0); throws InvalidArgument if not square.
double determinant(const Mat& a);

/// Solves a x = rhs; throws SingularMatrix like invert_with_det.
Mat solve(const Mat& a, const Mat& rhs);

struct SymEigen {
  Mat q;                        ///< orthogonal, columns are eigenvectors
  std::vector<double> eigvals;  ///< ascending
};

inline constexpr double kSymmetryTolerance = 1e-10;
inline constexpr int kJacobiMaxSweeps = 100;

/// Cyclic Jacobi eigensolver for symmetric matrices.
///
/// Input must satisfy ||s - s^T||_F <= kSymmetryTolerance * max(1, ||s||_F);
/// iteration stops once the off-diagonal Frobenius mass is below
/// 1e-13 * ||s||_F.
SymEigen sym_eigen(const Mat& s);

struct SpdRoots {
  Mat sqrt;
  Mat inv_sqrt;
};

/// Principal square root and inverse square root of an SPD matrix.
/// Throws NotPositiveDefinite when the smallest eigenvalue is <= 1e-12 * ||s||_F.
SpdRoots spd_roots(const Mat& s);

}  // namespace evplane
