#include "evplane/matlin.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace evplane {

namespace {

void require_positive_dims(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) {
    throw InvalidArgument("matrix dimensions must be positive");
  }
}

void require_same_shape(const Mat& a, const Mat& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidArgument(std::string(what) + ": shape mismatch (" + std::to_string(a.rows()) +
                          "x" + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                          "x" + std::to_string(b.cols()) + ")");
  }
}

void require_square(const Mat& a, const char* what) {
  if (!a.is_square()) {
    throw InvalidArgument(std::string(what) + ": matrix must be square");
  }
}

double max_row_norm(const Mat& a) {
  double best = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (double v : a.row(i)) s += v * v;
    best = std::max(best, std::sqrt(s));
  }
  return best;
}

}  // namespace

Mat::Mat(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {
  require_positive_dims(rows, cols);
  data_.assign(rows * cols, 0.0);
}

Mat::Mat(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  require_positive_dims(rows, cols);
  if (data_.size() != rows * cols) {
    throw InvalidArgument("matrix needs " + std::to_string(rows * cols) + " entries, got " +
                          std::to_string(data_.size()));
  }
  if (!all_finite()) throw InvalidArgument("matrix entries must be finite");
}

Mat::Mat(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  require_positive_dims(rows_, cols_);
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw InvalidArgument("ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
  if (!all_finite()) throw InvalidArgument("matrix entries must be finite");
}

Mat Mat::identity(std::size_t n) {
  Mat out(n, n);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
  return out;
}

Mat Mat::diagonal(std::span<const double> values) {
  Mat out(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out(i, i) = values[i];
  return out;
}

Mat Mat::transpose() const {
  Mat out(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
  return out;
}

Mat Mat::block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
  if (r0 + nr > rows_ || c0 + nc > cols_) throw InvalidArgument("block out of range");
  Mat out(nr, nc);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j) out(i, j) = (*this)(r0 + i, c0 + j);
  return out;
}

void Mat::set_block(std::size_t r0, std::size_t c0, const Mat& src) {
  if (r0 + src.rows() > rows_ || c0 + src.cols() > cols_) {
    throw InvalidArgument("set_block out of range");
  }
  for (std::size_t i = 0; i < src.rows(); ++i)
    for (std::size_t j = 0; j < src.cols(); ++j) (*this)(r0 + i, c0 + j) = src(i, j);
}

std::vector<double> Mat::column(std::size_t j) const {
  std::vector<double> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
  return out;
}

double Mat::frobenius_norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

double Mat::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double Mat::trace() const {
  double s = 0.0;
  for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) s += (*this)(i, i);
  return s;
}

bool Mat::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Mat& Mat::operator+=(const Mat& o) {
  require_same_shape(*this, o, "matrix addition");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
  return *this;
}

Mat& Mat::operator-=(const Mat& o) {
  require_same_shape(*this, o, "matrix subtraction");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
  return *this;
}

Mat& Mat::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Mat operator*(const Mat& a, const Mat& b) { return matmul(a, b); }

Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) {
    throw InvalidArgument("matmul: inner dimensions differ (" + std::to_string(a.cols()) +
                          " vs " + std::to_string(b.rows()) + ")");
  }
  Mat out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

Mat vstack(const Mat& top, const Mat& bottom) {
  if (top.cols() != bottom.cols()) throw InvalidArgument("vstack: column counts differ");
  Mat out(top.rows() + bottom.rows(), top.cols());
  out.set_block(0, 0, top);
  out.set_block(top.rows(), 0, bottom);
  return out;
}

Mat hstack(const Mat& left, const Mat& right) {
  if (left.rows() != right.rows()) throw InvalidArgument("hstack: row counts differ");
  Mat out(left.rows(), left.cols() + right.cols());
  out.set_block(0, 0, left);
  out.set_block(0, left.cols(), right);
  return out;
}

double distance(const Mat& a, const Mat& b) {
  require_same_shape(a, b, "distance");
  return (a - b).frobenius_norm();
}

double orthogonality_defect(const Mat& a) {
  require_square(a, "orthogonality_defect");
  return distance(a.transpose() * a, Mat::identity(a.rows()));
}

// ---------------------------------------------------------------------------
// LU

LuFactors::LuFactors(const Mat& a, double absolute_floor, bool exact_only) : lu_(a) {
  require_square(a, "LU factorization");
  const std::size_t n = a.rows();
  perm_.resize(n);
  std::iota(perm_.begin(), perm_.end(), std::size_t{0});
  const double threshold =
      exact_only ? 0.0 : std::max(kSingularPivotRelative * max_row_norm(a), absolute_floor);

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(lu_(i, k)) > std::abs(lu_(p, k))) p = i;
    const double pivot = lu_(p, k);
    if (!(std::abs(pivot) > threshold)) throw SingularMatrix(k, pivot);
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu_(p, j), lu_(k, j));
      std::swap(perm_[p], perm_[k]);
      sign_ = -sign_;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = lu_(i, k) / pivot;
      lu_(i, k) = f;
      if (f == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= f * lu_(k, j);
    }
  }
}

double LuFactors::determinant() const {
  double det = sign_;
  for (std::size_t i = 0; i < lu_.rows(); ++i) det *= lu_(i, i);
  return det;
}

Mat LuFactors::solve(const Mat& rhs) const {
  const std::size_t n = lu_.rows();
  if (rhs.rows() != n) throw InvalidArgument("LU solve: right-hand side has wrong row count");
  Mat x(n, rhs.cols());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < rhs.cols(); ++j) x(i, j) = rhs(perm_[i], j);
  for (std::size_t j = 0; j < rhs.cols(); ++j) {
    for (std::size_t i = 1; i < n; ++i) {
      double s = x(i, j);
      for (std::size_t k = 0; k < i; ++k) s -= lu_(i, k) * x(k, j);
      x(i, j) = s;
    }
    for (std::size_t ii = n; ii-- > 0;) {
      double s = x(ii, j);
      for (std::size_t k = ii + 1; k < n; ++k) s -= lu_(ii, k) * x(k, j);
      x(ii, j) = s / lu_(ii, ii);
    }
  }
  return x;
}

Mat LuFactors::inverse() const { return solve(Mat::identity(lu_.rows())); }

InverseWithDet invert_with_det(const Mat& a) {
  const LuFactors lu(a);
  return {lu.determinant(), lu.inverse()};
}

double determinant(const Mat& a) {
  require_square(a, "determinant");
  Mat w = a;
  const std::size_t n = a.rows();
  double det = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(w(i, k)) > std::abs(w(p, k))) p = i;
    if (w(p, k) == 0.0) return 0.0;
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(w(p, j), w(k, j));
      det = -det;
    }
    det *= w(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = w(i, k) / w(k, k);
      for (std::size_t j = k + 1; j < n; ++j) w(i, j) -= f * w(k, j);
    }
  }
  return det;
}

Mat solve(const Mat& a, const Mat& rhs) { return LuFactors(a).solve(rhs); }

// ---------------------------------------------------------------------------
// Symmetric eigenproblem (cyclic Jacobi)

SymEigen sym_eigen(const Mat& s) {
  require_square(s, "sym_eigen");
  const double norm = s.frobenius_norm();
  if (distance(s, s.transpose()) > kSymmetryTolerance * std::max(1.0, norm)) {
    throw InvalidArgument("sym_eigen: matrix is not symmetric");
  }
  const std::size_t n = s.rows();
  Mat a = (s + s.transpose()) * 0.5;
  Mat v = Mat::identity(n);

  auto off_norm = [&] {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) acc += a(i, j) * a(i, j);
    return std::sqrt(acc);
  };

  const double tol = 1e-13 * norm;
  int sweep = 0;
  while (off_norm() > tol) {
    if (sweep++ >= kJacobiMaxSweeps) {
      throw ConvergenceFailure("sym_eigen: no convergence within " +
                               std::to_string(kJacobiMaxSweeps) + " sweeps");
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::hypot(theta, 1.0));
        const double c = 1.0 / std::hypot(t, 1.0);
        const double sn = t * c;
        // A <- J^T A J with J the (p, q) rotation.
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
  SymEigen out{Mat(n, n), std::vector<double>(n)};
  for (std::size_t c = 0; c < n; ++c) {
    out.eigvals[c] = a(order[c], order[c]);
    for (std::size_t r = 0; r < n; ++r) out.q(r, c) = v(r, order[c]);
  }
  return out;
}

SpdRoots spd_roots(const Mat& s) {
  const SymEigen eig = sym_eigen(s);
  const double smallest = eig.eigvals.front();
  if (!(smallest > 1e-12 * s.frobenius_norm())) throw NotPositiveDefinite(smallest);

  const std::size_t n = s.rows();
  Mat scaled_root = eig.q;
  Mat scaled_inv = eig.q;
  for (std::size_t c = 0; c < n; ++c) {
    const double root = std::sqrt(eig.eigvals[c]);
    for (std::size_t r = 0; r < n; ++r) {
      scaled_root(r, c) *= root;
      scaled_inv(r, c) /= root;
    }
  }
  const Mat qt = eig.q.transpose();
  Mat root = scaled_root * qt;
  Mat inv = scaled_inv * qt;
  // Symmetrize to remove rounding asymmetry.
  return {(root + root.transpose()) * 0.5, (inv + inv.transpose()) * 0.5};
}

}  // namespace evplane
