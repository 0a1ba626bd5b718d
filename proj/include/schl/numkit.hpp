#pragma once

// Dense complex linear algebra and circle quadrature shared by every module.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "schl/errors.hpp"

namespace schl {

using cplx = std::complex<double>;

inline constexpr double kPivotRelTol = 1e-14;
inline constexpr double kRankOneExactTol = 1e-8;
inline constexpr double kZeroMatrixTol = 1e-14;

/// Dense rectangular complex matrix stored row-major.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;

  ComplexMatrix(std::size_t rows, std::size_t cols, cplx fill = {})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> init) {
    rows_ = init.size();
    cols_ = rows_ == 0 ? 0 : init.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& row : init) {
      if (row.size() != cols_) fail(ErrorKind::DimensionMismatch, "ragged matrix initializer");
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  static ComplexMatrix zeros(std::size_t rows, std::size_t cols) { return {rows, cols}; }

  static ComplexMatrix identity(std::size_t n) {
    ComplexMatrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
    return out;
  }

  static ComplexMatrix diagonal(std::span<const cplx> diag) {
    ComplexMatrix out(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) out(i, i) = diag[i];
    return out;
  }

  static ComplexMatrix column_vector(std::span<const cplx> v) {
    ComplexMatrix out(v.size(), 1);
    std::copy(v.begin(), v.end(), out.data_.begin());
    return out;
  }

  static ComplexMatrix row_vector(std::span<const cplx> v) {
    ComplexMatrix out(1, v.size());
    std::copy(v.begin(), v.end(), out.data_.begin());
    return out;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }
  bool empty() const noexcept { return data_.empty(); }

  cplx& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<cplx> data() noexcept { return data_; }
  std::span<const cplx> data() const noexcept { return data_; }

  ComplexMatrix row(std::size_t i) const {
    ComplexMatrix out(1, cols_);
    for (std::size_t j = 0; j < cols_; ++j) out(0, j) = (*this)(i, j);
    return out;
  }

  ComplexMatrix col(std::size_t j) const {
    ComplexMatrix out(rows_, 1);
    for (std::size_t i = 0; i < rows_; ++i) out(i, 0) = (*this)(i, j);
    return out;
  }

  void set_row(std::size_t i, const ComplexMatrix& r) {
    if (r.rows_ != 1 || r.cols_ != cols_) fail(ErrorKind::DimensionMismatch, "set_row");
    for (std::size_t j = 0; j < cols_; ++j) (*this)(i, j) = r(0, j);
  }

  void set_col(std::size_t j, const ComplexMatrix& c) {
    if (c.cols_ != 1 || c.rows_ != rows_) fail(ErrorKind::DimensionMismatch, "set_col");
    for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = c(i, 0);
  }

  ComplexMatrix transpose() const {
    ComplexMatrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
    return out;
  }

  /// Largest entry magnitude.
  double max_norm() const {
    double out = 0.0;
    for (const auto& z : data_) out = std::max(out, std::abs(z));
    return out;
  }

  /// Maximum absolute row sum.
  double inf_norm() const {
    double out = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < cols_; ++j) sum += std::abs((*this)(i, j));
      out = std::max(out, sum);
    }
    return out;
  }

  bool is_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](const cplx& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
  }

  cplx trace() const {
    cplx out = 0.0;
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) out += (*this)(i, i);
    return out;
  }

  ComplexMatrix& operator+=(const ComplexMatrix& o) {
    check_same_shape(o, "+=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }

  ComplexMatrix& operator-=(const ComplexMatrix& o) {
    check_same_shape(o, "-=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }

  ComplexMatrix& operator*=(cplx a) {
    for (auto& z : data_) z *= a;
    return *this;
  }

  ComplexMatrix& operator/=(cplx a) {
    for (auto& z : data_) z /= a;
    return *this;
  }

  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
  friend ComplexMatrix operator-(ComplexMatrix a) { return a *= -1.0; }
  friend ComplexMatrix operator*(ComplexMatrix a, cplx s) { return a *= s; }
  friend ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }
  friend ComplexMatrix operator/(ComplexMatrix a, cplx s) { return a /= s; }

  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols_ != b.rows_)
      fail(ErrorKind::DimensionMismatch, "product of " + a.shape() + " and " + b.shape());
    ComplexMatrix out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const cplx aik = a(i, k);
        if (aik == cplx{}) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
      }
    return out;
  }

  friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

  std::string shape() const { return std::to_string(rows_) + "x" + std::to_string(cols_); }

 private:
  void check_same_shape(const ComplexMatrix& o, const char* op) const {
    if (rows_ != o.rows_ || cols_ != o.cols_)
      fail(ErrorKind::DimensionMismatch, std::string(op) + " on " + shape() + " and " + o.shape());
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

/// Max-norm of the difference, the distance used by every residual check.
inline double max_diff(const ComplexMatrix& a, const ComplexMatrix& b) { return (a - b).max_norm(); }

inline ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) { return a * b - b * a; }

/// The m x m matrix with a single 1 at (index, index); index is 0-based.
struct SelectorMatrix {
  std::size_t dim = 0;
  std::size_t index = 0;

  ComplexMatrix dense() const {
    if (index >= dim) fail(ErrorKind::IndexOutOfRange, "selector index outside dimension");
    ComplexMatrix out(dim, dim);
    out(index, index) = 1.0;
    return out;
  }
};

/// Row-pivoted LU factorization. Construction never throws on singular input;
/// `singular` records whether some pivot fell below the relative threshold.
struct LuDecomposition {
  ComplexMatrix lu;
  std::vector<std::size_t> perm;
  int sign = 1;
  bool singular = false;

  explicit LuDecomposition(const ComplexMatrix& a, double rel_tol = kPivotRelTol) : lu(a) {
    if (!a.is_square()) fail(ErrorKind::DimensionMismatch, "LU of non-square " + a.shape());
    const std::size_t n = a.rows();
    perm.resize(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    const double threshold = rel_tol * a.max_norm();
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t p = k;
      double best = std::abs(lu(k, k));
      for (std::size_t i = k + 1; i < n; ++i) {
        if (std::abs(lu(i, k)) > best) {
          best = std::abs(lu(i, k));
          p = i;
        }
      }
      if (best <= threshold) singular = true;
      if (p != k) {
        for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(p, j));
        std::swap(perm[k], perm[p]);
        sign = -sign;
      }
      const cplx pivot = lu(k, k);
      if (pivot == cplx{}) continue;
      for (std::size_t i = k + 1; i < n; ++i) {
        const cplx f = lu(i, k) / pivot;
        lu(i, k) = f;
        if (f == cplx{}) continue;
        for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= f * lu(k, j);
      }
    }
  }

  cplx determinant() const {
    cplx d = static_cast<double>(sign);
    for (std::size_t i = 0; i < lu.rows(); ++i) d *= lu(i, i);
    return d;
  }

  ComplexMatrix solve(const ComplexMatrix& b) const {
    const std::size_t n = lu.rows();
    if (b.rows() != n) fail(ErrorKind::DimensionMismatch, "LU solve rhs " + b.shape());
    if (singular) fail(ErrorKind::SingularMatrix, "pivot below relative threshold");
    ComplexMatrix x(n, b.cols());
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < b.cols(); ++j) x(i, j) = b(perm[i], j);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < i; ++k) {
        const cplx f = lu(i, k);
        if (f == cplx{}) continue;
        for (std::size_t j = 0; j < b.cols(); ++j) x(i, j) -= f * x(k, j);
      }
    for (std::size_t ii = n; ii-- > 0;) {
      for (std::size_t k = ii + 1; k < n; ++k) {
        const cplx f = lu(ii, k);
        if (f == cplx{}) continue;
        for (std::size_t j = 0; j < b.cols(); ++j) x(ii, j) -= f * x(k, j);
      }
      for (std::size_t j = 0; j < b.cols(); ++j) x(ii, j) /= lu(ii, ii);
    }
    return x;
  }
};

/// Solves A X = B with partial pivoting; throws SingularMatrix when a pivot
/// magnitude is below 1e-14 * ||A||_max.
inline ComplexMatrix lu_solve(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (!a.is_square()) fail(ErrorKind::DimensionMismatch, "lu_solve needs a square matrix");
  if (a.rows() != b.rows()) fail(ErrorKind::DimensionMismatch, "lu_solve rows differ");
  return LuDecomposition(a).solve(b);
}

inline ComplexMatrix inverse(const ComplexMatrix& a) { return lu_solve(a, ComplexMatrix::identity(a.rows())); }

inline cplx det(const ComplexMatrix& a) {
  if (a.rows() == 1 && a.cols() == 1) return a(0, 0);
  return LuDecomposition(a).determinant();
}

struct RankOneFactors {
  ComplexMatrix col;  // m x 1
  ComplexMatrix row;  // 1 x n
};

struct RankOneFit {
  RankOneFactors factors;
  double residual = 0.0;  // ||M - col*row||_max
};

/// Best rank-one fit by the pivot-column rule: the column of largest 2-norm
/// becomes `col`, and `row` is normalized to 1 at the pivot column, using the
/// largest entry of that column as reference. Never throws on rank > 1.
inline RankOneFit rank1_fit(const ComplexMatrix& m) {
  if (m.empty()) fail(ErrorKind::DimensionMismatch, "rank1_fit of empty matrix");
  std::size_t pc = 0;
  double best = -1.0;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    double norm2 = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) norm2 += std::norm(m(i, j));
    if (norm2 > best) {
      best = norm2;
      pc = j;
    }
  }
  std::size_t pr = 0;
  for (std::size_t i = 1; i < m.rows(); ++i)
    if (std::abs(m(i, pc)) > std::abs(m(pr, pc))) pr = i;

  RankOneFit fit;
  fit.factors.col = m.col(pc);
  fit.factors.row = ComplexMatrix(1, m.cols());
  const cplx ref = m(pr, pc);
  if (ref == cplx{}) {
    fit.residual = m.max_norm();
    return fit;
  }
  for (std::size_t j = 0; j < m.cols(); ++j) fit.factors.row(0, j) = m(pr, j) / ref;
  fit.residual = max_diff(m, fit.factors.col * fit.factors.row);
  return fit;
}

/// Factorizes a rank-one matrix as col * row.
inline RankOneFactors rank1_factor(const ComplexMatrix& m) {
  const double scale = m.max_norm();
  if (scale < kZeroMatrixTol) fail(ErrorKind::ZeroMatrix, "rank1_factor of a zero matrix");
  RankOneFit fit = rank1_fit(m);
  if (fit.residual > kRankOneExactTol * scale)
    fail(ErrorKind::NotRankOne, "rank-one residual " + std::to_string(fit.residual / scale));
  return std::move(fit.factors);
}

/// Equispaced trapezoid nodes on a circle.
struct QuadratureCircle {
  cplx center{};
  double radius = 1.0;
  std::size_t node_count = 64;

  QuadratureCircle() = default;
  QuadratureCircle(cplx c, double r, std::size_t n) : center(c), radius(r), node_count(n) {
    if (!(r > 0.0)) fail(ErrorKind::InvalidArgument, "circle radius must be positive");
    if (n == 0 || n % 2 != 0) fail(ErrorKind::InvalidArgument, "node count must be positive and even");
  }

  cplx node(std::size_t k) const {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(node_count);
    return center + radius * std::polar(1.0, theta);
  }

  std::vector<cplx> nodes() const {
    std::vector<cplx> out(node_count);
    for (std::size_t k = 0; k < node_count; ++k) out[k] = node(k);
    return out;
  }
};

/// Trapezoid rule for (1/2 pi i) * contour integral of f over the circle,
/// i.e. the mean over nodes of f(x_k) * (x_k - center).
inline ComplexMatrix contour_integral(std::span<const ComplexMatrix> samples, const QuadratureCircle& circle) {
  if (samples.size() != circle.node_count)
    fail(ErrorKind::DimensionMismatch, "sample count differs from node count");
  ComplexMatrix acc(samples.front().rows(), samples.front().cols());
  for (std::size_t k = 0; k < samples.size(); ++k) acc += samples[k] * (circle.node(k) - circle.center);
  return acc / static_cast<double>(circle.node_count);
}

template <typename F>
ComplexMatrix contour_integral(const QuadratureCircle& circle, F&& f) {
  std::vector<ComplexMatrix> samples;
  samples.reserve(circle.node_count);
  for (std::size_t k = 0; k < circle.node_count; ++k) samples.push_back(f(circle.node(k)));
  return contour_integral(samples, circle);
}

}  // namespace schl
