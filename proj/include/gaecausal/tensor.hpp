#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <new>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gaecausal/error.hpp"

namespace gaecausal {

// Cache-line aligned storage. Vectorized kernels split work by pointer alignment,
// so a fixed alignment keeps floating-point results independent of the heap.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t count) {
    return static_cast<T*>(::operator new(count * sizeof(T), kAlign));
  }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlign); }

  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

// Dense row-major double matrix with value semantics.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, const std::vector<double>& data)
      : rows_(rows), cols_(cols), data_(data.begin(), data.end()) {
    require(data_.size() == rows_ * cols_, "Matrix: data length must equal rows*cols");
  }
  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      require(r.size() == cols_, "Matrix: ragged initializer");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix diagonal(std::span<const double> values) {
    Matrix m(values.size(), values.size());
    for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool is_square() const noexcept { return rows_ == cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }

  bool all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  void fill(double value) { std::fill(data_.begin(), data_.end(), value); }

  // Reshapes in place, keeping the allocation. Entry values are unspecified afterwards.
  void resize(std::size_t rows, std::size_t cols) {
    rows_ = rows;
    cols_ = cols;
    data_.resize(rows * cols);
  }

  Matrix& operator+=(const Matrix& other) {
    require(same_shape(other), "Matrix +=: shape mismatch");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
    return *this;
  }
  Matrix& operator-=(const Matrix& other) {
    require(same_shape(other), "Matrix -=: shape mismatch");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
    return *this;
  }
  Matrix& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }

  bool same_shape(const Matrix& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double, AlignedAllocator<double>> data_;
};

inline Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
inline Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
inline Matrix operator*(double s, Matrix a) { return a *= s; }

// Observations of shape n x d x l stored as [sample][variable][dimension].
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(std::size_t n, std::size_t d, std::size_t l, double fill = 0.0)
      : n_(n), d_(d), l_(l), data_(n * d * l, fill) {}
  Tensor3(std::size_t n, std::size_t d, std::size_t l, std::vector<double> data)
      : n_(n), d_(d), l_(l), data_(std::move(data)) {
    require(data_.size() == n_ * d_ * l_, "Tensor3: data length must equal n*d*l");
  }

  std::size_t n() const noexcept { return n_; }
  std::size_t d() const noexcept { return d_; }
  std::size_t l() const noexcept { return l_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t s, std::size_t v, std::size_t k) noexcept {
    return data_[(s * d_ + v) * l_ + k];
  }
  double operator()(std::size_t s, std::size_t v, std::size_t k) const noexcept {
    return data_[(s * d_ + v) * l_ + k];
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  // The (sample, variable) slice of length l.
  std::span<const double> slice(std::size_t s, std::size_t v) const noexcept {
    return {data_.data() + (s * d_ + v) * l_, l_};
  }
  std::span<double> slice(std::size_t s, std::size_t v) noexcept {
    return {data_.data() + (s * d_ + v) * l_, l_};
  }

  bool all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  bool same_shape(const Tensor3& o) const noexcept {
    return n_ == o.n_ && d_ == o.d_ && l_ == o.l_;
  }

  friend bool operator==(const Tensor3&, const Tensor3&) = default;

 private:
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  std::size_t l_ = 0;
  std::vector<double> data_;
};

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), "matmul: inner dimensions differ (" + std::to_string(a.cols()) +
                                    " vs " + std::to_string(b.rows()) + ")");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto brow = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) out[j] += aik * brow[j];
    }
  }
  return c;
}

inline Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

inline Matrix hadamard(const Matrix& a, const Matrix& b) {
  require(a.same_shape(b), "hadamard: shape mismatch");
  Matrix c(a.rows(), a.cols());
  auto ad = a.data();
  auto bd = b.data();
  auto cd = c.data();
  for (std::size_t k = 0; k < cd.size(); ++k) cd[k] = ad[k] * bd[k];
  return c;
}

inline double trace(const Matrix& a) {
  require(a.is_square(), "trace: matrix must be square");
  double t = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) t += a(i, i);
  return t;
}

// Induced 1-norm: maximum absolute column sum.
inline double norm_1(const Matrix& a) {
  double best = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) s += std::abs(a(i, j));
    best = std::max(best, s);
  }
  return best;
}

inline double norm_frobenius(const Matrix& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

// Solves lhs * X = rhs by Gaussian elimination with partial pivoting.
inline Matrix solve(Matrix lhs, Matrix rhs) {
  require(lhs.is_square(), "solve: coefficient matrix must be square");
  require(lhs.rows() == rhs.rows(), "solve: right-hand side row count mismatch");
  const std::size_t n = lhs.rows();
  const std::size_t m = rhs.cols();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(lhs(r, col)) > std::abs(lhs(pivot, col))) pivot = r;
    if (lhs(pivot, col) == 0.0) throw Error("solve: matrix is singular");
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lhs(col, j), lhs(pivot, j));
      for (std::size_t j = 0; j < m; ++j) std::swap(rhs(col, j), rhs(pivot, j));
    }
    const double inv = 1.0 / lhs(col, col);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = lhs(r, col) * inv;
      if (f == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) lhs(r, j) -= f * lhs(col, j);
      for (std::size_t j = 0; j < m; ++j) rhs(r, j) -= f * rhs(col, j);
    }
  }
  for (std::size_t col = n; col-- > 0;) {
    for (std::size_t j = 0; j < m; ++j) {
      double v = rhs(col, j);
      for (std::size_t k = col + 1; k < n; ++k) v -= lhs(col, k) * rhs(k, j);
      rhs(col, j) = v / lhs(col, col);
    }
  }
  return rhs;
}

namespace detail {

// Degree-13 Padé coefficients for exp and the matching scaling threshold
// (Higham, "The scaling and squaring method for the matrix exponential revisited").
inline constexpr double kPade13[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                     1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                     670442572800.0,      33522128640.0,       1323241920.0,
                                     40840800.0,          960960.0,            16380.0,
                                     182.0,               1.0};
inline constexpr double kTheta13 = 5.371920351148152;

// Beyond this 1-norm the squaring phase overflows for any nontrivial input.
inline constexpr double kMaxExpNorm = 1.0e6;

inline void axpy(Matrix& y, double a, const Matrix& x) {
  auto yd = y.data();
  auto xd = x.data();
  for (std::size_t k = 0; k < yd.size(); ++k) yd[k] += a * xd[k];
}

}  // namespace detail

// e^M by scaling and squaring around a fixed degree-13 Padé approximant.
inline Matrix matexp(const Matrix& m) {
  require(m.is_square(), "matexp: matrix must be square");
  require(m.all_finite(), "matexp: non-finite input");
  const std::size_t n = m.rows();
  if (n == 0) return m;

  const double norm = norm_1(m);
  if (norm > detail::kMaxExpNorm)
    throw OverflowError("matexp: input norm " + std::to_string(norm) + " overflows");

  int squarings = 0;
  if (norm > detail::kTheta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / detail::kTheta13)));
  }
  Matrix a = m;
  if (squarings > 0) {
    for (double& v : a.data()) v = std::ldexp(v, -squarings);
  }

  const auto& b = detail::kPade13;
  const Matrix id = Matrix::identity(n);
  const Matrix a2 = matmul(a, a);
  const Matrix a4 = matmul(a2, a2);
  const Matrix a6 = matmul(a4, a2);

  Matrix tmp(n, n);
  detail::axpy(tmp, b[13], a6);
  detail::axpy(tmp, b[11], a4);
  detail::axpy(tmp, b[9], a2);
  Matrix inner = matmul(a6, tmp);
  detail::axpy(inner, b[7], a6);
  detail::axpy(inner, b[5], a4);
  detail::axpy(inner, b[3], a2);
  detail::axpy(inner, b[1], id);
  const Matrix u = matmul(a, inner);

  tmp.fill(0.0);
  detail::axpy(tmp, b[12], a6);
  detail::axpy(tmp, b[10], a4);
  detail::axpy(tmp, b[8], a2);
  Matrix v = matmul(a6, tmp);
  detail::axpy(v, b[6], a6);
  detail::axpy(v, b[4], a4);
  detail::axpy(v, b[2], a2);
  detail::axpy(v, b[0], id);

  Matrix result = solve(v - u, v + u);
  for (int s = 0; s < squarings; ++s) result = matmul(result, result);

  if (!result.all_finite()) throw OverflowError("matexp: result overflowed double precision");
  return result;
}

}  // namespace gaecausal
