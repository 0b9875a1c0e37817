#pragma once
// Independent reference implementations used only by the tests.

#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <vector>

#include "gaecausal/tensor.hpp"

namespace oracle {

using gaecausal::Matrix;
using LMat = std::vector<long double>;

inline LMat to_long(const Matrix& m) { return LMat(m.data().begin(), m.data().end()); }

inline Matrix to_double(const LMat& m, std::size_t n) {
  Matrix r(n, n);
  for (std::size_t k = 0; k < n * n; ++k) r.data()[k] = static_cast<double>(m[k]);
  return r;
}

inline LMat lmul(const LMat& a, const LMat& b, std::size_t n) {
  LMat c(n * n, 0.0L);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) c[i * n + j] += a[i * n + k] * b[k * n + j];
  return c;
}

// Plain truncated Taylor series Σ_{k<terms} M^k / k! in extended precision.
inline Matrix exp_series(const Matrix& m, std::size_t terms = 60) {
  const std::size_t n = m.rows();
  const LMat a = to_long(m);
  LMat term(n * n, 0.0L), sum(n * n, 0.0L);
  for (std::size_t i = 0; i < n; ++i) term[i * n + i] = 1.0L;
  for (std::size_t k = 0; k < terms; ++k) {
    for (std::size_t e = 0; e < n * n; ++e) sum[e] += term[e];
    term = lmul(term, a, n);
    for (long double& v : term) v /= static_cast<long double>(k + 1);
  }
  return to_double(sum, n);
}

// Taylor series on M / 2^s followed by s squarings, kept in extended precision.
inline LMat exp_series_scaled_long(const Matrix& m, std::size_t terms = 40) {
  const std::size_t n = m.rows();
  long double norm = 0.0L;
  for (double v : m.data()) norm += std::fabs(static_cast<long double>(v));
  int s = 0;
  while (norm > 0.25L) {
    norm /= 2.0L;
    ++s;
  }
  LMat a = to_long(m);
  for (long double& v : a) v = std::ldexp(v, -s);
  LMat term(n * n, 0.0L), sum(n * n, 0.0L);
  for (std::size_t i = 0; i < n; ++i) term[i * n + i] = 1.0L;
  for (std::size_t k = 0; k < terms; ++k) {
    for (std::size_t e = 0; e < n * n; ++e) sum[e] += term[e];
    term = lmul(term, a, n);
    for (long double& v : term) v /= static_cast<long double>(k + 1);
  }
  for (int k = 0; k < s; ++k) sum = lmul(sum, sum, n);
  return sum;
}

inline Matrix exp_series_scaled(const Matrix& m, std::size_t terms = 40) {
  return to_double(exp_series_scaled_long(m, terms), m.rows());
}

inline Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

inline double frobenius(const Matrix& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

inline double rel_error(const Matrix& got, const Matrix& want) {
  double diff = 0.0;
  for (std::size_t k = 0; k < got.data().size(); ++k) {
    const double e = got.data()[k] - want.data()[k];
    diff += e * e;
  }
  const double scale = frobenius(want);
  return std::sqrt(diff) / (scale > 0.0 ? scale : 1.0);
}

inline Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double lo = -1.0,
                            double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(r, c);
  for (double& v : m.data()) v = u(rng);
  return m;
}

// Directed-cycle check on a nonzero pattern by depth-first search (recursive, small d).
inline bool has_cycle(const Matrix& a) {
  const std::size_t d = a.rows();
  std::vector<int> state(d, 0);
  std::function<bool(std::size_t)> visit = [&](std::size_t u) {
    state[u] = 1;
    for (std::size_t v = 0; v < d; ++v) {
      if (a(u, v) == 0.0) continue;
      if (state[v] == 1) return true;
      if (state[v] == 0 && visit(v)) return true;
    }
    state[u] = 2;
    return false;
  };
  for (std::size_t u = 0; u < d; ++u)
    if (state[u] == 0 && visit(u)) return true;
  return false;
}

// Central finite difference of f at x[k].
template <typename F>
double central_diff(F&& f, double& x, double eps = 1e-5) {
  const double saved = x;
  x = saved + eps;
  const double up = f();
  x = saved - eps;
  const double down = f();
  x = saved;
  return (up - down) / (2.0 * eps);
}

}  // namespace oracle
