#pragma once

#include <algorithm>
#include <cstddef>
#include <utility>

#include "gaecausal/error.hpp"
#include "gaecausal/tensor.hpp"

namespace gaecausal {

// Square weighted adjacency: entry (i, j) is the weight of edge i -> j.
class WeightedAdjacency {
 public:
  WeightedAdjacency() = default;
  explicit WeightedAdjacency(std::size_t d) : weights_(d, d) {}
  explicit WeightedAdjacency(Matrix weights) : weights_(std::move(weights)) {
    require(weights_.is_square(), "WeightedAdjacency: matrix must be square");
  }

  std::size_t d() const noexcept { return weights_.rows(); }
  double& operator()(std::size_t i, std::size_t j) noexcept { return weights_(i, j); }
  double operator()(std::size_t i, std::size_t j) const noexcept { return weights_(i, j); }

  const Matrix& matrix() const noexcept { return weights_; }
  Matrix& matrix() noexcept { return weights_; }

  friend bool operator==(const WeightedAdjacency&, const WeightedAdjacency&) = default;

 private:
  Matrix weights_;
};

// e^{A∘A} together with h = tr(e^{A∘A}) - d, computed once for value and gradient.
struct AcyclicityTerms {
  Matrix exp_sq;
  double h = 0.0;
};

inline AcyclicityTerms acyclicity_terms(const Matrix& a) {
  require(a.is_square(), "acyclicity: adjacency must be square");
  require(a.all_finite(), "acyclicity: non-finite adjacency entry");
  AcyclicityTerms t;
  t.exp_sq = matexp(hadamard(a, a));
  t.h = trace(t.exp_sq) - static_cast<double>(a.rows());
  return t;
}

// Smooth acyclicity measure tr(e^{A∘A}) - d. Zero exactly when A's support is a DAG.
// The raw signed value is returned; use reported_h() for display.
inline double h(const WeightedAdjacency& a) { return acyclicity_terms(a.matrix()).h; }

// Clamps rounding-level negative values to zero for reporting.
inline double reported_h(double raw) { return std::max(raw, 0.0); }

// Gradient of h: (e^{A∘A})ᵀ ∘ 2A.
inline Matrix grad_h(const Matrix& a, const AcyclicityTerms& terms) {
  const std::size_t d = a.rows();
  Matrix g(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) g(i, j) = 2.0 * a(i, j) * terms.exp_sq(j, i);
  return g;
}

inline Matrix grad_h(const WeightedAdjacency& a) {
  return grad_h(a.matrix(), acyclicity_terms(a.matrix()));
}

}  // namespace gaecausal
