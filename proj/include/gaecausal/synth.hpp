#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "gaecausal/acyclicity.hpp"
#include "gaecausal/error.hpp"
#include "gaecausal/tensor.hpp"

namespace gaecausal {

// SplitMix64 step; used to expand one root seed into independent streams.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct GraphSpec {
  std::size_t d = 10;
  double expected_degree = 3.0;
  double weight_low = 0.5;
  double weight_high = 2.0;
  std::uint64_t seed = 0;

  void validate() const {
    require(d >= 2, "GraphSpec: d must be >= 2");
    require(expected_degree > 0.0 && expected_degree < static_cast<double>(d),
            "GraphSpec: expected_degree must lie in (0, d)");
    require(weight_low > 0.0 && weight_low <= weight_high,
            "GraphSpec: need 0 < weight_low <= weight_high");
  }

  // Probability of each forward edge under the random ordering.
  double edge_probability() const {
    return std::min(1.0, expected_degree / static_cast<double>(d - 1));
  }
};

enum class SemKind { Linear, Gim, PostNonlinear, VectorValued };

inline std::string to_string(SemKind kind) {
  switch (kind) {
    case SemKind::Linear: return "linear";
    case SemKind::Gim: return "gim";
    case SemKind::PostNonlinear: return "pnl";
    case SemKind::VectorValued: return "vector";
  }
  return "?";
}

inline SemKind parse_sem_kind(const std::string& s) {
  if (s == "linear") return SemKind::Linear;
  if (s == "gim") return SemKind::Gim;
  if (s == "pnl") return SemKind::PostNonlinear;
  if (s == "vector") return SemKind::VectorValued;
  throw PreconditionError("unknown SEM kind '" + s + "' (expected linear, gim, pnl or vector)");
}

struct SemSpec {
  SemKind kind = SemKind::Gim;
  std::size_t l = 1;
  SemKind base = SemKind::Gim;  // scalar model behind VectorValued
  double noise_scale = 1.0;

  void validate() const {
    if (kind == SemKind::VectorValued) {
      require(l >= 2, "SemSpec: vector-valued data needs l >= 2");
      require(base != SemKind::VectorValued, "SemSpec: vector-valued base must be scalar");
    } else {
      require(l == 1, "SemSpec: scalar SEM kinds need l == 1");
    }
    require(noise_scale >= 0.0, "SemSpec: noise_scale must be non-negative");
  }
};

struct Dataset {
  Tensor3 x;
  WeightedAdjacency truth;
  SemSpec spec;
  std::uint64_t seed = 0;
  // Per-dimension scale and offset of the vector-valued construction; empty otherwise.
  std::vector<double> scales;
  std::vector<double> offsets;
};

// Kahn's algorithm over the nonzero pattern, lowest index first among ready nodes.
// Returns nullopt when the pattern has a directed cycle.
inline std::optional<std::vector<std::size_t>> topological_order(const Matrix& a) {
  require(a.is_square(), "topological_order: adjacency must be square");
  const std::size_t d = a.rows();
  std::vector<std::size_t> indegree(d, 0);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      if (a(i, j) != 0.0) ++indegree[j];
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t j = 0; j < d; ++j)
    if (indegree[j] == 0) ready.push(j);
  std::vector<std::size_t> order;
  order.reserve(d);
  while (!ready.empty()) {
    const std::size_t i = ready.top();
    ready.pop();
    order.push_back(i);
    for (std::size_t j = 0; j < d; ++j)
      if (a(i, j) != 0.0 && --indegree[j] == 0) ready.push(j);
  }
  if (order.size() != d) return std::nullopt;
  return order;
}

inline bool is_dag(const WeightedAdjacency& a) { return topological_order(a.matrix()).has_value(); }

// Erdős–Rényi DAG: random node permutation, each forward pair joined with
// probability degree/(d-1), weight magnitude uniform on [low, high] with random sign.
inline WeightedAdjacency random_dag(const GraphSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::vector<std::size_t> perm(spec.d);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  std::bernoulli_distribution edge(spec.edge_probability());
  std::uniform_real_distribution<double> magnitude(spec.weight_low, spec.weight_high);
  std::bernoulli_distribution negative(0.5);
  WeightedAdjacency a(spec.d);
  for (std::size_t p = 0; p < spec.d; ++p) {
    for (std::size_t q = p + 1; q < spec.d; ++q) {
      if (!edge(rng)) continue;
      const double w = magnitude(rng);
      a(perm[p], perm[q]) = negative(rng) ? -w : w;
    }
  }
  return a;
}

// i.i.d. normal noise of shape n x d x l with the given standard deviation.
inline Tensor3 draw_noise(std::size_t n, std::size_t d, std::size_t l, std::uint64_t seed,
                          double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Tensor3 z(n, d, l);
  for (double& v : z.data()) v = scale * normal(rng);
  return z;
}

namespace detail {

inline std::vector<std::size_t> checked_order(const WeightedAdjacency& a) {
  require(a.matrix().all_finite(), "sampler: non-finite adjacency");
  auto order = topological_order(a.matrix());
  if (!order) throw PreconditionError("sampler: adjacency contains a directed cycle");
  return *order;
}

inline void check_order(const WeightedAdjacency& a, const std::vector<std::size_t>& order) {
  const std::size_t d = a.d();
  require(order.size() == d, "sampler: order must list every node once");
  std::vector<std::size_t> position(d, d);
  for (std::size_t p = 0; p < d; ++p) {
    require(order[p] < d && position[order[p]] == d, "sampler: order is not a permutation");
    position[order[p]] = p;
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      if (a(i, j) != 0.0)
        require(position[i] < position[j], "sampler: order is not topological");
}

// X_i = link(Σ_j A[j][i] f(X_j)) + Z_i, visiting nodes in `order`.
template <typename Parent, typename Link>
Tensor3 ancestral(const WeightedAdjacency& a, const Tensor3& noise,
                  const std::vector<std::size_t>& order, Parent parent, Link link) {
  require(noise.d() == a.d() && noise.l() == 1, "sampler: noise must be n x d x 1");
  check_order(a, order);
  const std::size_t d = a.d();
  Tensor3 x(noise.n(), d, 1);
  for (std::size_t s = 0; s < noise.n(); ++s) {
    for (std::size_t i : order) {
      double m = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double w = a(j, i);
        if (w != 0.0) m += w * parent(x(s, j, 0));
      }
      x(s, i, 0) = link(m) + noise(s, i, 0);
    }
  }
  return x;
}

inline double identity_fn(double v) { return v; }
inline double gim_parent(double v) { return std::cos(v + 1.0); }
inline double pnl_link(double m) {
  const double shifted = m + 0.5;
  return 2.0 * std::sin(shifted) + shifted;
}

}  // namespace detail

// Noise-explicit samplers. `order` defaults to the canonical topological order.
inline Tensor3 sample_linear(const WeightedAdjacency& a, const Tensor3& noise,
                             std::optional<std::vector<std::size_t>> order = std::nullopt) {
  auto ord = order ? *order : detail::checked_order(a);
  return detail::ancestral(a, noise, ord, detail::identity_fn, detail::identity_fn);
}

inline Tensor3 sample_gim(const WeightedAdjacency& a, const Tensor3& noise,
                          std::optional<std::vector<std::size_t>> order = std::nullopt) {
  auto ord = order ? *order : detail::checked_order(a);
  return detail::ancestral(a, noise, ord, detail::gim_parent, detail::identity_fn);
}

inline Tensor3 sample_pnl(const WeightedAdjacency& a, const Tensor3& noise,
                          std::optional<std::vector<std::size_t>> order = std::nullopt) {
  auto ord = order ? *order : detail::checked_order(a);
  return detail::ancestral(a, noise, ord, detail::gim_parent, detail::pnl_link);
}

// X[:, :, k] = scales[k] * base + offsets[k] + noise[:, :, k].
inline Tensor3 sample_vector(const Tensor3& base, std::span<const double> scales,
                             std::span<const double> offsets, const Tensor3& noise) {
  require(base.l() == 1, "sample_vector: base data must be scalar-valued");
  const std::size_t l = noise.l();
  require(l >= 2, "sample_vector: l must be >= 2");
  require(scales.size() == l && offsets.size() == l, "sample_vector: need one scale/offset per dim");
  require(noise.n() == base.n() && noise.d() == base.d(), "sample_vector: noise shape mismatch");
  Tensor3 x(base.n(), base.d(), l);
  for (std::size_t s = 0; s < base.n(); ++s)
    for (std::size_t i = 0; i < base.d(); ++i)
      for (std::size_t k = 0; k < l; ++k)
        x(s, i, k) = scales[k] * base(s, i, 0) + offsets[k] + noise(s, i, k);
  return x;
}

namespace detail {

enum SeedStream : std::uint64_t { kScalarNoise = 1, kVectorCoeffs = 2, kVectorNoise = 3 };

inline Dataset make_scalar(const WeightedAdjacency& a, std::size_t n, std::uint64_t seed,
                           SemKind kind, double noise_scale) {
  require(n >= 1, "sampler: n must be >= 1");
  detail::checked_order(a);
  Tensor3 z = draw_noise(n, a.d(), 1, mix_seed(seed, kScalarNoise), noise_scale);
  Dataset ds;
  ds.truth = a;
  ds.seed = seed;
  ds.spec.kind = kind;
  ds.spec.noise_scale = noise_scale;
  switch (kind) {
    case SemKind::Linear: ds.x = sample_linear(a, z); break;
    case SemKind::Gim: ds.x = sample_gim(a, z); break;
    case SemKind::PostNonlinear: ds.x = sample_pnl(a, z); break;
    case SemKind::VectorValued: throw PreconditionError("make_scalar: vector kind");
  }
  return ds;
}

}  // namespace detail

// Linear SEM X = AᵀX + Z with standard normal Z (scaled by noise_scale).
inline Dataset sample_linear(const WeightedAdjacency& a, std::size_t n, std::uint64_t seed,
                             double noise_scale = 1.0) {
  return detail::make_scalar(a, n, seed, SemKind::Linear, noise_scale);
}

// X = Aᵀcos(X + 1) + Z.
inline Dataset sample_gim(const WeightedAdjacency& a, std::size_t n, std::uint64_t seed,
                          double noise_scale = 1.0) {
  return detail::make_scalar(a, n, seed, SemKind::Gim, noise_scale);
}

// X = 2 sin(Aᵀcos(X + 1) + 0.5) + (Aᵀcos(X + 1) + 0.5) + Z.
inline Dataset sample_pnl(const WeightedAdjacency& a, std::size_t n, std::uint64_t seed,
                          double noise_scale = 1.0) {
  return detail::make_scalar(a, n, seed, SemKind::PostNonlinear, noise_scale);
}

// Vector-valued data: a scalar base sample X̃ is lifted to l dimensions with
// per-dimension scale u^k and offset v^k (drawn once per dataset) plus fresh noise.
inline Dataset sample_vector(const WeightedAdjacency& a, std::size_t n, std::size_t l,
                             std::uint64_t seed, SemKind base = SemKind::Gim,
                             double noise_scale = 1.0) {
  require(l >= 2, "sample_vector: l must be >= 2");
  require(base != SemKind::VectorValued, "sample_vector: base must be scalar");
  Dataset scalar = detail::make_scalar(a, n, seed, base, noise_scale);
  std::mt19937_64 rng(mix_seed(seed, detail::kVectorCoeffs));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> scales(l), offsets(l);
  for (std::size_t k = 0; k < l; ++k) scales[k] = normal(rng);
  for (std::size_t k = 0; k < l; ++k) offsets[k] = normal(rng);
  Tensor3 z = draw_noise(n, a.d(), l, mix_seed(seed, detail::kVectorNoise), noise_scale);

  Dataset ds;
  ds.x = sample_vector(scalar.x, scales, offsets, z);
  ds.truth = a;
  ds.seed = seed;
  ds.spec = SemSpec{SemKind::VectorValued, l, base, noise_scale};
  ds.scales = std::move(scales);
  ds.offsets = std::move(offsets);
  return ds;
}

inline Dataset generate_dataset(const GraphSpec& graph, const SemSpec& sem, std::size_t n,
                                std::uint64_t seed) {
  graph.validate();
  sem.validate();
  require(n >= 1, "generate_dataset: n must be >= 1");
  const WeightedAdjacency a = random_dag(graph);
  switch (sem.kind) {
    case SemKind::Linear: return sample_linear(a, n, seed, sem.noise_scale);
    case SemKind::Gim: return sample_gim(a, n, seed, sem.noise_scale);
    case SemKind::PostNonlinear: return sample_pnl(a, n, seed, sem.noise_scale);
    case SemKind::VectorValued: return sample_vector(a, n, sem.l, seed, sem.base, sem.noise_scale);
  }
  throw PreconditionError("generate_dataset: unknown SEM kind");
}

}  // namespace gaecausal
