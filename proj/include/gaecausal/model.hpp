#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gaecausal/acyclicity.hpp"
#include "gaecausal/error.hpp"
#include "gaecausal/tensor.hpp"

namespace gaecausal {

enum class Activation { Identity, Relu };

struct DenseLayer {
  Matrix weights;             // in_dim x out_dim
  std::vector<double> bias;   // out_dim
  Activation activation = Activation::Identity;

  std::size_t in_dim() const noexcept { return weights.rows(); }
  std::size_t out_dim() const noexcept { return weights.cols(); }

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

// Variable-wise MLP shared across all variables. An empty layer list is the
// identity map, which requires in_dim == out_dim.
struct MlpParams {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::vector<DenseLayer> layers;

  bool is_identity() const noexcept { return layers.empty(); }

  void validate() const {
    if (layers.empty()) {
      require(in_dim == out_dim, "MlpParams: identity map needs in_dim == out_dim");
      return;
    }
    require(layers.front().in_dim() == in_dim, "MlpParams: first layer input dim mismatch");
    require(layers.back().out_dim() == out_dim, "MlpParams: last layer output dim mismatch");
    for (std::size_t k = 0; k < layers.size(); ++k) {
      require(layers[k].bias.size() == layers[k].out_dim(), "MlpParams: bias length mismatch");
      if (k + 1 < layers.size())
        require(layers[k].out_dim() == layers[k + 1].in_dim(),
                "MlpParams: consecutive layer dims do not chain");
    }
  }

  static MlpParams identity(std::size_t dim) { return MlpParams{dim, dim, {}}; }

  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

enum class ModelKind {
  Gae,          // X̂ = g2(Aᵀ g1(X))
  GaeAdditive,  // X̂ = Aᵀ g1(X), decoder fixed to identity
  Linear,       // X̂ = AᵀX
};

inline std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Gae: return "gae";
    case ModelKind::GaeAdditive: return "gae-additive";
    case ModelKind::Linear: return "linear";
  }
  return "?";
}

inline ModelKind parse_model_kind(const std::string& s) {
  if (s == "gae") return ModelKind::Gae;
  if (s == "gae-additive") return ModelKind::GaeAdditive;
  if (s == "linear") return ModelKind::Linear;
  throw PreconditionError("unknown method '" + s + "' (expected gae, gae-additive or linear)");
}

struct ModelConfig {
  ModelKind kind = ModelKind::Gae;
  std::size_t l = 1;
  std::size_t l_latent = 1;
  std::size_t hidden = 16;
  std::size_t layers = 3;
};

struct GaeParams {
  WeightedAdjacency adjacency;
  MlpParams encoder;  // l -> l_latent
  MlpParams decoder;  // l_latent -> l
  std::size_t l = 1;
  std::size_t l_latent = 1;

  std::size_t d() const noexcept { return adjacency.d(); }

  void validate() const {
    encoder.validate();
    decoder.validate();
    require(encoder.in_dim == l && encoder.out_dim == l_latent,
            "GaeParams: encoder must map l -> l_latent");
    require(decoder.in_dim == l_latent && decoder.out_dim == l,
            "GaeParams: decoder must map l_latent -> l");
  }

  friend bool operator==(const GaeParams&, const GaeParams&) = default;
};

// Gradients share the parameter layout.
struct Gradients {
  Matrix d_adjacency;
  MlpParams d_encoder;
  MlpParams d_decoder;
};

// Activations retained by forward for backward. Every activation is stored as an
// (n*d) x width matrix whose rows are the (sample, variable) slices.
struct ForwardCache {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<Matrix> encoder_activations;  // [0] is the input, back() is H
  std::vector<Matrix> decoder_activations;  // [0] is H', back() is X̂

  Tensor3 latent() const { return as_tensor(encoder_activations.back()); }
  Tensor3 mixed_latent() const { return as_tensor(decoder_activations.front()); }

 private:
  Tensor3 as_tensor(const Matrix& m) const {
    return Tensor3(n, d, m.cols(), std::vector<double>(m.data().begin(), m.data().end()));
  }
};


namespace detail {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMut = Eigen::Map<RowMajor>;
using MapConst = Eigen::Map<const RowMajor>;

inline MapMut view(Matrix& m) {
  return MapMut(m.data().data(), static_cast<Eigen::Index>(m.rows()),
                static_cast<Eigen::Index>(m.cols()));
}
inline MapConst view(const Matrix& m) {
  return MapConst(m.data().data(), static_cast<Eigen::Index>(m.rows()),
                  static_cast<Eigen::Index>(m.cols()));
}
inline Eigen::Map<const Eigen::RowVectorXd> view(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::RowVectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}
inline Eigen::Map<Eigen::RowVectorXd> view(std::vector<double>& v) {
  return Eigen::Map<Eigen::RowVectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline void copy_rows(const Tensor3& x, Matrix& out) {
  out.resize(x.n() * x.d(), x.l());
  std::copy(x.data().begin(), x.data().end(), out.data().begin());
}

inline Matrix rows_of(const Tensor3& x) {
  Matrix m;
  copy_rows(x, m);
  return m;
}

inline Tensor3 tensor_of(const Matrix& m, std::size_t n, std::size_t d) {
  return Tensor3(n, d, m.cols(), std::vector<double>(m.data().begin(), m.data().end()));
}

inline MapMut rows_view(Matrix& m, std::size_t r0, std::size_t count) {
  return MapMut(m.data().data() + r0 * m.cols(), static_cast<Eigen::Index>(count),
                static_cast<Eigen::Index>(m.cols()));
}
inline MapConst rows_view(const Matrix& m, std::size_t r0, std::size_t count) {
  return MapConst(m.data().data() + r0 * m.cols(), static_cast<Eigen::Index>(count),
                  static_cast<Eigen::Index>(m.cols()));
}

// Rows are processed in blocks small enough to stay in cache across layers.
inline constexpr std::size_t kRowBlock = 256;

inline void mlp_forward(const MlpParams& mlp, std::vector<Matrix>& acts) {
  acts.resize(mlp.layers.size() + 1);
  const std::size_t rows = acts[0].rows();
  for (std::size_t k = 0; k < mlp.layers.size(); ++k)
    acts[k + 1].resize(rows, mlp.layers[k].out_dim());
  for (std::size_t r0 = 0; r0 < rows; r0 += kRowBlock) {
    const std::size_t count = std::min(kRowBlock, rows - r0);
    for (std::size_t k = 0; k < mlp.layers.size(); ++k) {
      const DenseLayer& layer = mlp.layers[k];
      auto y = rows_view(acts[k + 1], r0, count);
      y.noalias() = rows_view(std::as_const(acts[k]), r0, count) * view(layer.weights);
      if (layer.activation == Activation::Relu)
        y = (y.rowwise() + view(layer.bias)).cwiseMax(0.0);
      else
        y.rowwise() += view(layer.bias);
    }
  }
}

inline MlpParams zeros_like(const MlpParams& mlp) {
  MlpParams z{mlp.in_dim, mlp.out_dim, {}};
  for (const DenseLayer& layer : mlp.layers)
    z.layers.push_back(DenseLayer{Matrix(layer.in_dim(), layer.out_dim()),
                                  std::vector<double>(layer.out_dim(), 0.0), layer.activation});
  return z;
}

// `grad_out` holds dL/d(output). Parameter gradients accumulate into `grads`;
// dL/d(input) is written to `grad_in` when it is non-null.
inline void mlp_backward(const MlpParams& mlp, const std::vector<Matrix>& acts,
                         const Matrix& grad_out, MlpParams& grads, Matrix* grad_in) {
  const std::size_t rows = grad_out.rows();
  if (grad_in != nullptr) grad_in->resize(rows, mlp.in_dim);
  RowMajor g, next;
  for (std::size_t r0 = 0; r0 < rows; r0 += kRowBlock) {
    const std::size_t count = std::min(kRowBlock, rows - r0);
    g = rows_view(grad_out, r0, count);
    for (std::size_t k = mlp.layers.size(); k-- > 0;) {
      const DenseLayer& layer = mlp.layers[k];
      DenseLayer& grad = grads.layers[k];
      if (layer.activation == Activation::Relu)
        g = (rows_view(acts[k + 1], r0, count).array() > 0.0).select(g, 0.0);
      view(grad.weights).noalias() += rows_view(acts[k], r0, count).transpose() * g;
      // Reduce into an aligned temporary: summation order then cannot depend on
      // where the bias vector happens to live.
      const Eigen::RowVectorXd colsum = g.colwise().sum();
      view(grad.bias) += colsum;
      if (k > 0 || grad_in != nullptr) {
        next.noalias() = g * view(layer.weights).transpose();
        g.swap(next);
      }
    }
    if (grad_in != nullptr) rows_view(*grad_in, r0, count) = g;
  }
}

// Channel c of samples [s0, s0 + count), as a count x d matrix.
inline void gather_channel(const Matrix& m, std::size_t d, std::size_t s0, std::size_t count,
                           std::size_t c, RowMajor& out) {
  const std::size_t w = m.cols();
  out.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(d));
  const double* p = m.data().data() + s0 * d * w + c;
  double* o = out.data();
  for (std::size_t k = 0; k < count * d; ++k) o[k] = p[k * w];
}

inline void scatter_channel(const RowMajor& in, std::size_t d, std::size_t s0, std::size_t c,
                            Matrix& m) {
  const std::size_t w = m.cols();
  double* p = m.data().data() + s0 * d * w + c;
  const double* q = in.data();
  for (std::size_t k = 0; k < static_cast<std::size_t>(in.size()); ++k) p[k * w] = q[k];
}

inline std::array<RowMajor, 3>& channel_scratch() {
  thread_local std::array<RowMajor, 3> buffers;
  return buffers;
}

// Samples per block when mixing multi-channel rows; keeps a block's channels in cache.
inline constexpr std::size_t kSampleBlock = 256;

// H'[s, k, :] = Σ_i A[i][k] H[s, i, :] on (n*d) x width row storage: an n x d by
// d x d product per channel.
inline void mix_rows(const Matrix& a, const Matrix& h, std::size_t n, std::size_t d,
                     Matrix& out) {
  const std::size_t w = h.cols();
  out.resize(h.rows(), w);
  const MapConst av = view(a);
  if (w == 1) {
    const auto rows = static_cast<Eigen::Index>(n), cols = static_cast<Eigen::Index>(d);
    MapMut(out.data().data(), rows, cols).noalias() =
        MapConst(h.data().data(), rows, cols) * av;
    return;
  }
  auto& [hc, oc, unused] = channel_scratch();
  for (std::size_t s0 = 0; s0 < n; s0 += kSampleBlock) {
    const std::size_t count = std::min(kSampleBlock, n - s0);
    for (std::size_t c = 0; c < w; ++c) {
      gather_channel(h, d, s0, count, c, hc);
      oc.noalias() = hc * av;
      scatter_channel(oc, d, s0, c, out);
    }
  }
}

// Reverse of mix_rows: d_a += Σ_c H_cᵀ G_c and d_h = G_c Aᵀ per channel, where
// g holds dL/dH'.
inline void mix_rows_backward(const Matrix& a, const Matrix& h, const Matrix& g, std::size_t n,
                              std::size_t d, Matrix& d_a, Matrix& d_h) {
  const std::size_t w = h.cols();
  d_h.resize(h.rows(), w);
  const MapConst av = view(a);
  MapMut dav = view(d_a);
  if (w == 1) {
    const auto rows = static_cast<Eigen::Index>(n), cols = static_cast<Eigen::Index>(d);
    const MapConst hc(h.data().data(), rows, cols), gc(g.data().data(), rows, cols);
    dav.noalias() += hc.transpose() * gc;
    MapMut(d_h.data().data(), rows, cols).noalias() = gc * av.transpose();
    return;
  }
  auto& [hc, gc, out] = channel_scratch();
  for (std::size_t s0 = 0; s0 < n; s0 += kSampleBlock) {
    const std::size_t count = std::min(kSampleBlock, n - s0);
    for (std::size_t c = 0; c < w; ++c) {
      gather_channel(h, d, s0, count, c, hc);
      gather_channel(g, d, s0, count, c, gc);
      dav.noalias() += hc.transpose() * gc;
      out.noalias() = gc * av.transpose();
      scatter_channel(out, d, s0, c, d_h);
    }
  }
}

}  // namespace detail

// Applies the shared MLP to every (sample, variable) slice.
inline Tensor3 encode(const MlpParams& mlp, const Tensor3& x) {
  mlp.validate();
  require(x.l() == mlp.in_dim, "encode: per-variable dim " + std::to_string(x.l()) +
                                   " does not match MLP input dim " + std::to_string(mlp.in_dim));
  std::vector<Matrix> acts(1);
  detail::copy_rows(x, acts[0]);
  detail::mlp_forward(mlp, acts);
  return detail::tensor_of(acts.back(), x.n(), x.d());
}

// H'[:, k] = Σ_i A[i][k] H[:, i] for every sample.
inline Tensor3 message_pass(const WeightedAdjacency& a, const Tensor3& h) {
  require(a.d() == h.d(), "message_pass: adjacency size does not match variable count");
  Matrix out;
  detail::mix_rows(a.matrix(), detail::rows_of(h), h.n(), h.d(), out);
  return detail::tensor_of(out, h.n(), h.d());
}

// Forward pass into an existing cache, reusing its buffers when shapes allow.
inline void forward_into(const GaeParams& params, const Tensor3& x, ForwardCache& cache) {
  params.validate();
  require(x.d() == params.d(), "forward: dataset has " + std::to_string(x.d()) +
                                   " variables, model expects " + std::to_string(params.d()));
  require(x.l() == params.l, "forward: dataset per-variable dim " + std::to_string(x.l()) +
                                 " does not match model l=" + std::to_string(params.l));
  cache.n = x.n();
  cache.d = x.d();
  cache.encoder_activations.resize(params.encoder.layers.size() + 1);
  cache.decoder_activations.resize(params.decoder.layers.size() + 1);
  detail::copy_rows(x, cache.encoder_activations.front());
  detail::mlp_forward(params.encoder, cache.encoder_activations);
  detail::mix_rows(params.adjacency.matrix(), cache.encoder_activations.back(), x.n(), x.d(),
                   cache.decoder_activations.front());
  detail::mlp_forward(params.decoder, cache.decoder_activations);
}

struct ForwardResult {
  Tensor3 reconstruction;
  ForwardCache cache;
};

// X̂ = g2(Aᵀ g1(X)).
inline ForwardResult forward(const GaeParams& params, const Tensor3& x) {
  ForwardResult r;
  forward_into(params, x, r.cache);
  r.reconstruction = detail::tensor_of(r.cache.decoder_activations.back(), x.n(), x.d());
  return r;
}

namespace detail {

// Root-mean-square deviation from the per-column mean of one variable's rows.
inline double centered_rms(const Matrix& rows, std::size_t n, std::size_t d, std::size_t var) {
  const std::size_t w = rows.cols();
  double total = 0.0;
  for (std::size_t c = 0; c < w; ++c) {
    double mean = 0.0;
    for (std::size_t s = 0; s < n; ++s) mean += rows(s * d + var, c);
    mean /= static_cast<double>(n);
    for (std::size_t s = 0; s < n; ++s) {
      const double e = rows(s * d + var, c) - mean;
      total += e * e;
    }
  }
  return std::sqrt(total / static_cast<double>(n));
}

}  // namespace detail

// A rescaled by the gains of the shared maps on the data:
//   Ã[i][k] = e_i · A[i][k] · g_k,  e_i = rms(H_i) / rms(X_i),  g_k = rms(X̂_k) / rms(H'_k)
// with rms taken about the mean. Rescaling A by c while the encoder output (or
// the decoder input) scales by 1/c leaves X̂ unchanged; Ã is invariant to both.
// Identity maps have unit gain, so the linear model gets Ã = A. The rescaling is
// diagonal on each side, so Ã has exactly the support of A.
inline WeightedAdjacency effective_adjacency(const GaeParams& params, const Tensor3& x) {
  ForwardCache cache;
  forward_into(params, x, cache);
  const std::size_t n = x.n();
  const std::size_t d = x.d();
  std::vector<double> enc(d, 1.0), dec(d, 1.0);
  Matrix input;
  detail::copy_rows(x, input);
  for (std::size_t v = 0; v < d; ++v) {
    if (!params.encoder.is_identity()) {
      const double in = detail::centered_rms(input, n, d, v);
      enc[v] = in > 0.0 ? detail::centered_rms(cache.encoder_activations.back(), n, d, v) / in : 0.0;
    }
    if (!params.decoder.is_identity()) {
      const double mixed = detail::centered_rms(cache.decoder_activations.front(), n, d, v);
      dec[v] = mixed > 0.0
                   ? detail::centered_rms(cache.decoder_activations.back(), n, d, v) / mixed
                   : 0.0;
    }
  }
  WeightedAdjacency out = params.adjacency;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < d; ++k) out(i, k) *= enc[i] * dec[k];
  return out;
}

struct LossParts {
  double total = 0.0;
  double recon = 0.0;
  double l1 = 0.0;
};

namespace detail {

inline double half_mean_sq(std::span<const double> a, std::span<const double> b, std::size_t n) {
  require(a.size() == b.size(), "reconstruction_error: shape mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double r = a[k] - b[k];
    s += r * r;
  }
  return s / (2.0 * static_cast<double>(n));
}

}  // namespace detail

inline double reconstruction_error(const Tensor3& x, const Tensor3& xhat) {
  require(x.same_shape(xhat), "reconstruction_error: shape mismatch");
  return detail::half_mean_sq(x.data(), xhat.data(), x.n());
}

inline double reconstruction_error(const Tensor3& x, const ForwardCache& cache) {
  return detail::half_mean_sq(x.data(), cache.decoder_activations.back().data(), x.n());
}

inline double l1_norm(const Matrix& a) {
  double s = 0.0;
  for (double v : a.data()) s += std::abs(v);
  return s;
}

// recon = (1/2n) Σ_j ||X^(j) - X̂^(j)||²_F, l1 = λ||A||₁.
inline LossParts loss(const GaeParams& params, const Tensor3& x, double lambda) {
  require(lambda >= 0.0, "loss: lambda must be non-negative");
  ForwardCache cache;
  forward_into(params, x, cache);
  LossParts p;
  p.recon = reconstruction_error(x, cache);
  p.l1 = lambda * l1_norm(params.adjacency.matrix());
  p.total = p.recon + p.l1;
  return p;
}

// Value of the augmented Lagrangian and its pieces.
struct LagrangianValue {
  double value = 0.0;
  double recon = 0.0;
  double l1 = 0.0;
  double h = 0.0;
};

inline LagrangianValue augmented_lagrangian(const GaeParams& params, const Tensor3& x,
                                            double lambda, double alpha, double rho) {
  const LossParts p = loss(params, x, lambda);
  LagrangianValue v;
  v.recon = p.recon;
  v.l1 = p.l1;
  v.h = acyclicity_terms(params.adjacency.matrix()).h;
  v.value = p.total + alpha * v.h + 0.5 * rho * v.h * v.h;
  return v;
}

// Scratch buffers for backward, kept across calls by the training loop.
struct BackwardWorkspace {
  Matrix grad;
  Matrix spare;
};

// Reverse-mode gradient of recon + λ||A||₁ + α h(A) + (ρ/2) h(A)² with respect to
// A and both MLPs. The ℓ1 term uses sign(A) with sign(0) = 0.
inline void backward_into(const GaeParams& params, const Tensor3& x, const ForwardCache& cache,
                          double lambda, double alpha, double rho, Gradients& g,
                          BackwardWorkspace& ws) {
  const std::size_t n = x.n();
  const std::size_t d = x.d();
  require(cache.n == n && cache.d == d, "backward: cache was produced for a different dataset");
  require(cache.encoder_activations.size() == params.encoder.layers.size() + 1 &&
              cache.decoder_activations.size() == params.decoder.layers.size() + 1,
          "backward: cache layer count does not match parameters");
  require(cache.decoder_activations.back().rows() == n * d &&
              cache.decoder_activations.back().cols() == params.l &&
              cache.encoder_activations.back().cols() == params.l_latent,
          "backward: cache shapes do not match parameters");

  if (!g.d_adjacency.same_shape(params.adjacency.matrix())) {
    g.d_adjacency = Matrix(d, d);
    g.d_encoder = detail::zeros_like(params.encoder);
    g.d_decoder = detail::zeros_like(params.decoder);
  } else {
    g.d_adjacency.fill(0.0);
    for (MlpParams* m : {&g.d_encoder, &g.d_decoder})
      for (DenseLayer& layer : m->layers) {
        layer.weights.fill(0.0);
        std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
      }
  }

  const Matrix& xhat = cache.decoder_activations.back();
  ws.grad.resize(n * d, params.l);
  {
    const double inv_n = 1.0 / static_cast<double>(n);
    auto xd = x.data();
    auto hd = xhat.data();
    auto gd = ws.grad.data();
    for (std::size_t k = 0; k < gd.size(); ++k) gd[k] = (hd[k] - xd[k]) * inv_n;
  }

  // ws.spare becomes dL/dH'.
  if (params.decoder.is_identity()) {
    std::swap(ws.grad, ws.spare);
  } else {
    detail::mlp_backward(params.decoder, cache.decoder_activations, ws.grad, g.d_decoder,
                         &ws.spare);
  }

  const Matrix& a = params.adjacency.matrix();
  Matrix& d_latent = ws.grad;
  detail::mix_rows_backward(a, cache.encoder_activations.back(), ws.spare, n, d, g.d_adjacency,
                            d_latent);

  if (!params.encoder.is_identity())
    detail::mlp_backward(params.encoder, cache.encoder_activations, d_latent, g.d_encoder,
                         nullptr);

  const AcyclicityTerms terms = acyclicity_terms(a);
  const Matrix gh = grad_h(a, terms);
  const double coeff = alpha + rho * terms.h;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      const double v = a(i, k);
      const double sign = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
      g.d_adjacency(i, k) += lambda * sign + coeff * gh(i, k);
    }
  }
}

inline Gradients backward(const GaeParams& params, const Tensor3& x, const ForwardCache& cache,
                          double lambda, double alpha, double rho) {
  Gradients g;
  BackwardWorkspace ws;
  backward_into(params, x, cache, lambda, alpha, rho, g, ws);
  return g;
}


// Visits every trainable array of the parameters alongside the matching gradient.
template <typename Fn>
void for_each_parameter(GaeParams& params, const Gradients& grads, Fn&& fn) {
  fn(params.adjacency.matrix().data(), grads.d_adjacency.data());
  auto visit = [&](MlpParams& mlp, const MlpParams& gm) {
    for (std::size_t k = 0; k < mlp.layers.size(); ++k) {
      fn(mlp.layers[k].weights.data(), gm.layers[k].weights.data());
      fn(std::span<double>(mlp.layers[k].bias), std::span<const double>(gm.layers[k].bias));
    }
  };
  visit(params.encoder, grads.d_encoder);
  visit(params.decoder, grads.d_decoder);
}

template <typename Fn>
void for_each_parameter(GaeParams& params, Fn&& fn) {
  fn(params.adjacency.matrix().data());
  for (MlpParams* mlp : {&params.encoder, &params.decoder}) {
    for (DenseLayer& layer : mlp->layers) {
      fn(layer.weights.data());
      fn(std::span<double>(layer.bias));
    }
  }
}

inline std::size_t parameter_count(const GaeParams& params) {
  std::size_t count = 0;
  GaeParams copy = params;
  for_each_parameter(copy, [&](std::span<double> p) { count += p.size(); });
  return count;
}

namespace detail {

inline MlpParams random_mlp(std::size_t in, std::size_t out, std::size_t hidden,
                            std::size_t layers, std::mt19937_64& rng) {
  MlpParams mlp{in, out, {}};
  for (std::size_t k = 0; k < layers; ++k) {
    const std::size_t din = k == 0 ? in : hidden;
    const std::size_t dout = k + 1 == layers ? out : hidden;
    const double bound = 1.0 / std::sqrt(static_cast<double>(din));
    std::uniform_real_distribution<double> dist(-bound, bound);
    DenseLayer layer{Matrix(din, dout), std::vector<double>(dout),
                     k + 1 == layers ? Activation::Identity : Activation::Relu};
    for (double& v : layer.weights.data()) v = dist(rng);
    for (double& v : layer.bias) v = dist(rng);
    mlp.layers.push_back(std::move(layer));
  }
  return mlp;
}

}  // namespace detail

// A = 0; MLP weights and biases uniform on ±1/sqrt(fan_in); hidden layers use ReLU
// and the output layer is linear.
inline GaeParams init_params(std::size_t d, std::size_t l, std::size_t l_latent,
                             std::size_t hidden, std::size_t layers, std::uint64_t seed) {
  require(d >= 1 && l >= 1 && l_latent >= 1 && hidden >= 1 && layers >= 1,
          "init_params: all counts must be >= 1");
  std::mt19937_64 rng(seed);
  GaeParams p;
  p.adjacency = WeightedAdjacency(d);
  p.l = l;
  p.l_latent = l_latent;
  p.encoder = detail::random_mlp(l, l_latent, hidden, layers, rng);
  p.decoder = detail::random_mlp(l_latent, l, hidden, layers, rng);
  return p;
}

inline GaeParams init_params(const ModelConfig& cfg, std::size_t d, std::uint64_t seed) {
  switch (cfg.kind) {
    case ModelKind::Gae:
      return init_params(d, cfg.l, cfg.l_latent, cfg.hidden, cfg.layers, seed);
    case ModelKind::GaeAdditive: {
      GaeParams p = init_params(d, cfg.l, cfg.l, cfg.hidden, cfg.layers, seed);
      p.decoder = MlpParams::identity(cfg.l);
      return p;
    }
    case ModelKind::Linear: {
      require(d >= 1 && cfg.l >= 1, "init_params: all counts must be >= 1");
      GaeParams p;
      p.adjacency = WeightedAdjacency(d);
      p.l = cfg.l;
      p.l_latent = cfg.l;
      p.encoder = MlpParams::identity(cfg.l);
      p.decoder = MlpParams::identity(cfg.l);
      return p;
    }
  }
  throw PreconditionError("init_params: unknown model kind");
}

}  // namespace gaecausal
