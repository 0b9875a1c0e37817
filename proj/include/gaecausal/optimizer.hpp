#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "gaecausal/acyclicity.hpp"
#include "gaecausal/error.hpp"
#include "gaecausal/model.hpp"
#include "gaecausal/tensor.hpp"

namespace gaecausal {

struct TrainConfig {
  double lambda = 0.01;
  double lr = 1e-3;
  std::size_t inner_steps = 1000;
  std::size_t max_outer = 20;
  double beta = 10.0;   // penalty growth factor
  double gamma = 0.25;  // required progress ratio on |h|
  double h_tol = 1e-8;
  double rho_max = 1e16;
  double rho_init = 1.0;
  double alpha_init = 0.0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  bool zero_diagonal = false;
  std::uint64_t seed = 0;

  void validate() const {
    require(lambda >= 0.0, "TrainConfig: lambda must be >= 0");
    require(lr > 0.0, "TrainConfig: lr must be > 0");
    require(inner_steps >= 1, "TrainConfig: inner_steps must be >= 1");
    require(max_outer >= 1, "TrainConfig: max_outer must be >= 1");
    require(beta > 1.0, "TrainConfig: beta must be > 1");
    require(gamma > 0.0 && gamma < 1.0, "TrainConfig: gamma must lie in (0, 1)");
    require(h_tol > 0.0, "TrainConfig: h_tol must be > 0");
    require(rho_init > 0.0 && rho_max >= rho_init, "TrainConfig: need 0 < rho_init <= rho_max");
    require(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0,
            "TrainConfig: Adam betas must lie in [0, 1)");
    require(adam_eps > 0.0, "TrainConfig: adam_eps must be > 0");
  }
};

// Bias-corrected Adam moments, one buffer per parameter array in
// for_each_parameter order.
struct AdamState {
  std::vector<std::vector<double>> first;
  std::vector<std::vector<double>> second;
  std::uint64_t t = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState for_params(const GaeParams& params, double lr, double beta1 = 0.9,
                              double beta2 = 0.999, double eps = 1e-8) {
    AdamState s;
    s.lr = lr;
    s.beta1 = beta1;
    s.beta2 = beta2;
    s.eps = eps;
    GaeParams copy = params;
    for_each_parameter(copy, [&](std::span<double> p) {
      s.first.emplace_back(p.size(), 0.0);
      s.second.emplace_back(p.size(), 0.0);
    });
    return s;
  }
};

// One Adam update on raw arrays. Shared by the model update and by scalar tests.
inline void adam_update(std::span<double> param, std::span<const double> grad,
                        std::span<double> first, std::span<double> second, std::uint64_t t,
                        double lr, double beta1, double beta2, double eps) {
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (std::size_t k = 0; k < param.size(); ++k) {
    const double g = grad[k];
    first[k] = beta1 * first[k] + (1.0 - beta1) * g;
    second[k] = beta2 * second[k] + (1.0 - beta2) * g * g;
    const double m_hat = first[k] / c1;
    const double v_hat = second[k] / c2;
    param[k] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

inline void adam_step(AdamState& state, GaeParams& params, const Gradients& grads) {
  ++state.t;
  std::size_t slot = 0;
  for_each_parameter(params, grads, [&](std::span<double> p, std::span<const double> g) {
    require(slot < state.first.size() && state.first[slot].size() == p.size() &&
                g.size() == p.size(),
            "adam_step: state, parameter and gradient shapes differ");
    adam_update(p, g, state.first[slot], state.second[slot], state.t, state.lr, state.beta1,
                state.beta2, state.eps);
    ++slot;
  });
  require(slot == state.first.size(), "adam_step: state has extra buffers");
}

inline void clear_diagonal(GaeParams& params) {
  for (std::size_t i = 0; i < params.d(); ++i) params.adjacency(i, i) = 0.0;
}

struct InnerResult {
  GaeParams params;
  LagrangianValue initial;
  LagrangianValue best;
  std::size_t best_step = 0;  // 0 means the entry iterate
  std::size_t steps = 0;
};

namespace detail {

inline LagrangianValue evaluate(const GaeParams& params, const Tensor3& x,
                                const ForwardCache& cache, double lambda, double alpha,
                                double rho) {
  LagrangianValue v;
  v.recon = reconstruction_error(x, cache);
  v.l1 = lambda * l1_norm(params.adjacency.matrix());
  v.h = acyclicity_terms(params.adjacency.matrix()).h;
  v.value = v.recon + v.l1 + alpha * v.h + 0.5 * rho * v.h * v.h;
  return v;
}

}  // namespace detail

// Full-batch Adam on L_ρ for cfg.inner_steps iterations with fresh moments.
// Returns the best iterate seen, so the exit value never exceeds the entry value.
inline InnerResult inner_solve(const GaeParams& start, const Tensor3& x, const TrainConfig& cfg,
                               double alpha, double rho) {
  require(cfg.inner_steps >= 1, "inner_solve: inner_steps must be >= 1");
  GaeParams params = start;
  if (cfg.zero_diagonal) clear_diagonal(params);
  AdamState adam =
      AdamState::for_params(params, cfg.lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);

  InnerResult result;
  ForwardCache cache;
  Gradients grads;
  BackwardWorkspace workspace;
  for (std::size_t step = 0; step <= cfg.inner_steps; ++step) {
    forward_into(params, x, cache);
    const LagrangianValue value = detail::evaluate(params, x, cache, cfg.lambda, alpha, rho);
    if (!std::isfinite(value.value))
      throw DivergenceError("inner_solve: non-finite augmented Lagrangian at step " +
                            std::to_string(step) + " (rho=" + std::to_string(rho) + ")");
    if (step == 0) {
      result.initial = value;
      result.best = value;
      result.params = params;
    } else if (value.value < result.best.value) {
      result.best = value;
      result.best_step = step;
      result.params = params;
    }
    if (step == cfg.inner_steps) break;
    backward_into(params, x, cache, cfg.lambda, alpha, rho, grads, workspace);
    if (cfg.zero_diagonal)
      for (std::size_t i = 0; i < params.d(); ++i) grads.d_adjacency(i, i) = 0.0;
    adam_step(adam, params, grads);
  }
  result.steps = cfg.inner_steps;
  return result;
}

struct AugLagState {
  double alpha = 0.0;
  double rho = 1.0;
  double h_prev = std::numeric_limits<double>::infinity();
  std::size_t outer_iter = 0;
};

// ρ ← βρ when |h_new| ≥ γ|h_prev|, otherwise unchanged.
inline double next_rho(double rho, double h_prev, double h_new, double beta, double gamma) {
  return std::abs(h_new) >= gamma * std::abs(h_prev) ? beta * rho : rho;
}

// α ← α + ρ·h.
inline double next_alpha(double alpha, double rho, double h_new) { return alpha + rho * h_new; }

enum class Termination { Converged, RhoLimit, MaxOuter };

inline std::string to_string(Termination t) {
  switch (t) {
    case Termination::Converged: return "converged";
    case Termination::RhoLimit: return "rho_max";
    case Termination::MaxOuter: return "max_outer";
  }
  return "?";
}

// One row per outer iteration: the multiplier and penalty used by the inner
// solve and the objective pieces at its returned iterate.
struct OuterRecord {
  std::size_t iteration = 0;
  double alpha = 0.0;
  double rho = 0.0;
  double h = 0.0;
  double recon = 0.0;
  double l1 = 0.0;
  double lagrangian = 0.0;
  std::size_t best_step = 0;
};

struct TrainReport {
  std::string method;
  std::vector<std::size_t> encoder_dims;
  std::vector<std::size_t> decoder_dims;
  std::vector<OuterRecord> trace;
  Termination termination = Termination::MaxOuter;
  std::size_t outer_iterations = 0;
  double final_h = 0.0;
  double final_alpha = 0.0;
  double final_rho = 0.0;
  double wall_time_seconds = 0.0;
};

inline std::vector<std::size_t> layer_dims(const MlpParams& mlp) {
  std::vector<std::size_t> dims{mlp.in_dim};
  for (const DenseLayer& layer : mlp.layers) dims.push_back(layer.out_dim());
  if (mlp.layers.empty()) dims.push_back(mlp.out_dim);
  return dims;
}

struct TrainResult {
  GaeParams params;
  TrainReport report;
};

// Augmented Lagrangian outer loop. Each outer iteration warm-starts the inner
// solve from the previous parameters, then updates α and ρ.
inline TrainResult train(const Tensor3& x, const TrainConfig& cfg, const ModelConfig& arch) {
  cfg.validate();
  require(x.n() >= 1, "train: need at least one sample");
  require(x.d() >= 2, "train: need at least two variables");
  require(x.all_finite(), "train: dataset contains non-finite values");
  require(arch.l == x.l(), "train: model l=" + std::to_string(arch.l) +
                               " does not match dataset l=" + std::to_string(x.l()));
  const auto started = std::chrono::steady_clock::now();

  TrainResult out;
  out.params = init_params(arch, x.d(), cfg.seed);
  out.report.method = to_string(arch.kind);
  out.report.encoder_dims = layer_dims(out.params.encoder);
  out.report.decoder_dims = layer_dims(out.params.decoder);

  AugLagState state;
  state.alpha = cfg.alpha_init;
  state.rho = cfg.rho_init;

  Termination reason = Termination::MaxOuter;
  for (std::size_t k = 0; k < cfg.max_outer; ++k) {
    InnerResult inner = [&] {
      try {
        return inner_solve(out.params, x, cfg, state.alpha, state.rho);
      } catch (const DivergenceError& e) {
        std::string trace;
        for (const OuterRecord& r : out.report.trace)
          trace += " [outer " + std::to_string(r.iteration) + ": h=" + std::to_string(r.h) +
                   " rho=" + std::to_string(r.rho) + " L=" + std::to_string(r.lagrangian) + "]";
        throw DivergenceError(std::string(e.what()) + "; trace:" + trace);
      }
    }();
    out.params = std::move(inner.params);
    const double h_new = inner.best.h;
    out.report.trace.push_back(OuterRecord{k, state.alpha, state.rho, h_new, inner.best.recon,
                                           inner.best.l1, inner.best.value, inner.best_step});
    state.outer_iter = k + 1;

    if (std::abs(h_new) <= cfg.h_tol) {
      reason = Termination::Converged;
      state.h_prev = h_new;
      break;
    }
    state.alpha = next_alpha(state.alpha, state.rho, h_new);
    state.rho = next_rho(state.rho, state.h_prev, h_new, cfg.beta, cfg.gamma);
    state.h_prev = h_new;
    if (state.rho > cfg.rho_max) {
      reason = Termination::RhoLimit;
      break;
    }
  }

  out.report.termination = reason;
  out.report.outer_iterations = state.outer_iter;
  out.report.final_h = state.h_prev;
  out.report.final_alpha = state.alpha;
  out.report.final_rho = state.rho;
  out.report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return out;
}

}  // namespace gaecausal
