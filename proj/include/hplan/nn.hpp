#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace hplan::nn {

/// Views into a flat parameter vector. Layers only store offsets, so a
/// network can be evaluated against any parameter vector of the right
/// size (used by finite-difference checks and by the optimiser).
class ParameterLayout {
 public:
  std::size_t allocate(std::size_t n) {
    const std::size_t off = size_;
    size_ += n;
    return off;
  }
  std::size_t size() const { return size_; }

 private:
  std::size_t size_ = 0;
};

/// y = W x + b, W stored row-major (out x in).
struct Linear {
  std::size_t in = 0, out = 0;
  std::size_t w = 0, b = 0;

  static Linear make(ParameterLayout& layout, std::size_t in, std::size_t out);
  void init(std::span<double> params, std::mt19937_64& rng, double gain) const;
  void forward(std::span<const double> params, const double* x, double* y) const;
  /// Accumulates parameter gradients; adds W^T dy to dx when dx is non-null.
  void backward(std::span<const double> params, const double* x, const double* dy, std::span<double> grads,
                double* dx) const;
};

/// Fully connected network, tanh after every layer but the last.
struct Mlp {
  std::vector<Linear> layers;

  /// Activations kept for the backward pass; acts[0] is the input.
  struct Cache {
    std::vector<std::vector<double>> acts;
  };

  static Mlp make(ParameterLayout& layout, std::size_t in, std::span<const int> hidden, std::size_t out);
  void init(std::span<double> params, std::mt19937_64& rng, double out_gain) const;
  std::size_t in_dim() const { return layers.front().in; }
  std::size_t out_dim() const { return layers.back().out; }

  void forward(std::span<const double> params, std::span<const double> x, Cache& cache,
               std::span<double> y) const;
  /// dx may be empty when the input gradient is not needed.
  void backward(std::span<const double> params, const Cache& cache, std::span<const double> dy,
                std::span<double> grads, std::span<double> dx) const;
};

/// Standard LSTM cell, gate order (input, forget, candidate, output):
///   z = W x + U h_prev + b
///   c = f * c_prev + i * g,  h = o * tanh(c)
struct LstmCell {
  std::size_t in = 0, hidden = 0;
  std::size_t w = 0, u = 0, b = 0;

  struct StepCache {
    std::vector<double> x, h_prev, c_prev;
    std::vector<double> i, f, g, o, c, tanh_c;
  };

  static LstmCell make(ParameterLayout& layout, std::size_t in, std::size_t hidden);
  void init(std::span<double> params, std::mt19937_64& rng) const;

  /// h and c may alias h_prev / c_prev only when cache is null.
  void step(std::span<const double> params, std::span<const double> x, std::span<const double> h_prev,
            std::span<const double> c_prev, std::span<double> h, std::span<double> c, StepCache* cache) const;

  /// Given dL/dh and dL/dc at this step's outputs, accumulates parameter
  /// gradients and writes dL/dx (optional), dL/dh_prev and dL/dc_prev.
  void backward(std::span<const double> params, const StepCache& cache, std::span<const double> dh,
                std::span<const double> dc, std::span<double> grads, std::span<double> dx,
                std::span<double> dh_prev, std::span<double> dc_prev) const;
};

/// Adaptive moment estimation.
class Adam {
 public:
  Adam() = default;
  Adam(std::size_t n, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {}

  void step(std::span<double> params, std::span<const double> grads);
  void set_lr(double lr) { lr_ = lr; }
  std::int64_t steps() const { return t_; }

 private:
  double lr_ = 1e-3, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  std::int64_t t_ = 0;
  std::vector<double> m_, v_;
};

/// Scales grads so their L2 norm is at most max_norm; returns the norm
/// before scaling.
double clip_grad_norm(std::span<double> grads, double max_norm);

}  // namespace hplan::nn
