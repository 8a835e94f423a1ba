#include "hplan/nn.hpp"

#include <cmath>

#include "hplan/errors.hpp"
#include "hplan/simd.hpp"

namespace hplan::nn {
namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

Linear Linear::make(ParameterLayout& layout, std::size_t in, std::size_t out) {
  Linear l;
  l.in = in;
  l.out = out;
  l.w = layout.allocate(in * out);
  l.b = layout.allocate(out);
  return l;
}

void Linear::init(std::span<double> params, std::mt19937_64& rng, double gain) const {
  const double limit = gain * std::sqrt(6.0 / static_cast<double>(in + out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (std::size_t i = 0; i < in * out; ++i) params[w + i] = dist(rng);
  for (std::size_t i = 0; i < out; ++i) params[b + i] = 0.0;
}

void Linear::forward(std::span<const double> params, const double* x, double* y) const {
  simd::active_kernels().gemv(params.data() + w, out, in, x, params.data() + b, y);
}

void Linear::backward(std::span<const double> params, const double* x, const double* dy, std::span<double> grads,
                      double* dx) const {
  const simd::KernelTable& k = simd::active_kernels();
  k.rank1_acc(grads.data() + w, out, in, dy, x);
  for (std::size_t i = 0; i < out; ++i) grads[b + i] += dy[i];
  if (dx) k.gemv_t_acc(params.data() + w, out, in, dy, dx);
}

Mlp Mlp::make(ParameterLayout& layout, std::size_t in, std::span<const int> hidden, std::size_t out) {
  Mlp m;
  std::size_t prev = in;
  for (int h : hidden) {
    m.layers.push_back(Linear::make(layout, prev, static_cast<std::size_t>(h)));
    prev = static_cast<std::size_t>(h);
  }
  m.layers.push_back(Linear::make(layout, prev, out));
  return m;
}

void Mlp::init(std::span<double> params, std::mt19937_64& rng, double out_gain) const {
  for (std::size_t i = 0; i < layers.size(); ++i) layers[i].init(params, rng, i + 1 == layers.size() ? out_gain : 1.0);
}

void Mlp::forward(std::span<const double> params, std::span<const double> x, Cache& cache,
                  std::span<double> y) const {
  cache.acts.resize(layers.size());
  cache.acts[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const Linear& lin = layers[l];
    const bool last = l + 1 == layers.size();
    if (last) {
      lin.forward(params, cache.acts[l].data(), y.data());
    } else {
      std::vector<double>& next = cache.acts[l + 1];
      next.resize(lin.out);
      lin.forward(params, cache.acts[l].data(), next.data());
      for (double& v : next) v = std::tanh(v);
    }
  }
}

void Mlp::backward(std::span<const double> params, const Cache& cache, std::span<const double> dy,
                   std::span<double> grads, std::span<double> dx) const {
  std::vector<double> delta(dy.begin(), dy.end());
  for (std::size_t l = layers.size(); l-- > 0;) {
    const Linear& lin = layers[l];
    const std::vector<double>& x = cache.acts[l];
    if (l == 0) {
      lin.backward(params, x.data(), delta.data(), grads, dx.empty() ? nullptr : dx.data());
      break;
    }
    std::vector<double> dprev(lin.in, 0.0);
    lin.backward(params, x.data(), delta.data(), grads, dprev.data());
    // x = tanh(pre), so dpre = dx * (1 - x^2).
    for (std::size_t i = 0; i < lin.in; ++i) dprev[i] *= 1.0 - x[i] * x[i];
    delta.swap(dprev);
  }
}

LstmCell LstmCell::make(ParameterLayout& layout, std::size_t in, std::size_t hidden) {
  LstmCell cell;
  cell.in = in;
  cell.hidden = hidden;
  cell.w = layout.allocate(4 * hidden * in);
  cell.u = layout.allocate(4 * hidden * hidden);
  cell.b = layout.allocate(4 * hidden);
  return cell;
}

void LstmCell::init(std::span<double> params, std::mt19937_64& rng) const {
  const double limit = 1.0 / std::sqrt(static_cast<double>(hidden));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (std::size_t i = 0; i < 4 * hidden * in; ++i) params[w + i] = dist(rng);
  for (std::size_t i = 0; i < 4 * hidden * hidden; ++i) params[u + i] = dist(rng);
  for (std::size_t i = 0; i < 4 * hidden; ++i) params[b + i] = 0.0;
  for (std::size_t i = hidden; i < 2 * hidden; ++i) params[b + i] = 1.0;  // forget gate bias
}

void LstmCell::step(std::span<const double> params, std::span<const double> x, std::span<const double> h_prev,
                    std::span<const double> c_prev, std::span<double> h, std::span<double> c,
                    StepCache* cache) const {
  const simd::KernelTable& k = simd::active_kernels();
  std::vector<double> z(4 * hidden), zu(4 * hidden);
  k.gemv(params.data() + w, 4 * hidden, in, x.data(), params.data() + b, z.data());
  k.gemv(params.data() + u, 4 * hidden, hidden, h_prev.data(), nullptr, zu.data());
  for (std::size_t i = 0; i < 4 * hidden; ++i) z[i] += zu[i];

  if (cache) {
    cache->x.assign(x.begin(), x.end());
    cache->h_prev.assign(h_prev.begin(), h_prev.end());
    cache->c_prev.assign(c_prev.begin(), c_prev.end());
    cache->i.resize(hidden);
    cache->f.resize(hidden);
    cache->g.resize(hidden);
    cache->o.resize(hidden);
    cache->c.resize(hidden);
    cache->tanh_c.resize(hidden);
  }
  for (std::size_t j = 0; j < hidden; ++j) {
    const double ig = sigmoid(z[j]);
    const double fg = sigmoid(z[hidden + j]);
    const double gg = std::tanh(z[2 * hidden + j]);
    const double og = sigmoid(z[3 * hidden + j]);
    const double cj = fg * c_prev[j] + ig * gg;
    const double tc = std::tanh(cj);
    if (cache) {
      cache->i[j] = ig;
      cache->f[j] = fg;
      cache->g[j] = gg;
      cache->o[j] = og;
      cache->c[j] = cj;
      cache->tanh_c[j] = tc;
    }
    c[j] = cj;
    h[j] = og * tc;
  }
}

void LstmCell::backward(std::span<const double> params, const StepCache& cache, std::span<const double> dh,
                        std::span<const double> dc, std::span<double> grads, std::span<double> dx,
                        std::span<double> dh_prev, std::span<double> dc_prev) const {
  const simd::KernelTable& k = simd::active_kernels();
  std::vector<double> dz(4 * hidden);
  for (std::size_t j = 0; j < hidden; ++j) {
    const double ig = cache.i[j], fg = cache.f[j], gg = cache.g[j], og = cache.o[j], tc = cache.tanh_c[j];
    const double dcj = dc[j] + dh[j] * og * (1.0 - tc * tc);
    dz[j] = dcj * gg * ig * (1.0 - ig);
    dz[hidden + j] = dcj * cache.c_prev[j] * fg * (1.0 - fg);
    dz[2 * hidden + j] = dcj * ig * (1.0 - gg * gg);
    dz[3 * hidden + j] = dh[j] * tc * og * (1.0 - og);
    dc_prev[j] = dcj * fg;
  }
  k.rank1_acc(grads.data() + w, 4 * hidden, in, dz.data(), cache.x.data());
  k.rank1_acc(grads.data() + u, 4 * hidden, hidden, dz.data(), cache.h_prev.data());
  for (std::size_t i = 0; i < 4 * hidden; ++i) grads[b + i] += dz[i];
  for (std::size_t j = 0; j < hidden; ++j) dh_prev[j] = 0.0;
  k.gemv_t_acc(params.data() + u, 4 * hidden, hidden, dz.data(), dh_prev.data());
  if (!dx.empty()) k.gemv_t_acc(params.data() + w, 4 * hidden, in, dz.data(), dx.data());
}

void Adam::step(std::span<double> params, std::span<const double> grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) throw InvalidArgument("optimizer size mismatch");
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i] * grads[i];
    params[i] -= lr_ * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + eps_);
  }
}

double clip_grad_norm(std::span<double> grads, double max_norm) {
  double sq = 0.0;
  for (double g : grads) sq += g * g;
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (double& g : grads) g *= scale;
  }
  return norm;
}

}  // namespace hplan::nn
