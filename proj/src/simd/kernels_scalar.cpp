#include <algorithm>
#include <cmath>

#include "hplan/simd.hpp"

namespace hplan::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void gemv_scalar(const double* w, std::size_t rows, std::size_t cols, const double* x,
                 const double* bias, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = w + r * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    y[r] = bias ? acc + bias[r] : acc;
  }
}

void gemv_t_acc_scalar(const double* w, std::size_t rows, std::size_t cols, const double* dy,
                       double* dx) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = w + r * cols;
    const double g = dy[r];
    for (std::size_t c = 0; c < cols; ++c) dx[c] += row[c] * g;
  }
}

void rank1_acc_scalar(double* g, std::size_t rows, std::size_t cols, const double* dy,
                      const double* x) {
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = g + r * cols;
    const double d = dy[r];
    for (std::size_t c = 0; c < cols; ++c) row[c] += d * x[c];
  }
}

void poly_eval_scalar(const double* coeffs, std::size_t n_coeffs, const double* t, std::size_t n,
                      double* p, double* dp, double* ddp, double* dddp) {
  for (std::size_t i = 0; i < n; ++i) {
    const double ti = t[i];
    double v0 = 0.0, v1 = 0.0, v2 = 0.0, v3 = 0.0;
    // Horner on the polynomial and its derivatives, highest degree first.
    for (std::size_t k = n_coeffs; k-- > 0;) {
      const double kd = static_cast<double>(k);
      v0 = v0 * ti + coeffs[k];
      if (k >= 1) v1 = v1 * ti + kd * coeffs[k];
      if (k >= 2) v2 = v2 * ti + kd * (kd - 1.0) * coeffs[k];
      if (k >= 3) v3 = v3 * ti + kd * (kd - 1.0) * (kd - 2.0) * coeffs[k];
    }
    p[i] = v0;
    dp[i] = v1;
    ddp[i] = v2;
    dddp[i] = v3;
  }
}

void footprint_prob_scalar(const double* xs, const double* ys, std::size_t n,
                           const GaussianFootprint& g, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - g.mean_x;
    const double dy = ys[i] - g.mean_y;
    const double q = dx * (g.inv_xx * dx + g.inv_xy * dy) + dy * (g.inv_xy * dx + g.inv_yy * dy);
    out[i] = std::min(1.0, g.scale * std::exp(-0.5 * q));
  }
}

void max_inplace_scalar(double* acc, const double* v, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] = std::max(acc[i], v[i]);
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{dot_scalar,       gemv_scalar,           gemv_t_acc_scalar,
                                 rank1_acc_scalar, poly_eval_scalar,      footprint_prob_scalar,
                                 max_inplace_scalar};
  return table;
}

}  // namespace hplan::simd
