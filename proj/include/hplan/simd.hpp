#pragma once

// Data-parallel inner loops used by the planner and the policy network.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2/FMA variant. The variant is chosen once at startup from CPUID; the
// environment variable HPLAN_SIMD=scalar forces the reference path.

#include <cstddef>
#include <span>
#include <string_view>

namespace hplan::simd {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa);

/// Best ISA supported by this CPU (ignores overrides).
Isa detected_isa();

/// ISA currently used by the dispatching entry points below.
Isa active_isa();

/// Test hook: route dispatch through `isa`. Falls back to Scalar when the
/// CPU lacks support.
void force_isa(Isa isa);

/// Parameters of the density-times-area collision kernel for one
/// predicted obstacle step: p = min(1, scale * exp(-0.5 * q)), with
/// q = [dx dy] * inv_cov * [dx dy]^T.
struct GaussianFootprint {
  double mean_x = 0.0;
  double mean_y = 0.0;
  double inv_xx = 0.0;
  double inv_xy = 0.0;
  double inv_yy = 0.0;
  double scale = 0.0;
};

// One table per ISA; entry points dispatch through the active table.
struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  void (*gemv)(const double* w, std::size_t rows, std::size_t cols, const double* x,
               const double* bias, double* y);
  void (*gemv_t_acc)(const double* w, std::size_t rows, std::size_t cols, const double* dy,
                     double* dx);
  void (*rank1_acc)(double* g, std::size_t rows, std::size_t cols, const double* dy,
                    const double* x);
  void (*poly_eval)(const double* coeffs, std::size_t n_coeffs, const double* t, std::size_t n,
                    double* p, double* dp, double* ddp, double* dddp);
  void (*footprint_prob)(const double* xs, const double* ys, std::size_t n,
                         const GaussianFootprint& g, double* out);
  void (*max_inplace)(double* acc, const double* v, std::size_t n);
};

const KernelTable& scalar_kernels();
/// nullptr when the build or the CPU has no AVX2/FMA.
const KernelTable* avx2_kernels();
const KernelTable& active_kernels();

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active_kernels().dot(a.data(), b.data(), a.size());
}

/// y = W x + bias, W row-major rows x cols. bias may be empty.
inline void gemv(std::span<const double> w, std::size_t rows, std::size_t cols,
                 std::span<const double> x, std::span<const double> bias, std::span<double> y) {
  active_kernels().gemv(w.data(), rows, cols, x.data(), bias.empty() ? nullptr : bias.data(),
                        y.data());
}

/// dx += W^T dy.
inline void gemv_t_acc(std::span<const double> w, std::size_t rows, std::size_t cols,
                       std::span<const double> dy, std::span<double> dx) {
  active_kernels().gemv_t_acc(w.data(), rows, cols, dy.data(), dx.data());
}

/// G += dy x^T.
inline void rank1_acc(std::span<double> g, std::size_t rows, std::size_t cols,
                      std::span<const double> dy, std::span<const double> x) {
  active_kernels().rank1_acc(g.data(), rows, cols, dy.data(), x.data());
}

/// Evaluates sum_k c_k t^k and its first three derivatives at every t.
inline void poly_eval(std::span<const double> coeffs, std::span<const double> t, std::span<double> p,
                      std::span<double> dp, std::span<double> ddp, std::span<double> dddp) {
  active_kernels().poly_eval(coeffs.data(), coeffs.size(), t.data(), t.size(), p.data(), dp.data(),
                             ddp.data(), dddp.data());
}

inline void footprint_prob(std::span<const double> xs, std::span<const double> ys,
                           const GaussianFootprint& g, std::span<double> out) {
  active_kernels().footprint_prob(xs.data(), ys.data(), xs.size(), g, out.data());
}

inline void max_inplace(std::span<double> acc, std::span<const double> v) {
  active_kernels().max_inplace(acc.data(), v.data(), acc.size());
}

}  // namespace hplan::simd
