// Compiled with -mavx2 -mfma; only reached after CPUID confirms support.

#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "hplan/simd.hpp"

namespace hplan::simd {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// exp(x) for x <= 0: range reduction to |r| <= ln2/2, degree-13 Taylor
// polynomial, then scaling by 2^n through the exponent bits. Relative error
// stays within a few ulp; inputs below -708 flush to zero.
inline __m256d exp_nonpositive(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634);
  const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
  const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
  const __m256d lower = _mm256_set1_pd(-708.0);
  const __m256d underflow = _mm256_cmp_pd(x, lower, _CMP_LT_OQ);
  x = _mm256_max_pd(x, lower);

  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, ln2_hi, x);
  r = _mm256_fnmadd_pd(n, ln2_lo, r);

  static constexpr double kInvFact[] = {
      1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0, 1.0 / 362880.0,
      1.0 / 40320.0,      1.0 / 5040.0,      1.0 / 720.0,      1.0 / 120.0,     1.0 / 24.0,
      1.0 / 6.0,          0.5,               1.0,              1.0};
  __m256d p = _mm256_set1_pd(kInvFact[0]);
  for (int k = 1; k < 14; ++k) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(kInvFact[k]));

  const __m256d magic = _mm256_set1_pd(6755399441055744.0);  // 1.5 * 2^52
  __m256i ni = _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(n, magic)),
                                _mm256_castpd_si256(magic));
  ni = _mm256_slli_epi64(_mm256_add_epi64(ni, _mm256_set1_epi64x(1023)), 52);
  const __m256d result = _mm256_mul_pd(p, _mm256_castsi256_pd(ni));
  return _mm256_andnot_pd(underflow, result);
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void gemv_avx2(const double* w, std::size_t rows, std::size_t cols, const double* x,
               const double* bias, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double acc = dot_avx2(w + r * cols, x, cols);
    y[r] = bias ? acc + bias[r] : acc;
  }
}

void gemv_t_acc_avx2(const double* w, std::size_t rows, std::size_t cols, const double* dy,
                     double* dx) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = w + r * cols;
    const __m256d g = _mm256_set1_pd(dy[r]);
    std::size_t c = 0;
    for (; c + 4 <= cols; c += 4)
      _mm256_storeu_pd(dx + c, _mm256_fmadd_pd(_mm256_loadu_pd(row + c), g, _mm256_loadu_pd(dx + c)));
    for (; c < cols; ++c) dx[c] += row[c] * dy[r];
  }
}

void rank1_acc_avx2(double* g, std::size_t rows, std::size_t cols, const double* dy,
                    const double* x) {
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = g + r * cols;
    const __m256d d = _mm256_set1_pd(dy[r]);
    std::size_t c = 0;
    for (; c + 4 <= cols; c += 4)
      _mm256_storeu_pd(row + c, _mm256_fmadd_pd(d, _mm256_loadu_pd(x + c), _mm256_loadu_pd(row + c)));
    for (; c < cols; ++c) row[c] += dy[r] * x[c];
  }
}

void poly_eval_avx2(const double* coeffs, std::size_t n_coeffs, const double* t, std::size_t n,
                    double* p, double* dp, double* ddp, double* dddp) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d ti = _mm256_loadu_pd(t + i);
    __m256d v0 = _mm256_setzero_pd(), v1 = _mm256_setzero_pd();
    __m256d v2 = _mm256_setzero_pd(), v3 = _mm256_setzero_pd();
    for (std::size_t k = n_coeffs; k-- > 0;) {
      const double kd = static_cast<double>(k);
      v0 = _mm256_fmadd_pd(v0, ti, _mm256_set1_pd(coeffs[k]));
      if (k >= 1) v1 = _mm256_fmadd_pd(v1, ti, _mm256_set1_pd(kd * coeffs[k]));
      if (k >= 2) v2 = _mm256_fmadd_pd(v2, ti, _mm256_set1_pd(kd * (kd - 1.0) * coeffs[k]));
      if (k >= 3) v3 = _mm256_fmadd_pd(v3, ti, _mm256_set1_pd(kd * (kd - 1.0) * (kd - 2.0) * coeffs[k]));
    }
    _mm256_storeu_pd(p + i, v0);
    _mm256_storeu_pd(dp + i, v1);
    _mm256_storeu_pd(ddp + i, v2);
    _mm256_storeu_pd(dddp + i, v3);
  }
  if (i < n) scalar_kernels().poly_eval(coeffs, n_coeffs, t + i, n - i, p + i, dp + i, ddp + i, dddp + i);
}

void footprint_prob_avx2(const double* xs, const double* ys, std::size_t n,
                         const GaussianFootprint& g, double* out) {
  const __m256d mx = _mm256_set1_pd(g.mean_x), my = _mm256_set1_pd(g.mean_y);
  const __m256d ixx = _mm256_set1_pd(g.inv_xx), ixy = _mm256_set1_pd(g.inv_xy);
  const __m256d iyy = _mm256_set1_pd(g.inv_yy), scale = _mm256_set1_pd(g.scale);
  const __m256d neg_half = _mm256_set1_pd(-0.5), one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), mx);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), my);
    const __m256d ax = _mm256_fmadd_pd(ixx, dx, _mm256_mul_pd(ixy, dy));
    const __m256d ay = _mm256_fmadd_pd(ixy, dx, _mm256_mul_pd(iyy, dy));
    const __m256d q = _mm256_fmadd_pd(dx, ax, _mm256_mul_pd(dy, ay));
    const __m256d e = exp_nonpositive(_mm256_mul_pd(neg_half, q));
    _mm256_storeu_pd(out + i, _mm256_min_pd(one, _mm256_mul_pd(scale, e)));
  }
  if (i < n) scalar_kernels().footprint_prob(xs + i, ys + i, n - i, g, out + i);
}

void max_inplace_avx2(double* acc, const double* v, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(acc + i, _mm256_max_pd(_mm256_loadu_pd(acc + i), _mm256_loadu_pd(v + i)));
  for (; i < n; ++i) acc[i] = std::max(acc[i], v[i]);
}

}  // namespace

const KernelTable* avx2_kernels_unchecked() {
  static const KernelTable table{dot_avx2,       gemv_avx2,           gemv_t_acc_avx2, rank1_acc_avx2,
                                 poly_eval_avx2, footprint_prob_avx2, max_inplace_avx2};
  return &table;
}

}  // namespace hplan::simd
