#include "hplan/polynomial.hpp"

#include <cmath>
#include <string>

#include "hplan/errors.hpp"

namespace hplan {

Quintic solve_lateral_quintic(double d0, double d0_dot, double d0_ddot, double d_target, double T) {
  if (!(T > 0.0)) throw InvalidArgument("quintic duration must be positive, got " + std::to_string(T));
  Quintic q;
  q.c[0] = d0;
  q.c[1] = d0_dot;
  q.c[2] = 0.5 * d0_ddot;
  // Residual boundary conditions once the initial terms are fixed.
  const double T2 = T * T, T3 = T2 * T;
  const double r0 = d_target - (q.c[0] + q.c[1] * T + q.c[2] * T2);
  const double r1 = -(q.c[1] + 2.0 * q.c[2] * T);
  const double r2 = -2.0 * q.c[2];
  q.c[3] = (10.0 * r0 - 4.0 * r1 * T + 0.5 * r2 * T2) / T3;
  q.c[4] = (-15.0 * r0 + 7.0 * r1 * T - r2 * T2) / (T3 * T);
  q.c[5] = (6.0 * r0 - 3.0 * r1 * T + 0.5 * r2 * T2) / (T3 * T2);
  return q;
}

Quartic solve_longitudinal_quartic(double s0, double s0_dot, double s0_ddot, double v_target, double T) {
  if (!(T > 0.0)) throw InvalidArgument("quartic duration must be positive, got " + std::to_string(T));
  if (!(v_target >= 0.0)) throw InvalidArgument("target velocity must be non-negative");
  Quartic q;
  q.c[0] = s0;
  q.c[1] = s0_dot;
  q.c[2] = 0.5 * s0_ddot;
  const double r1 = v_target - q.c[1] - 2.0 * q.c[2] * T;
  const double r2 = -2.0 * q.c[2];
  q.c[3] = (3.0 * r1 - r2 * T) / (3.0 * T * T);
  q.c[4] = (r2 * T - 2.0 * r1) / (4.0 * T * T * T);
  return q;
}

double integrated_squared_jerk(std::span<const double> coeffs, double T) {
  // Jerk polynomial j(t) = sum_m g[m] t^m with g[m] = (m+3)(m+2)(m+1) c[m+3].
  if (coeffs.size() > 12) throw InvalidArgument("polynomial degree too high for jerk integral");
  std::array<double, 9> g{};
  std::size_t m = 0;
  for (std::size_t k = 3; k < coeffs.size(); ++k, ++m) {
    const double kd = static_cast<double>(k);
    g[m] = kd * (kd - 1.0) * (kd - 2.0) * coeffs[k];
  }
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const auto p = static_cast<int>(i + j + 1);
      total += g[i] * g[j] * std::pow(T, p) / p;
    }
  return total;
}

}  // namespace hplan
