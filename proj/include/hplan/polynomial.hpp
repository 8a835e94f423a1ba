#pragma once

#include <array>
#include <cstddef>
#include <span>

namespace hplan {

/// Power-basis polynomial sum_k c[k] t^k.
template <std::size_t N>
struct Polynomial {
  std::array<double, N> c{};

  double value(double t) const {
    double v = 0.0;
    for (std::size_t k = N; k-- > 0;) v = v * t + c[k];
    return v;
  }
  /// order-th derivative at t.
  double derivative(double t, int order) const {
    double v = 0.0;
    for (std::size_t k = N; k-- > 0;) {
      if (static_cast<int>(k) < order) break;
      double f = 1.0;
      for (int j = 0; j < order; ++j) f *= static_cast<double>(static_cast<int>(k) - j);
      v = v * t + f * c[k];
    }
    return v;
  }
};

using Quintic = Polynomial<6>;
using Quartic = Polynomial<5>;

/// Lateral profile: d(0)=d0, d'(0)=d0_dot, d''(0)=d0_ddot, d(T)=d_target,
/// d'(T)=d''(T)=0. Throws InvalidArgument when T <= 0.
Quintic solve_lateral_quintic(double d0, double d0_dot, double d0_ddot, double d_target, double T);

/// Velocity-keeping profile: s(0)=s0, s'(0)=s0_dot, s''(0)=s0_ddot,
/// s'(T)=v_target, s''(T)=0. Throws InvalidArgument when T <= 0 or
/// v_target < 0.
Quartic solve_longitudinal_quartic(double s0, double s0_dot, double s0_ddot, double v_target, double T);

/// Closed-form integral over [0, T] of the squared third derivative.
double integrated_squared_jerk(std::span<const double> coeffs, double T);

}  // namespace hplan
