#include "hplan/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hplan/errors.hpp"
#include "hplan/simd.hpp"

namespace hplan {
namespace {

// Below this longitudinal speed the lateral derivatives w.r.t. arc length
// are undefined; lateral motion there is treated as infinite curvature.
constexpr double kStandstillSpeed = 1e-3;

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  if (n == 1) {
    out[0] = 0.5 * (lo + hi);
    return out;
  }
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return out;
}

}  // namespace

const char* cost_term_name(CostTerm t) {
  switch (t) {
    case CostTerm::CollisionProb:
      return "collision_prob";
    case CostTerm::JerkLat:
      return "jerk_lat";
    case CostTerm::JerkLon:
      return "jerk_lon";
    case CostTerm::DistRef:
      return "dist_ref";
    case CostTerm::VelocityOffset:
      return "velocity_offset";
  }
  return "?";
}

std::vector<std::string> infeasibility_names(std::uint32_t flags) {
  static constexpr std::pair<std::uint32_t, const char*> kNames[] = {
      {kCurvature, "curvature"},
      {kAcceleration, "acceleration"},
      {kVelocity, "velocity"},
      {kNegativeVelocity, "negative_velocity"},
      {kCurvatureRate, "curvature_rate"},
      {kYawRate, "yaw_rate"},
      {kTransformSingularity, "transform_singularity"},
      {kOutOfPath, "out_of_path"},
  };
  std::vector<std::string> out;
  for (const auto& [bit, name] : kNames)
    if (flags & bit) out.emplace_back(name);
  return out;
}

void sort_by_cost(TrajectoryBundle& bundle) {
  bundle.sorted_indices.resize(bundle.samples.size());
  std::iota(bundle.sorted_indices.begin(), bundle.sorted_indices.end(), std::size_t{0});
  std::stable_sort(bundle.sorted_indices.begin(), bundle.sorted_indices.end(),
                   [&](std::size_t a, std::size_t b) {
                     return bundle.samples[a].total_cost < bundle.samples[b].total_cost;
                   });
}

void SamplingMatrix::validate() const {
  if (terminal_times.empty() || terminal_velocities.empty() || lateral_offsets.empty())
    throw InvalidArgument("sampling matrix lists must be non-empty");
  for (double T : terminal_times)
    if (!(T > 0.0 && T <= kHorizon + 1e-12))
      throw InvalidArgument("terminal times must lie in (0, 3] s");
  for (double v : terminal_velocities)
    if (!(v >= 0.0)) throw InvalidArgument("terminal velocities must be non-negative");
  std::vector<double> sorted = lateral_offsets;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i)
    if (std::abs(sorted[i] + sorted[sorted.size() - 1 - i]) > 1e-9)
      throw InvalidArgument("lateral offsets must be symmetric around 0");
}

VehicleParams VehicleParams::make(double wheelbase, double length, double width, double max_steering,
                                  double max_abs_acceleration, double max_velocity,
                                  double max_curvature_rate) {
  VehicleParams p;
  p.wheelbase = wheelbase;
  p.length = length;
  p.width = width;
  p.max_steering = max_steering;
  p.max_curvature = std::tan(max_steering) / wheelbase;
  p.max_abs_acceleration = max_abs_acceleration;
  p.max_velocity = max_velocity;
  p.max_curvature_rate = max_curvature_rate;
  p.validate();
  return p;
}

void VehicleParams::validate() const {
  for (double v : {wheelbase, length, width, max_steering, max_curvature, max_abs_acceleration,
                   max_velocity, max_curvature_rate, yaw_rate_tolerance})
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument("vehicle parameters must be positive");
  if (std::abs(max_curvature - std::tan(max_steering) / wheelbase) > 1e-9)
    throw InvalidArgument("max_curvature must equal tan(max_steering) / wheelbase");
}

VehicleParams default_vehicle() { return VehicleParams::make(2.7, 4.8, 1.8, 0.6, 8.0, 20.0, 0.4); }

SamplingMatrix SamplingSettings::matrix_for(double v_ego, double v_target, double v_max) const {
  SamplingMatrix m;
  m.terminal_times = terminal_times;
  const double lo = std::max(0.0, v_ego - velocity_span);
  const double hi = std::max(lo, std::min(v_max, std::max(v_ego, v_target) + velocity_span));
  m.terminal_velocities = linspace(lo, hi, n_velocities);
  // Snap the grid point nearest the target onto it so on-speed driving is
  // representable.
  if (v_target >= lo && v_target <= hi && n_velocities > 1) {
    auto nearest = std::min_element(m.terminal_velocities.begin(), m.terminal_velocities.end(),
                                    [&](double a, double b) { return std::abs(a - v_target) < std::abs(b - v_target); });
    *nearest = v_target;
  }
  m.lateral_offsets = linspace(-max_offset, max_offset, n_offsets);
  if (n_offsets % 2 == 1) m.lateral_offsets[static_cast<std::size_t>(n_offsets / 2)] = 0.0;
  return m;
}

TrajectorySample make_sample(const FrenetState& ego, double T, double v_target, double d_target,
                             const ReferencePath& path) {
  TrajectorySample smp;
  smp.duration = T;
  smp.target_velocity = v_target;
  smp.target_offset = d_target;
  smp.lateral = solve_lateral_quintic(ego.d, ego.d_dot, ego.d_ddot, d_target, T);
  smp.longitudinal = solve_longitudinal_quartic(ego.s, ego.s_dot, ego.s_ddot, v_target, T);

  TrajectoryPoints& st = smp.states;
  for (std::size_t k = 0; k < kHorizonPoints; ++k) st.t[k] = point_time(k);

  // Points on the polynomial segment, then the held extension.
  std::size_t n_poly = 0;
  while (n_poly < kHorizonPoints && st.t[n_poly] <= T + 1e-9) ++n_poly;

  HorizonArray s_jerk, d_jerk;
  const std::span<const double> ts(st.t.data(), n_poly);
  simd::poly_eval(smp.longitudinal.c, ts, {st.s.data(), n_poly}, {st.s_dot.data(), n_poly},
                  {st.s_ddot.data(), n_poly}, {s_jerk.data(), n_poly});
  simd::poly_eval(smp.lateral.c, ts, {st.d.data(), n_poly}, {st.d_dot.data(), n_poly},
                  {st.d_ddot.data(), n_poly}, {d_jerk.data(), n_poly});

  const double s_T = smp.longitudinal.value(T);
  const double v_T = smp.longitudinal.derivative(T, 1);
  const double d_T = smp.lateral.value(T);
  for (std::size_t k = n_poly; k < kHorizonPoints; ++k) {
    st.s[k] = s_T + v_T * (st.t[k] - T);
    st.s_dot[k] = v_T;
    st.s_ddot[k] = 0.0;
    st.d[k] = d_T;
    st.d_dot[k] = 0.0;
    st.d_ddot[k] = 0.0;
  }

  std::uint32_t flags = kFeasible;
  CartesianState c;
  for (std::size_t k = 0; k < kHorizonPoints; ++k) {
    FrenetState fs;
    fs.s = st.s[k];
    fs.s_dot = st.s_dot[k];
    fs.s_ddot = st.s_ddot[k];
    fs.d = st.d[k];
    fs.d_dot = st.d_dot[k];
    fs.d_ddot = st.d_ddot[k];
    bool lateral_at_standstill = false;
    if (std::abs(fs.s_dot) > kStandstillSpeed) {
      fs.d_prime = fs.d_dot / fs.s_dot;
      fs.d_pprime = (fs.d_ddot - fs.d_prime * fs.s_ddot) / (fs.s_dot * fs.s_dot);
    } else {
      lateral_at_standstill = std::abs(fs.d_dot) > 1e-6 || std::abs(fs.d_ddot) > 1e-6;
    }
    st.d_prime[k] = fs.d_prime;
    st.d_pprime[k] = fs.d_pprime;

    const TransformStatus status = frenet_to_cartesian_into(path, fs, c);
    if (status != TransformStatus::Ok) {
      flags |= status == TransformStatus::OutOfPath ? kOutOfPath : kTransformSingularity;
      // Keep positions finite: hold the last valid pose.
      if (k > 0) {
        st.x[k] = st.x[k - 1];
        st.y[k] = st.y[k - 1];
        st.heading[k] = st.heading[k - 1];
      } else {
        const PathSample ref = path.interpolate(fs.s);
        st.x[k] = ref.x;
        st.y[k] = ref.y;
        st.heading[k] = ref.heading;
      }
      st.velocity[k] = fs.s_dot;
      st.acceleration[k] = fs.s_ddot;
      st.curvature[k] = 0.0;
      continue;
    }
    st.x[k] = c.x;
    st.y[k] = c.y;
    st.heading[k] = c.heading;
    st.velocity[k] = c.velocity;
    st.acceleration[k] = c.acceleration;
    st.curvature[k] = lateral_at_standstill ? std::numeric_limits<double>::infinity() : c.curvature;
  }
  smp.infeasibility = flags;
  smp.feasible = flags == kFeasible;
  return smp;
}

TrajectoryBundle generate_bundle(const FrenetState& ego, const SamplingMatrix& matrix,
                                 const ReferencePath& path, const VehicleParams& params) {
  matrix.validate();
  params.validate();
  TrajectoryBundle bundle;
  bundle.n_times = matrix.terminal_times.size();
  bundle.n_velocities = matrix.terminal_velocities.size();
  bundle.n_offsets = matrix.lateral_offsets.size();
  bundle.samples.reserve(matrix.size());
  for (std::size_t ti = 0; ti < bundle.n_times; ++ti)
    for (double v : matrix.terminal_velocities)
      for (double d : matrix.lateral_offsets) {
        TrajectorySample smp = make_sample(ego, matrix.terminal_times[ti], v, d, path);
        smp.time_group = ti;
        bundle.samples.push_back(std::move(smp));
      }
  bundle.feasible_count = 0;
  for (const auto& smp : bundle.samples) bundle.feasible_count += smp.feasible ? 1 : 0;
  return bundle;
}

std::uint32_t check_kinematics(const TrajectorySample& sample, const VehicleParams& params) {
  const TrajectoryPoints& st = sample.states;
  std::uint32_t flags = sample.infeasibility & (kTransformSingularity | kOutOfPath);
  for (std::size_t k = 0; k < kHorizonPoints; ++k) {
    const double v = st.velocity[k];
    const double kappa = st.curvature[k];
    if (!(std::abs(kappa) <= params.max_curvature)) flags |= kCurvature;
    const double lateral_acc = v * v * kappa;
    if (!(std::hypot(st.acceleration[k], lateral_acc) <= params.max_abs_acceleration)) flags |= kAcceleration;
    if (v < -1e-9 || st.s_dot[k] < -1e-9) flags |= kNegativeVelocity;
    if (!(v <= params.max_velocity)) flags |= kVelocity;
    if (k + 1 < kHorizonPoints) {
      const double rate = (st.curvature[k + 1] - kappa) / kDt;
      if (!(std::abs(rate) <= params.max_curvature_rate)) flags |= kCurvatureRate;
      const double yaw_rate = normalize_angle(st.heading[k + 1] - st.heading[k]) / kDt;
      const double model_rate = 0.5 * (v * kappa + st.velocity[k + 1] * st.curvature[k + 1]);
      if (!(std::abs(yaw_rate - model_rate) <= params.yaw_rate_tolerance)) flags |= kYawRate;
    }
  }
  return flags;
}

void check_bundle_kinematics(TrajectoryBundle& bundle, const VehicleParams& params) {
  bundle.feasible_count = 0;
  for (auto& smp : bundle.samples) {
    smp.infeasibility = check_kinematics(smp, params);
    smp.feasible = smp.infeasibility == kFeasible;
    bundle.feasible_count += smp.feasible ? 1 : 0;
  }
}

}  // namespace hplan
