#pragma once

#include <vector>

#include "hplan/frenet.hpp"
#include "hplan/trajectory.hpp"

namespace hplan {

struct SamplingMatrix {
  std::vector<double> terminal_times;
  std::vector<double> terminal_velocities;
  std::vector<double> lateral_offsets;

  std::size_t size() const {
    return terminal_times.size() * terminal_velocities.size() * lateral_offsets.size();
  }
  /// Throws InvalidArgument when an invariant is broken.
  void validate() const;
};

/// Single-track vehicle limits.
struct VehicleParams {
  double wheelbase = 2.7;
  double length = 4.8;
  double width = 1.8;
  double max_steering = 0.6;
  double max_curvature = 0.0;  // tan(max_steering) / wheelbase
  double max_abs_acceleration = 8.0;
  double max_velocity = 20.0;
  double max_curvature_rate = 0.4;
  double yaw_rate_tolerance = 0.5;  // rad/s slack on yaw_rate = v * curvature

  static VehicleParams make(double wheelbase, double length, double width, double max_steering,
                            double max_abs_acceleration, double max_velocity, double max_curvature_rate);
  void validate() const;
};

VehicleParams default_vehicle();

/// Per-cycle sampling ranges; expands into a SamplingMatrix from the ego's
/// current and target velocity.
struct SamplingSettings {
  std::vector<double> terminal_times{1.0, 1.5, 2.0, 2.5, 3.0};
  int n_velocities = 8;
  double velocity_span = 4.0;
  int n_offsets = 21;
  double max_offset = 3.5;

  SamplingMatrix matrix_for(double v_ego, double v_target, double v_max) const;
};

/// One sample per (T, v, d) triple, discretised over the full horizon with
/// Cartesian states. Transformation failures mark the sample infeasible.
TrajectoryBundle generate_bundle(const FrenetState& ego, const SamplingMatrix& matrix,
                                 const ReferencePath& path, const VehicleParams& params);

/// Builds and discretises a single sample.
TrajectorySample make_sample(const FrenetState& ego, double T, double v_target, double d_target,
                             const ReferencePath& path);

/// Single-track feasibility classification; returns infeasibility flags
/// (kFeasible when every point passes).
std::uint32_t check_kinematics(const TrajectorySample& sample, const VehicleParams& params);

/// Runs check_kinematics on every sample, updating flags and feasible_count.
void check_bundle_kinematics(TrajectoryBundle& bundle, const VehicleParams& params);

}  // namespace hplan
