#pragma once

#include <span>
#include <vector>

#include "hplan/geometry.hpp"

namespace hplan {

/// One resampled point of the reference path.
struct PathSample {
  double x = 0.0;
  double y = 0.0;
  double s = 0.0;
  double heading = 0.0;         // unwrapped, rad
  double curvature = 0.0;       // 1/m
  double curvature_rate = 0.0;  // d(curvature)/ds, 1/m^2
};

struct CartesianState {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double velocity = 0.0;
  double acceleration = 0.0;
  double curvature = 0.0;

  bool operator==(const CartesianState&) const = default;
};

struct FrenetState {
  double s = 0.0;
  double s_dot = 0.0;
  double s_ddot = 0.0;
  double d = 0.0;
  double d_prime = 0.0;   // dd/ds
  double d_pprime = 0.0;  // d^2d/ds^2
  double d_dot = 0.0;     // dd/dt
  double d_ddot = 0.0;    // d^2d/dt^2

  bool operator==(const FrenetState&) const = default;
};

/// Arc-length parameterised centreline, uniformly resampled. Immutable after
/// construction. Between samples, position follows a cubic Hermite segment
/// and heading/curvature are interpolated linearly.
class ReferencePath {
 public:
  static constexpr double kDefaultSpacing = 0.5;

  /// Throws InvalidArgument on bad preconditions and GeometryError
  /// (DegeneratePath) on zero-length segments.
  static ReferencePath build(std::span<const Vec2> polyline, double spacing = kDefaultSpacing);

  const std::vector<PathSample>& samples() const { return samples_; }
  double spacing() const { return spacing_; }
  double length() const { return samples_.back().s; }

  /// Reference point at arc length s, clamped to [0, length()].
  PathSample interpolate(double s) const;

  /// Arc length of the foot point of `p`. Throws GeometryError(OutOfPath)
  /// when the foot point is not strictly inside the path.
  double project(Vec2 p) const;

  /// Polyline at constant lateral offset d (positive to the left).
  std::vector<Vec2> offset_polyline(double d) const;

  /// Original vertices, kept so scenarios can be serialised losslessly.
  const std::vector<Vec2>& source() const { return source_; }

 private:
  std::vector<PathSample> samples_;
  std::vector<Vec2> source_;
  double spacing_ = kDefaultSpacing;
};

/// Throws GeometryError on out-of-path or singular (|d * curvature| >= 1)
/// configurations.
FrenetState cartesian_to_frenet(const ReferencePath& path, const CartesianState& state);
CartesianState frenet_to_cartesian(const ReferencePath& path, const FrenetState& state);

enum class TransformStatus { Ok, OutOfPath, Singularity };

/// Non-throwing variant for the hot sampling loop.
TransformStatus frenet_to_cartesian_into(const ReferencePath& path, const FrenetState& state,
                                         CartesianState& out);

}  // namespace hplan
