#pragma once

#include <array>
#include <atomic>
#include <optional>
#include <span>
#include <vector>

#include "hplan/geometry.hpp"
#include "hplan/simd.hpp"
#include "hplan/trajectory.hpp"

namespace hplan {

/// Ground-truth or predicted kinematic state of an obstacle.
struct ObstacleState {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double velocity = 0.0;

  bool operator==(const ObstacleState&) const = default;
};

struct PredictionStep {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double velocity = 0.0;
  double cov_xx = 0.0;
  double cov_xy = 0.0;
  double cov_yy = 0.0;
};

struct ObstaclePrediction {
  Footprint footprint;
  std::array<PredictionStep, kHorizonPoints> steps{};

  OrientedBox box_at(std::size_t k) const {
    const PredictionStep& p = steps[k];
    return {{p.x, p.y}, p.heading, footprint.length, footprint.width};
  }
};

struct HarmParams {
  double slope = 0.25;   // s/m
  double offset = 5.0;   // logistic midpoint at offset/slope m/s
  double ego_mass = 1500.0;
  double obstacle_mass = 1500.0;
};

struct HarmPair {
  double ego = 0.0;
  double obstacle = 0.0;
};

struct RiskPair {
  double ego_risk = 0.0;
  double obstacle_risk = 0.0;
};

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
};

/// Mean moves at constant speed and heading; covariance
/// (sigma0_sq + growth * t) * I.
ObstaclePrediction predict_constant_velocity(const ObstacleState& state, const Footprint& footprint,
                                             double sigma0_sq = 0.04, double growth = 0.1);

/// Number of times a singular effective covariance had to be regularised.
std::atomic<long>& covariance_regularisations();

/// Collision kernel parameters for one prediction step (effective
/// covariance including the obstacle footprint spread).
simd::GaussianFootprint footprint_kernel(const PredictionStep& step, const Footprint& obstacle,
                                         const Footprint& ego);

/// Density-times-area collision probability in [0, 1].
double collision_probability(const Pose& ego, const Footprint& ego_footprint, const PredictionStep& step,
                             const Footprint& obstacle_footprint);

/// Logistic harm of a collision at the given closing speed.
HarmPair harm(double closing_speed, const HarmParams& params);

/// |v_ego - v_obstacle| for planar velocity vectors.
double closing_speed(double ego_heading, double ego_velocity, double obs_heading, double obs_velocity);

/// max_t p_t * H_t over aligned per-step series (0 when empty).
double max_risk(std::span<const double> p, std::span<const double> harm);

/// Maximum over the trajectory (and over obstacles) of probability * harm.
RiskPair trajectory_risk(const TrajectorySample& sample, std::span<const ObstaclePrediction> predictions,
                         const HarmParams& params, const Footprint& ego_footprint);

/// Per-step obstacle boxes (outer index obstacle, inner index step).
using ObstacleBoxes = std::vector<std::array<OrientedBox, kHorizonPoints>>;

ObstacleBoxes predicted_boxes(std::span<const ObstaclePrediction> predictions);

/// Earliest horizon step at which the ego box touches an obstacle box or a
/// boundary segment; nullopt when collision-free.
std::optional<std::size_t> collision_check(const TrajectorySample& sample, const ObstacleBoxes& obstacles,
                                           std::span<const SegmentSet> boundaries,
                                           const Footprint& ego_footprint);

}  // namespace hplan
