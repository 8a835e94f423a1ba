#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hplan/polynomial.hpp"

namespace hplan {

/// Planning horizon: 3 s discretised at 0.1 s.
inline constexpr int kStepsPerSecond = 10;
inline constexpr double kDt = 1.0 / kStepsPerSecond;
inline constexpr double kHorizon = 3.0;
inline constexpr std::size_t kHorizonPoints = 31;

/// Time stamp of discretisation point k.
inline constexpr double point_time(std::size_t k) { return static_cast<double>(k) / kStepsPerSecond; }

using HorizonArray = std::array<double, kHorizonPoints>;

/// Discretised states of one candidate trajectory.
struct TrajectoryPoints {
  HorizonArray t{};
  HorizonArray s{}, s_dot{}, s_ddot{};
  HorizonArray d{}, d_dot{}, d_ddot{}, d_prime{}, d_pprime{};
  HorizonArray x{}, y{}, heading{}, velocity{}, acceleration{}, curvature{};
};

enum class CostTerm : std::size_t { CollisionProb = 0, JerkLat, JerkLon, DistRef, VelocityOffset };
inline constexpr std::size_t kNumCostTerms = 5;
inline constexpr std::size_t index(CostTerm t) { return static_cast<std::size_t>(t); }
const char* cost_term_name(CostTerm t);

using CostVector = std::array<double, kNumCostTerms>;

struct CostBreakdown {
  CostVector terms{};  // unweighted, all >= 0
  double total_weighted = 0.0;
  double total_unweighted = 0.0;
};

/// Reasons a sample fails the kinematic check (bit flags).
enum Infeasibility : std::uint32_t {
  kFeasible = 0,
  kCurvature = 1u << 0,
  kAcceleration = 1u << 1,
  kVelocity = 1u << 2,
  kNegativeVelocity = 1u << 3,
  kCurvatureRate = 1u << 4,
  kYawRate = 1u << 5,
  kTransformSingularity = 1u << 6,
  kOutOfPath = 1u << 7,
};

/// Names of the set bits, e.g. {"curvature", "negative_velocity"}.
std::vector<std::string> infeasibility_names(std::uint32_t flags);

struct TrajectorySample {
  Quintic lateral;
  Quartic longitudinal;
  double duration = 0.0;
  double target_velocity = 0.0;
  double target_offset = 0.0;
  std::size_t time_group = 0;

  TrajectoryPoints states;

  bool feasible = true;
  std::uint32_t infeasibility = kFeasible;

  CostBreakdown cost;
  double total_cost = 0.0;
  double ego_risk = 0.0;
  double obstacle_risk = 0.0;
};

struct TrajectoryBundle {
  std::vector<TrajectorySample> samples;
  std::size_t feasible_count = 0;
  std::vector<std::size_t> sorted_indices;
  std::size_t n_times = 0, n_velocities = 0, n_offsets = 0;

  /// Sample index for (time group, velocity index, offset index).
  std::size_t at(std::size_t ti, std::size_t vi, std::size_t di) const {
    return (ti * n_velocities + vi) * n_offsets + di;
  }
};

/// Stable order by (total_cost, index); fills sorted_indices.
void sort_by_cost(TrajectoryBundle& bundle);

}  // namespace hplan
