#pragma once

#include <atomic>
#include <span>

#include "hplan/risk.hpp"
#include "hplan/trajectory.hpp"

namespace hplan {

/// Adjustable cost weights. `value` is what the planner uses; the agent
/// moves it by bounded per-step deltas.
struct CostWeights {
  CostVector value{};
  CostVector defaults{};
  CostVector min{};
  CostVector max{};
  CostVector action_min{};
  CostVector action_max{};

  /// Bounds [0, 5 * default], action range +-0.5 * default.
  static CostWeights from_defaults(const CostVector& defaults);

  double operator[](CostTerm t) const { return value[index(t)]; }
  void reset() { value = defaults; }
  void validate() const;
};

/// collision_prob 1.0, jerk_lat 0.2, jerk_lon 0.2, dist_ref 1.0,
/// velocity_offset 1.0.
CostWeights default_weights();

/// Number of action components that had to be clamped to the action range.
std::atomic<long>& action_clamps();

/// w_t = clamp(w_prev + delta, w_min, w_max). Deltas outside the action
/// range are first clamped to it (and counted).
CostWeights apply_weight_action(const CostWeights& weights, std::span<const double> deltas);

struct JerkCost {
  double lat = 0.0;
  double lon = 0.0;
};

/// Integrated squared jerk of the polynomial segment; the held extension
/// has zero jerk.
JerkCost jerk_cost(const TrajectorySample& sample);

/// Mean squared lateral offset over the horizon points.
double dist_ref_cost(const TrajectorySample& sample);

/// Mean squared velocity error plus the squared terminal error.
double velocity_offset_cost(const TrajectorySample& sample, double v_target);

/// Sum over steps of the maximum collision probability over obstacles.
double collision_prob_cost(const TrajectorySample& sample, std::span<const ObstaclePrediction> predictions,
                           const Footprint& ego_footprint);

double total_cost(const CostBreakdown& breakdown, const CostWeights& weights);

/// Everything the cost evaluation of one planning cycle needs besides the
/// samples themselves.
struct CostContext {
  std::span<const ObstaclePrediction> predictions;
  HarmParams harm;
  Footprint ego_footprint;
  double v_target = 0.0;
};

/// Unweighted terms of one sample (reference path for the bundle evaluator).
CostBreakdown cost_breakdown(const TrajectorySample& sample, const CostContext& ctx);

/// Fills cost, total_cost, ego_risk and obstacle_risk of every sample.
/// Collision probabilities are evaluated across samples with the SIMD
/// kernels.
void evaluate_bundle(TrajectoryBundle& bundle, const CostWeights& weights, const CostContext& ctx);

/// Recomputes weighted totals only (terms unchanged).
void reweight_bundle(TrajectoryBundle& bundle, const CostWeights& weights);

}  // namespace hplan
