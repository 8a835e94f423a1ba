#include "hplan/risk.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hplan {

ObstaclePrediction predict_constant_velocity(const ObstacleState& state, const Footprint& footprint,
                                             double sigma0_sq, double growth) {
  ObstaclePrediction pred;
  pred.footprint = footprint;
  const double cx = std::cos(state.heading), cy = std::sin(state.heading);
  for (std::size_t k = 0; k < kHorizonPoints; ++k) {
    const double t = point_time(k);
    PredictionStep& p = pred.steps[k];
    p.x = state.x + state.velocity * t * cx;
    p.y = state.y + state.velocity * t * cy;
    p.heading = state.heading;
    p.velocity = state.velocity;
    p.cov_xx = p.cov_yy = sigma0_sq + growth * t;
    p.cov_xy = 0.0;
  }
  return pred;
}

std::atomic<long>& covariance_regularisations() {
  static std::atomic<long> count{0};
  return count;
}

simd::GaussianFootprint footprint_kernel(const PredictionStep& step, const Footprint& obstacle,
                                         const Footprint& ego) {
  const double spread = (obstacle.length * obstacle.length + obstacle.width * obstacle.width) / 12.0;
  double sxx = step.cov_xx + spread, syy = step.cov_yy + spread;
  const double sxy = step.cov_xy;
  double det = sxx * syy - sxy * sxy;
  if (!(det > 1e-12)) {
    covariance_regularisations().fetch_add(1, std::memory_order_relaxed);
    sxx += 1e-6;
    syy += 1e-6;
    det = sxx * syy - sxy * sxy;
  }
  simd::GaussianFootprint g;
  g.mean_x = step.x;
  g.mean_y = step.y;
  g.inv_xx = syy / det;
  g.inv_xy = -sxy / det;
  g.inv_yy = sxx / det;
  g.scale = ego.area() / (2.0 * std::numbers::pi * std::sqrt(det));
  return g;
}

double collision_probability(const Pose& ego, const Footprint& ego_footprint, const PredictionStep& step,
                             const Footprint& obstacle_footprint) {
  const simd::GaussianFootprint g = footprint_kernel(step, obstacle_footprint, ego_footprint);
  const double dx = ego.x - g.mean_x, dy = ego.y - g.mean_y;
  const double q = dx * (g.inv_xx * dx + g.inv_xy * dy) + dy * (g.inv_xy * dx + g.inv_yy * dy);
  return std::min(1.0, g.scale * std::exp(-0.5 * q));
}

HarmPair harm(double closing_speed, const HarmParams& params) {
  const double base = 1.0 / (1.0 + std::exp(-(params.slope * closing_speed - params.offset)));
  HarmPair h{base, base};
  if (params.ego_mass < params.obstacle_mass)
    h.ego = std::min(1.0, base * params.obstacle_mass / params.ego_mass);
  else if (params.obstacle_mass < params.ego_mass)
    h.obstacle = std::min(1.0, base * params.ego_mass / params.obstacle_mass);
  return h;
}

double closing_speed(double ego_heading, double ego_velocity, double obs_heading, double obs_velocity) {
  const double vx = ego_velocity * std::cos(ego_heading) - obs_velocity * std::cos(obs_heading);
  const double vy = ego_velocity * std::sin(ego_heading) - obs_velocity * std::sin(obs_heading);
  return std::hypot(vx, vy);
}

double max_risk(std::span<const double> p, std::span<const double> harm) {
  double r = 0.0;
  for (std::size_t t = 0; t < p.size(); ++t) r = std::max(r, p[t] * harm[t]);
  return r;
}

RiskPair trajectory_risk(const TrajectorySample& sample, std::span<const ObstaclePrediction> predictions,
                         const HarmParams& params, const Footprint& ego_footprint) {
  RiskPair risk;
  const TrajectoryPoints& st = sample.states;
  std::array<double, kHorizonPoints> p{}, h_ego{}, h_obs{};
  for (const ObstaclePrediction& pred : predictions) {
    for (std::size_t k = 0; k < kHorizonPoints; ++k) {
      const PredictionStep& step = pred.steps[k];
      p[k] = collision_probability({st.x[k], st.y[k], st.heading[k]}, ego_footprint, step, pred.footprint);
      const HarmPair h = harm(closing_speed(st.heading[k], st.velocity[k], step.heading, step.velocity), params);
      h_ego[k] = h.ego;
      h_obs[k] = h.obstacle;
    }
    risk.ego_risk = std::max(risk.ego_risk, max_risk(p, h_ego));
    risk.obstacle_risk = std::max(risk.obstacle_risk, max_risk(p, h_obs));
  }
  return risk;
}

ObstacleBoxes predicted_boxes(std::span<const ObstaclePrediction> predictions) {
  ObstacleBoxes boxes(predictions.size());
  for (std::size_t o = 0; o < predictions.size(); ++o)
    for (std::size_t k = 0; k < kHorizonPoints; ++k) boxes[o][k] = predictions[o].box_at(k);
  return boxes;
}

std::optional<std::size_t> collision_check(const TrajectorySample& sample, const ObstacleBoxes& obstacles,
                                           std::span<const SegmentSet> boundaries,
                                           const Footprint& ego_footprint) {
  const TrajectoryPoints& st = sample.states;
  for (std::size_t k = 0; k < kHorizonPoints; ++k) {
    const OrientedBox ego{{st.x[k], st.y[k]}, st.heading[k], ego_footprint.length, ego_footprint.width};
    for (const auto& track : obstacles)
      if (boxes_overlap(ego, track[k])) return k;
    for (const SegmentSet& b : boundaries)
      if (b.overlaps(ego)) return k;
  }
  return std::nullopt;
}

}  // namespace hplan
