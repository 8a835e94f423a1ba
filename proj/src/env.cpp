#include "hplan/env.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "hplan/errors.hpp"

namespace hplan {
namespace {

struct RelativeObstacle {
  double distance;
  std::size_t index;
  double rel_s, rel_d, rel_speed, heading_diff;
};

RelativeObstacle relative_to_ego(const ObstacleState& o, std::size_t index, const SimState& st,
                                 const ReferencePath& path) {
  RelativeObstacle r{};
  r.index = index;
  r.distance = std::hypot(o.x - st.ego.x, o.y - st.ego.y);
  r.rel_speed = o.velocity - st.ego.velocity;
  r.heading_diff = normalize_angle(o.heading - st.ego.heading);
  try {
    const double s = path.project({o.x, o.y});
    const PathSample ref = path.interpolate(s);
    const double d = cross({std::cos(ref.heading), std::sin(ref.heading)}, Vec2{o.x - ref.x, o.y - ref.y});
    r.rel_s = s - st.ego_frenet.s;
    r.rel_d = d - st.ego_frenet.d;
  } catch (const GeometryError&) {
    // Beyond the path ends: fall back to the ego body frame.
    const double c = std::cos(st.ego.heading), sn = std::sin(st.ego.heading);
    const double dx = o.x - st.ego.x, dy = o.y - st.ego.y;
    r.rel_s = c * dx + sn * dy;
    r.rel_d = -sn * dx + c * dy;
  }
  return r;
}

}  // namespace

std::vector<double> boundary_cost_grid(const TrajectoryBundle& bundle) {
  std::vector<double> grid(2 * bundle.n_times, 0.0);
  for (std::size_t ti = 0; ti < bundle.n_times; ++ti) {
    const TrajectorySample* lo = nullptr;
    const TrajectorySample* hi = nullptr;
    for (std::size_t vi = 0; vi < bundle.n_velocities; ++vi)
      for (std::size_t di = 0; di < bundle.n_offsets; ++di) {
        const TrajectorySample& smp = bundle.samples[bundle.at(ti, vi, di)];
        auto better = [&](const TrajectorySample* cur, bool want_min) {
          if (!cur) return true;
          if (smp.target_offset != cur->target_offset)
            return want_min ? smp.target_offset < cur->target_offset : smp.target_offset > cur->target_offset;
          return smp.target_velocity < cur->target_velocity;
        };
        if (better(lo, true)) lo = &smp;
        if (better(hi, false)) hi = &smp;
      }
    if (lo) grid[2 * ti] = lo->cost.terms[index(CostTerm::CollisionProb)];
    if (hi) grid[2 * ti + 1] = hi->cost.terms[index(CostTerm::CollisionProb)];
  }
  return grid;
}

Observation build_observation(const SimState& st, const World& world, const ObservationScales& sc) {
  Observation obs{};
  const Scenario& scen = world.scenario();
  const ReferencePath& path = world.path();

  // Ego block.
  const PathSample ref = path.interpolate(st.ego_frenet.s);
  obs[kObsEgo + 0] = st.ego.velocity / sc.velocity;
  obs[kObsEgo + 1] = st.ego.acceleration / sc.acceleration;
  obs[kObsEgo + 2] = st.jerk / sc.acceleration;
  obs[kObsEgo + 3] = std::atan(scen.vehicle.wheelbase * st.ego.curvature);
  obs[kObsEgo + 4] = normalize_angle(st.ego.heading - ref.heading);
  obs[kObsEgo + 5] = st.ego.velocity * st.ego.curvature;
  obs[kObsEgo + 6] = st.ego_frenet.d / sc.distance;

  // Goal block.
  const double t_max = std::max(1, scen.goal.t_max);
  obs[kObsGoal + 0] = (scen.goal.s_min - st.ego_frenet.s) / sc.distance;
  obs[kObsGoal + 1] = (t_max - st.step) / t_max;
  obs[kObsGoal + 2] = is_goal(st.status) ? 1.0 : 0.0;
  obs[kObsGoal + 3] = st.status == TerminationStatus::Timeout ? 1.0 : 0.0;
  obs[kObsGoal + 4] = scen.goal.target_velocity / sc.velocity;

  // Surroundings.
  obs[kObsSurrounding + 0] = scen.adjacency.left_exists ? 1.0 : 0.0;
  obs[kObsSurrounding + 1] = scen.adjacency.right_exists ? 1.0 : 0.0;
  obs[kObsSurrounding + 2] = scen.adjacency.left_exists && !scen.adjacency.left_same_direction ? 1.0 : 0.0;
  const std::vector<ObstacleState> obstacles = world.obstacles_at(st.step);
  std::vector<RelativeObstacle> rel;
  rel.reserve(obstacles.size());
  for (std::size_t i = 0; i < obstacles.size(); ++i) rel.push_back(relative_to_ego(obstacles[i], i, st, path));
  std::sort(rel.begin(), rel.end(), [](const RelativeObstacle& a, const RelativeObstacle& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.index < b.index;
  });
  for (std::size_t slot = 0; slot < std::min(kObstacleSlots, rel.size()); ++slot) {
    const std::size_t base = kObsSurrounding + 3 + 4 * slot;
    obs[base + 0] = rel[slot].rel_s / sc.distance;
    obs[base + 1] = rel[slot].rel_d / sc.distance;
    obs[base + 2] = rel[slot].rel_speed / sc.velocity;
    obs[base + 3] = rel[slot].heading_diff;
  }

  if (st.has_bundle) {
    const TrajectoryBundle& b = st.last_bundle;
    const std::size_t n = b.samples.size();
    obs[kObsTrajectory + 0] = n ? static_cast<double>(b.feasible_count) / static_cast<double>(n) : 0.0;
    const TrajectorySample* opt = st.selected_sample();
    obs[kObsTrajectory + 1] = opt ? 1.0 : 0.0;
    obs[kObsTrajectory + 2] = opt ? opt->ego_risk : 0.0;
    obs[kObsTrajectory + 3] = opt ? opt->obstacle_risk : 0.0;

    double mean = 0.0, var = 0.0;
    std::size_t count = 0;
    for (const TrajectorySample& smp : b.samples)
      if (smp.feasible) {
        mean += smp.total_cost;
        ++count;
      }
    if (count) {
      mean /= static_cast<double>(count);
      for (const TrajectorySample& smp : b.samples)
        if (smp.feasible) var += (smp.total_cost - mean) * (smp.total_cost - mean);
      var /= static_cast<double>(count);
    }
    obs[kObsCost + 0] = opt ? opt->total_cost / sc.cost : 0.0;
    obs[kObsCost + 1] = mean / sc.cost;
    obs[kObsCost + 2] = var / (sc.cost * sc.cost);
    obs[kObsCost + 3] = opt ? opt->cost.terms[index(CostTerm::CollisionProb)] / sc.cost : 0.0;

    const std::vector<double> grid = boundary_cost_grid(b);
    for (std::size_t i = 0; i < std::min<std::size_t>(10, grid.size()); ++i) obs[kObsBoundary + i] = grid[i] / sc.cost;
  }

  for (double& v : obs) v = std::isfinite(v) ? std::clamp(v, -sc.clip, sc.clip) : 0.0;
  return obs;
}

RewardInputs reward_inputs(double prev_s, const SimState& next, const World& world) {
  RewardInputs in;
  in.d = next.ego_frenet.d;
  in.velocity = next.ego.velocity;
  in.v_target = world.scenario().goal.target_velocity;
  in.delta_s = next.ego_frenet.s - prev_s;
  if (const TrajectorySample* smp = next.selected_sample()) {
    in.ego_risk = smp->ego_risk;
    in.obstacle_risk = smp->obstacle_risk;
  }
  in.weights = next.weights.value;
  in.default_weights = next.weights.defaults;
  return in;
}

double compute_reward(const RewardInputs& in, std::optional<TerminationStatus> status, const RewardConfig& cfg) {
  double sparse = 0.0;
  if (status) {
    switch (*status) {
      case TerminationStatus::GoalReachedInTime:
        sparse = cfg.goal_reached;
        break;
      case TerminationStatus::GoalReachedFaster:
        sparse = cfg.goal_faster;
        break;
      case TerminationStatus::GoalReachedSlower:
        sparse = cfg.goal_slower;
        break;
      case TerminationStatus::Collision:
        sparse = cfg.collision;
        break;
      case TerminationStatus::NoFeasibleTrajectory:
        sparse = cfg.no_feasible;
        break;
      case TerminationStatus::Timeout:
        sparse = cfg.timeout;
        break;
      case TerminationStatus::Running:
        break;
    }
  }
  double regulation = 0.0;
  for (std::size_t i = 0; i < kNumCostTerms; ++i) regulation += std::abs(in.weights[i] - in.default_weights[i]);
  const double dense = -cfg.dist_ref * std::abs(in.d) - cfg.velocity_diff * std::abs(in.velocity - in.v_target) +
                       cfg.s_progress * in.delta_s - cfg.action_regulation * regulation -
                       cfg.ego_risk * in.ego_risk - cfg.obstacle_risk * in.obstacle_risk;
  return sparse + dense;
}

std::array<double, kActionDim> scale_action(std::span<const double> action, const CostWeights& weights) {
  if (action.size() != kActionDim) throw InvalidArgument("action must have one entry per cost term");
  std::array<double, kActionDim> delta{};
  for (std::size_t i = 0; i < kActionDim; ++i) {
    const double a = std::isnan(action[i]) ? 0.0 : std::clamp(action[i], -1.0, 1.0);
    // Symmetric ranges map 0 to 0 exactly.
    const double lo = weights.action_min[i], hi = weights.action_max[i];
    delta[i] = a >= 0.0 ? a * hi : -a * lo;
  }
  return delta;
}

PlanningEnv::PlanningEnv(std::vector<std::shared_ptr<const World>> worlds, EnvSettings settings)
    : worlds_(std::move(worlds)), settings_(settings) {
  if (worlds_.empty()) throw InvalidArgument("environment needs at least one scenario");
}

std::vector<double> PlanningEnv::reset(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return reset_to(static_cast<std::size_t>(rng() % worlds_.size()));
}

std::vector<double> PlanningEnv::reset_to(std::size_t world_index) {
  if (world_index >= worlds_.size()) throw InvalidArgument("world index out of range");
  current_ = world_index;
  state_ = initial_state(*worlds_[current_]);
  started_ = true;
  trace_.clear();
  if (tracing_) trace_.push_back(make_trace_row(state_, 0.0));
  const Observation obs = build_observation(state_, world(), settings_.scales);
  return {obs.begin(), obs.end()};
}

StepResult PlanningEnv::step(std::span<const double> action) {
  if (!started_) throw ProtocolError("reset() must be called before step()");
  if (state_.status != TerminationStatus::Running)
    throw ProtocolError("episode has terminated; call reset() before stepping again");
  const World& w = world();

  CostWeights base = state_.weights;
  if (settings_.weight_reset == WeightReset::PerStep) base.reset();
  const auto delta = scale_action(action, base);
  state_.weights = apply_weight_action(base, delta);

  const double prev_s = state_.ego_frenet.s;
  const auto t0 = std::chrono::steady_clock::now();
  PlanResult plan = plan_step(state_, w);
  const double bundle_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool failed = !plan.selected;
  state_.last_bundle = std::move(plan.bundle);
  state_.has_bundle = true;
  state_.selected = plan.selected;
  if (!failed) advance(state_, state_.last_bundle.samples[*plan.selected]);
  state_.status = check_termination(state_, w, failed);

  StepResult res;
  res.terminated = state_.status != TerminationStatus::Running;
  if (res.terminated) res.status = state_.status;

  const RewardInputs in = reward_inputs(prev_s, state_, w);
  res.reward = compute_reward(in, res.status, settings_.reward);

  const Observation obs = build_observation(state_, w, settings_.scales);
  res.observation.assign(obs.begin(), obs.end());
  res.info["step"] = state_.step;
  res.info["bundle_seconds"] = bundle_seconds;
  res.info["feasible_fraction"] = obs[kObsTrajectory + 0];
  res.info["ego_risk"] = in.ego_risk;
  res.info["obstacle_risk"] = in.obstacle_risk;
  if (const TrajectorySample* smp = state_.selected_sample()) {
    res.info["total_cost"] = smp->total_cost;
    res.info["unweighted_cost"] = smp->cost.total_unweighted;
    res.info["collision_prob_cost"] = smp->cost.terms[index(CostTerm::CollisionProb)];
  }
  if (tracing_) trace_.push_back(make_trace_row(state_, res.reward));
  return res;
}

}  // namespace hplan
