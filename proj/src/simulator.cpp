#include "hplan/simulator.hpp"

#include <cmath>
#include <cstdio>

#include "hplan/errors.hpp"
#include "hplan/sampler.hpp"

namespace hplan {

const char* status_name(TerminationStatus s) {
  switch (s) {
    case TerminationStatus::Running:
      return "running";
    case TerminationStatus::GoalReachedInTime:
      return "goal_reached_in_time";
    case TerminationStatus::GoalReachedFaster:
      return "goal_reached_faster";
    case TerminationStatus::GoalReachedSlower:
      return "goal_reached_slower";
    case TerminationStatus::Collision:
      return "collision";
    case TerminationStatus::NoFeasibleTrajectory:
      return "no_feasible_trajectory";
    case TerminationStatus::Timeout:
      return "timeout";
  }
  return "?";
}

bool is_goal(TerminationStatus s) {
  return s == TerminationStatus::GoalReachedInTime || s == TerminationStatus::GoalReachedFaster ||
         s == TerminationStatus::GoalReachedSlower;
}

World::World(Scenario scenario, const Config& config)
    : scenario_(std::move(scenario)),
      config_(config),
      path_(ReferencePath::build(scenario_.reference_path, config.path_spacing)) {
  scenario_.validate();
  boundaries_[0] = SegmentSet(scenario_.left_boundary);
  boundaries_[1] = SegmentSet(scenario_.right_boundary);
}

std::vector<ObstacleState> World::obstacles_at(int step) const {
  std::vector<ObstacleState> out;
  out.reserve(scenario_.obstacles.size());
  for (const ObstacleSpec& o : scenario_.obstacles) out.push_back(o.state_at(step));
  return out;
}

std::vector<ObstaclePrediction> World::predictions_at(int step) const {
  std::vector<ObstaclePrediction> out;
  out.reserve(scenario_.obstacles.size());
  for (const ObstacleSpec& o : scenario_.obstacles)
    out.push_back(predict_constant_velocity(o.state_at(step), o.footprint, config_.prediction.sigma0_sq,
                                            config_.prediction.growth));
  return out;
}

ObstacleBoxes World::future_boxes(int step) const {
  ObstacleBoxes boxes(scenario_.obstacles.size());
  for (std::size_t o = 0; o < boxes.size(); ++o) {
    const ObstacleSpec& spec = scenario_.obstacles[o];
    for (std::size_t k = 0; k < kHorizonPoints; ++k) {
      const ObstacleState s = spec.state_at(step + static_cast<int>(k));
      boxes[o][k] = {{s.x, s.y}, s.heading, spec.footprint.length, spec.footprint.width};
    }
  }
  return boxes;
}

SimState initial_state(const World& world) {
  SimState st;
  st.ego = world.scenario().ego_init;
  st.ego_frenet = cartesian_to_frenet(world.path(), st.ego);
  st.weights = world.config().weights();
  return st;
}

PlanResult plan_step(const SimState& state, const World& world) {
  PlanResult result;
  const Config& cfg = world.config();
  const Scenario& sc = world.scenario();

  FrenetState ego;
  try {
    ego = cartesian_to_frenet(world.path(), state.ego);
  } catch (const GeometryError&) {
    return result;
  }

  const SamplingMatrix matrix =
      cfg.sampling.matrix_for(state.ego.velocity, sc.goal.target_velocity, sc.vehicle.max_velocity);
  result.bundle = generate_bundle(ego, matrix, world.path(), sc.vehicle);
  check_bundle_kinematics(result.bundle, sc.vehicle);

  const std::vector<ObstaclePrediction> predictions = world.predictions_at(state.step);
  CostContext ctx;
  ctx.predictions = predictions;
  ctx.harm = cfg.harm;
  ctx.ego_footprint = {sc.vehicle.length, sc.vehicle.width};
  ctx.v_target = sc.goal.target_velocity;
  evaluate_bundle(result.bundle, state.weights, ctx);
  sort_by_cost(result.bundle);

  const ObstacleBoxes boxes = world.future_boxes(state.step);
  for (std::size_t idx : result.bundle.sorted_indices) {
    const TrajectorySample& smp = result.bundle.samples[idx];
    if (!smp.feasible) continue;
    if (!collision_check(smp, boxes, world.boundaries(), ctx.ego_footprint)) {
      result.selected = idx;
      break;
    }
  }
  return result;
}

void advance(SimState& state, const TrajectorySample& selected) {
  const TrajectoryPoints& st = selected.states;
  const double prev_acc = state.ego.acceleration;
  state.ego = {st.x[1], st.y[1], st.heading[1], st.velocity[1], st.acceleration[1], st.curvature[1]};
  state.ego_frenet = {st.s[1], st.s_dot[1], st.s_ddot[1], st.d[1], st.d_prime[1], st.d_pprime[1], st.d_dot[1], st.d_ddot[1]};
  state.jerk = (state.ego.acceleration - prev_acc) / kDt;
  state.step += 1;
}

bool ego_in_collision(const SimState& state, const World& world) {
  const VehicleParams& v = world.scenario().vehicle;
  const OrientedBox ego{{state.ego.x, state.ego.y}, state.ego.heading, v.length, v.width};
  for (const ObstacleSpec& o : world.scenario().obstacles) {
    const ObstacleState s = o.state_at(state.step);
    if (boxes_overlap(ego, {{s.x, s.y}, s.heading, o.footprint.length, o.footprint.width})) return true;
  }
  for (const SegmentSet& b : world.boundaries())
    if (b.overlaps(ego)) return true;
  return false;
}

TerminationStatus check_termination(const SimState& state, const World& world, bool plan_failed) {
  const Scenario& sc = world.scenario();
  if (ego_in_collision(state, world)) return TerminationStatus::Collision;
  if (plan_failed) return TerminationStatus::NoFeasibleTrajectory;
  const double s = state.ego_frenet.s;
  if (s >= sc.goal.s_min && s <= sc.goal.s_max) {
    if (state.step < sc.goal.t_min) return TerminationStatus::GoalReachedFaster;
    if (state.step > sc.goal.t_max) return TerminationStatus::GoalReachedSlower;
    return TerminationStatus::GoalReachedInTime;
  }
  if (state.step >= sc.max_steps) return TerminationStatus::Timeout;
  return TerminationStatus::Running;
}

TraceRow make_trace_row(const SimState& state, double reward) {
  TraceRow row;
  row.step = state.step;
  row.ego = state.ego;
  row.s = state.ego_frenet.s;
  row.d = state.ego_frenet.d;
  row.weights = state.weights.value;
  if (const TrajectorySample* smp = state.selected_sample()) {
    row.total_cost = smp->total_cost;
    row.unweighted_cost = smp->cost.total_unweighted;
    row.ego_risk = smp->ego_risk;
    row.obstacle_risk = smp->obstacle_risk;
  }
  row.reward = reward;
  row.status = state.status;
  row.selected = state.selected;
  return row;
}

std::string trace_csv_header() {
  std::string h = "step,x,y,heading,velocity,acceleration,curvature,s,d";
  for (std::size_t i = 0; i < kNumCostTerms; ++i) h += std::string(",w_") + cost_term_name(static_cast<CostTerm>(i));
  return h + ",total_cost,unweighted_cost,ego_risk,obstacle_risk,reward,status";
}

std::string trace_csv_row(const TraceRow& r) {
  char buf[512];
  int n = std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g", r.step, r.ego.x, r.ego.y,
                        r.ego.heading, r.ego.velocity, r.ego.acceleration, r.ego.curvature, r.s, r.d);
  std::string out(buf, static_cast<std::size_t>(n));
  for (double w : r.weights) {
    n = std::snprintf(buf, sizeof buf, ",%.9g", w);
    out.append(buf, static_cast<std::size_t>(n));
  }
  n = std::snprintf(buf, sizeof buf, ",%.9g,%.9g,%.9g,%.9g,%.9g,%s", r.total_cost, r.unweighted_cost, r.ego_risk,
                    r.obstacle_risk, r.reward, status_name(r.status));
  out.append(buf, static_cast<std::size_t>(n));
  return out;
}

EpisodeResult run_default_episode(const World& world) {
  EpisodeResult result;
  SimState state = initial_state(world);
  result.trace.push_back(make_trace_row(state, 0.0));
  while (state.status == TerminationStatus::Running) {
    PlanResult plan = plan_step(state, world);
    const bool failed = !plan.selected;
    state.last_bundle = std::move(plan.bundle);
    state.has_bundle = true;
    state.selected = plan.selected;
    if (!failed) advance(state, state.last_bundle.samples[*plan.selected]);
    state.status = check_termination(state, world, failed);
    result.trace.push_back(make_trace_row(state, 0.0));
  }
  result.status = state.status;
  result.steps = static_cast<int>(result.trace.size()) - 1;
  return result;
}

}  // namespace hplan
