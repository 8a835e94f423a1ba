#include <doctest.h>

#include <algorithm>

#include "hplan/scenario.hpp"
#include "hplan/simulator.hpp"

using namespace hplan;

TEST_CASE("empty road reaches the goal in time") {
  const World w(make_straight_empty("empty"), Config{});
  const EpisodeResult r = run_default_episode(w);
  CHECK(r.status == TerminationStatus::GoalReachedInTime);
  CHECK(r.trace.size() == static_cast<std::size_t>(r.steps) + 1);
  for (const TraceRow& row : r.trace) CHECK(std::abs(row.d) < 0.5);
}

TEST_CASE("following a slower lead vehicle stays collision free") {
  const World w(make_lead_vehicle("lead", 25.0, 4.0, 8.0), Config{});
  const EpisodeResult r = run_default_episode(w);
  CHECK(r.status != TerminationStatus::Collision);
}

TEST_CASE("plan_step picks the cheapest collision-free feasible sample") {
  const World w(make_lead_vehicle("lead", 12.0, 2.0, 8.0), Config{});
  SimState st = initial_state(w);
  const PlanResult p = plan_step(st, w);
  REQUIRE(p.selected.has_value());
  const ObstacleBoxes boxes = w.future_boxes(st.step);
  const Footprint fp{w.scenario().vehicle.length, w.scenario().vehicle.width};
  for (std::size_t idx : p.bundle.sorted_indices) {
    const TrajectorySample& s = p.bundle.samples[idx];
    if (!s.feasible || collision_check(s, boxes, w.boundaries(), fp)) continue;
    CHECK(idx == *p.selected);
    break;
  }
}

TEST_CASE("termination precedence") {
  Scenario sc = make_straight_empty("e", 120.0, 8.0);
  const World w(sc, Config{});
  SimState st = initial_state(w);
  CHECK(check_termination(st, w, false) == TerminationStatus::Running);
  CHECK(check_termination(st, w, true) == TerminationStatus::NoFeasibleTrajectory);
  st.step = sc.max_steps;
  CHECK(check_termination(st, w, false) == TerminationStatus::Timeout);
  CHECK(check_termination(st, w, true) == TerminationStatus::NoFeasibleTrajectory);

  // Ego parked on top of an obstacle: collision wins over everything.
  Scenario blocked = make_straight_empty("b", 120.0, 8.0);
  ObstacleSpec o;
  o.id = "wall";
  o.trajectory = {{blocked.ego_init.x, blocked.ego_init.y, 0.0, 0.0}};
  blocked.obstacles.push_back(o);
  const World wb(blocked, Config{});
  const SimState sb = initial_state(wb);
  CHECK(ego_in_collision(sb, wb));
  CHECK(check_termination(sb, wb, true) == TerminationStatus::Collision);
}

TEST_CASE("goal timing statuses") {
  Scenario sc = make_straight_empty("e", 120.0, 8.0);
  const World w(sc, Config{});
  SimState st = initial_state(w);
  const CartesianState goal_pose = frenet_to_cartesian(w.path(), [&] {
    FrenetState f;
    f.s = 0.5 * (sc.goal.s_min + sc.goal.s_max);
    f.s_dot = 8;
    return f;
  }());
  st.ego = goal_pose;
  st.ego_frenet = cartesian_to_frenet(w.path(), st.ego);
  st.step = sc.goal.t_min - 1;
  CHECK(check_termination(st, w, false) == TerminationStatus::GoalReachedFaster);
  st.step = sc.goal.t_min;
  CHECK(check_termination(st, w, false) == TerminationStatus::GoalReachedInTime);
  st.step = sc.goal.t_max + 1;
  CHECK(check_termination(st, w, false) == TerminationStatus::GoalReachedSlower);
}

TEST_CASE("trace CSV") {
  const World w(make_straight_empty("empty"), Config{});
  const EpisodeResult r = run_default_episode(w);
  const std::string header = trace_csv_header();
  const std::string row = trace_csv_row(r.trace.back());
  CHECK(std::count(header.begin(), header.end(), ',') == std::count(row.begin(), row.end(), ','));
  CHECK(header.rfind("step,", 0) == 0);
}
