#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "hplan/config.hpp"
#include "hplan/cost.hpp"
#include "hplan/frenet.hpp"
#include "hplan/scenario.hpp"
#include "hplan/trajectory.hpp"

namespace hplan {

enum class TerminationStatus {
  Running,
  GoalReachedInTime,
  GoalReachedFaster,
  GoalReachedSlower,
  Collision,
  NoFeasibleTrajectory,
  Timeout,
};

inline constexpr std::array<TerminationStatus, 6> kTerminalStatuses{
    TerminationStatus::GoalReachedInTime, TerminationStatus::GoalReachedFaster,
    TerminationStatus::GoalReachedSlower, TerminationStatus::Collision,
    TerminationStatus::NoFeasibleTrajectory, TerminationStatus::Timeout};

const char* status_name(TerminationStatus s);
bool is_goal(TerminationStatus s);

/// Immutable per-episode context: scenario plus everything derived from it
/// and from the config.
class World {
 public:
  World(Scenario scenario, const Config& config);

  const Scenario& scenario() const { return scenario_; }
  const ReferencePath& path() const { return path_; }
  std::span<const SegmentSet> boundaries() const { return boundaries_; }
  const Config& config() const { return config_; }

  /// Ground-truth obstacle states at a simulation step.
  std::vector<ObstacleState> obstacles_at(int step) const;
  /// Constant-velocity predictions from the ground truth at `step`.
  std::vector<ObstaclePrediction> predictions_at(int step) const;
  /// Ground-truth obstacle boxes over the horizon starting at `step`.
  ObstacleBoxes future_boxes(int step) const;

 private:
  Scenario scenario_;
  Config config_;
  ReferencePath path_;
  std::array<SegmentSet, 2> boundaries_;
};

struct SimState {
  int step = 0;
  CartesianState ego;
  FrenetState ego_frenet;
  double jerk = 0.0;  // backward difference of acceleration
  CostWeights weights;
  TrajectoryBundle last_bundle;
  bool has_bundle = false;
  std::optional<std::size_t> selected;  // index into last_bundle
  TerminationStatus status = TerminationStatus::Running;

  const TrajectorySample* selected_sample() const {
    return selected ? &last_bundle.samples[*selected] : nullptr;
  }
};

SimState initial_state(const World& world);

struct PlanResult {
  TrajectoryBundle bundle;
  std::optional<std::size_t> selected;
};

/// One planning cycle: Frenet state update, sampling, kinematic check,
/// costs and risk, sorting, then collision checks in cost order against the
/// ground-truth obstacle motion. `selected` is the first feasible,
/// collision-free sample.
PlanResult plan_step(const SimState& state, const World& world);

/// Moves the ego to the selected sample's state at +0.1 s.
void advance(SimState& state, const TrajectorySample& selected);

/// Status after the current step. `plan_failed` marks a cycle without a
/// usable trajectory.
TerminationStatus check_termination(const SimState& state, const World& world, bool plan_failed);

/// True when the ego footprint at its current pose touches an obstacle (at
/// the current step) or a boundary.
bool ego_in_collision(const SimState& state, const World& world);

/// One row per recorded step of an episode.
struct TraceRow {
  int step = 0;
  CartesianState ego;
  double s = 0.0;
  double d = 0.0;
  CostVector weights{};
  double total_cost = 0.0;
  double unweighted_cost = 0.0;
  double ego_risk = 0.0;
  double obstacle_risk = 0.0;
  double reward = 0.0;
  TerminationStatus status = TerminationStatus::Running;
  std::optional<std::size_t> selected;
};

std::string trace_csv_header();
std::string trace_csv_row(const TraceRow& row);

TraceRow make_trace_row(const SimState& state, double reward);

struct EpisodeResult {
  TerminationStatus status = TerminationStatus::Running;
  int steps = 0;
  std::vector<TraceRow> trace;  // steps + 1 rows (initial state first)
};

/// Closed loop with fixed default weights.
EpisodeResult run_default_episode(const World& world);

}  // namespace hplan
