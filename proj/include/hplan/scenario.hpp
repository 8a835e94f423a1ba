#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hplan/frenet.hpp"
#include "hplan/geometry.hpp"
#include "hplan/risk.hpp"
#include "hplan/sampler.hpp"

namespace hplan {

inline constexpr int kScenarioFormatVersion = 1;

struct Adjacency {
  bool left_exists = false;
  bool right_exists = false;
  bool left_same_direction = true;
  bool right_same_direction = true;

  bool operator==(const Adjacency&) const = default;
};

/// Scripted obstacle. A single-entry trajectory means constant-velocity
/// motion from that state; otherwise entry k is the pose at step k and the
/// last entry is extrapolated at constant velocity.
struct ObstacleSpec {
  std::string id;
  Footprint footprint;
  std::vector<ObstacleState> trajectory;

  ObstacleState state_at(int step) const;
  bool operator==(const ObstacleSpec&) const = default;
};

struct GoalSpec {
  double s_min = 0.0;
  double s_max = 0.0;
  int t_min = 0;  // steps
  int t_max = 0;
  double target_velocity = 0.0;

  bool operator==(const GoalSpec&) const = default;
};

struct Scenario {
  std::string id;
  std::vector<Vec2> reference_path;
  std::vector<Vec2> left_boundary;
  std::vector<Vec2> right_boundary;
  Adjacency adjacency;
  std::vector<ObstacleSpec> obstacles;
  CartesianState ego_init;
  GoalSpec goal;
  int max_steps = 300;
  VehicleParams vehicle = default_vehicle();

  /// Throws SchemaError naming the offending field.
  void validate() const;
  bool operator==(const Scenario&) const;
};

std::string scenario_to_json(const Scenario& scenario);
/// Throws SchemaError on malformed documents.
Scenario scenario_from_json(const std::string& text);

Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& scenario, const std::string& path);

/// *.json files of a directory, sorted by file name.
std::vector<std::string> list_corpus(const std::string& dir);

// Parametric generators for the bundled corpus.

struct TJunctionParams {
  double ego_speed = 6.0;          // initial speed, m/s
  double target_speed = 8.0;       // goal target velocity, m/s
  double oncoming_speed = 8.0;     // crossing traffic nominal speed, m/s
  double conflict_offset = 0.0;    // s; arrival of the first vehicle relative to the ego's nominal arrival
  double spawn_gap = 3.0;          // s between the two crossing vehicles
  double accel_first = 0.0;        // m/s^2 deviation from constant velocity
  double accel_second = 0.0;
};

Scenario make_t_junction(const std::string& id, const TJunctionParams& params);
Scenario make_straight_empty(const std::string& id, double length = 120.0, double speed = 8.0);
Scenario make_lead_vehicle(const std::string& id, double lead_gap, double lead_speed, double ego_speed);
Scenario make_curved_follow(const std::string& id, double radius, double speed);

/// Seeded draw of n T-junction variants ("tjunction_000" ...).
std::vector<Scenario> generate_t_junction_corpus(int n, std::uint64_t seed);

}  // namespace hplan
