#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hplan/config.hpp"
#include "hplan/simulator.hpp"

namespace hplan {

inline constexpr std::size_t kObstacleSlots = 6;
inline constexpr std::size_t kObservationDim = 57;
inline constexpr std::size_t kActionDim = kNumCostTerms;

// Offsets of the observation blocks.
inline constexpr std::size_t kObsEgo = 0;            // 7
inline constexpr std::size_t kObsGoal = 7;           // 5
inline constexpr std::size_t kObsSurrounding = 12;   // 3 + 6 * 4
inline constexpr std::size_t kObsTrajectory = 39;    // 4
inline constexpr std::size_t kObsCost = 43;          // 4
inline constexpr std::size_t kObsBoundary = 47;      // 10

using Observation = std::array<double, kObservationDim>;

/// Collision-probability cost of the outermost lateral samples per terminal
/// time group, interleaved (min d, max d). Ties go to the lower velocity
/// target. Unscaled.
std::vector<double> boundary_cost_grid(const TrajectoryBundle& bundle);

Observation build_observation(const SimState& state, const World& world, const ObservationScales& scales);

/// Quantities the dense reward depends on, taken from the post-step state.
struct RewardInputs {
  double d = 0.0;
  double velocity = 0.0;
  double v_target = 0.0;
  double delta_s = 0.0;
  double ego_risk = 0.0;
  double obstacle_risk = 0.0;
  CostVector weights{};
  CostVector default_weights{};
};

RewardInputs reward_inputs(double prev_s, const SimState& next, const World& world);

/// Sparse terminal reward plus dense shaping.
double compute_reward(const RewardInputs& in, std::optional<TerminationStatus> status, const RewardConfig& cfg);

struct StepResult {
  std::vector<double> observation;
  double reward = 0.0;
  bool terminated = false;
  std::optional<TerminationStatus> status;
  std::map<std::string, double> info;
};

/// Minimal reset/step protocol shared by the planning environment and the
/// test environments used by the trainer.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual std::size_t observation_dim() const = 0;
  virtual std::size_t action_dim() const = 0;
  virtual std::vector<double> reset(std::uint64_t seed) = 0;
  /// Throws ProtocolError when called on a terminated episode.
  virtual StepResult step(std::span<const double> action) = 0;
};

/// Planner-in-the-loop environment. Actions in [-1, 1] are scaled to the
/// per-term action range and applied to the weights.
class PlanningEnv final : public Environment {
 public:
  /// reset(seed) draws a scenario from `worlds` with the seed.
  PlanningEnv(std::vector<std::shared_ptr<const World>> worlds, EnvSettings settings);

  std::size_t observation_dim() const override { return kObservationDim; }
  std::size_t action_dim() const override { return kActionDim; }
  std::vector<double> reset(std::uint64_t seed) override;
  StepResult step(std::span<const double> action) override;

  /// Starts an episode on a specific world of the list.
  std::vector<double> reset_to(std::size_t world_index);

  const SimState& state() const { return state_; }
  const World& world() const { return *worlds_[current_]; }
  std::size_t world_count() const { return worlds_.size(); }

  void set_tracing(bool on) { tracing_ = on; }
  const std::vector<TraceRow>& trace() const { return trace_; }

 private:
  std::vector<std::shared_ptr<const World>> worlds_;
  EnvSettings settings_;
  std::size_t current_ = 0;
  SimState state_;
  bool started_ = false;
  bool tracing_ = false;
  std::vector<TraceRow> trace_;
};

/// Scales an action in [-1, 1]^5 to weight deltas.
std::array<double, kActionDim> scale_action(std::span<const double> action, const CostWeights& weights);

}  // namespace hplan
