#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "hplan/cost.hpp"
#include "hplan/risk.hpp"
#include "hplan/sampler.hpp"

namespace hplan {

struct PredictionSettings {
  double sigma0_sq = 0.04;  // m^2
  double growth = 0.1;      // m^2/s
};

enum class WeightReset { PerEpisode, PerStep };

struct RewardConfig {
  // Terminal rewards.
  double goal_reached = 15.0;
  double goal_faster = 12.0;
  double goal_slower = 6.0;
  double collision = -20.0;
  double no_feasible = -10.0;
  double timeout = -10.0;
  // Dense coefficients.
  double dist_ref = 0.05;
  double velocity_diff = 0.05;
  double s_progress = 0.2;
  double action_regulation = 0.05;
  double ego_risk = 5.0;
  double obstacle_risk = 5.0;

  void validate() const;
};

/// Fixed observation normalisation constants.
struct ObservationScales {
  double velocity = 10.0;
  double distance = 50.0;
  double acceleration = 10.0;
  double cost = 100.0;
  double clip = 10.0;
};

struct EnvSettings {
  RewardConfig reward;
  ObservationScales scales;
  WeightReset weight_reset = WeightReset::PerEpisode;
};

struct Hyperparams {
  double learning_rate = 3e-4;
  double clip_eps = 0.1;
  double gamma = 0.99;
  double gae_lambda = 0.97;
  int batch_size = 2352;
  int minibatch_size = 588;
  int epochs = 5;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  double max_grad_norm = 0.5;
  int rollout_length = 294;
  int n_envs = 8;
  long total_timesteps = 200000;
  int eval_interval = 2;  // updates between validation evaluations
  double init_log_std = -1.6;
  bool anneal_lr = true;  // linear decay of the learning rate to zero over the run

  void validate() const;
};

struct PolicySpec {
  std::vector<int> hidden{64, 64};
  bool recurrent = false;
  int lstm_hidden = 64;
};

struct BenchSettings {
  int workers = 0;  // 0: hardware concurrency
  int timing_runs = 10;
};

struct Config {
  VehicleParams vehicle = default_vehicle();
  SamplingSettings sampling;
  double path_spacing = 0.5;
  CostVector default_weights{1.0, 0.2, 0.2, 1.0, 1.0};
  double weight_max_factor = 5.0;
  double action_factor = 0.5;
  HarmParams harm;
  PredictionSettings prediction;
  EnvSettings env;
  Hyperparams ppo;
  PolicySpec policy;
  BenchSettings bench;
  std::uint64_t seed = 7;

  CostWeights weights() const;
  void validate() const;

  /// Canonical TOML rendering of every field.
  std::string to_toml() const;
  /// FNV-1a 64 of to_toml(), rendered as 16 hex digits.
  std::string hash() const;
};

/// Parses the TOML subset used by config files: [section] headers,
/// key = number | true/false | "string" | [number, ...], and # comments.
/// Keys not present override nothing; unknown keys raise SchemaError.
Config parse_config(const std::string& text);
Config load_config(const std::string& path);

std::string weight_reset_name(WeightReset r);

}  // namespace hplan
