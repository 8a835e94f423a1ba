#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hplan/config.hpp"
#include "hplan/env.hpp"
#include "hplan/policy.hpp"

namespace hplan {

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

/// Generalised advantage estimation over one environment's sequence.
/// dones[t] marks that the episode ended with transition t.
GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const std::uint8_t> dones, double bootstrap_value, double gamma, double lambda);

/// min(r * A, clip(r, 1 - eps, 1 + eps) * A).
double clipped_surrogate(double ratio, double advantage, double eps);

/// Transitions stored env-major: index = env * length + t.
struct RolloutBuffer {
  std::size_t n_envs = 0, length = 0, obs_dim = 0, act_dim = 0, state_size = 0;
  std::vector<double> obs, u, actions, log_probs, values, rewards;
  std::vector<std::uint8_t> dones, episode_starts;
  std::vector<double> h, c;  // recurrent state before each step
  std::vector<double> bootstrap_values;  // per env
  std::vector<double> advantages, returns;

  void allocate(std::size_t envs, std::size_t len, std::size_t obs_d, std::size_t act_d, std::size_t state_d);
  std::size_t size() const { return n_envs * length; }
  std::size_t index(std::size_t env, std::size_t t) const { return env * length + t; }

  /// Fills advantages/returns with compute_gae per environment.
  void finish(double gamma, double lambda);
};

/// Rescales to zero mean and unit variance.
std::vector<double> normalize_advantages(std::span<const double> adv);

/// Contiguous training data; segments are runs of consecutive steps
/// (recurrent policies unroll through them, feed-forward ones treat the
/// steps independently).
struct LossBatch {
  std::vector<std::size_t> seg_start, seg_len;
  std::vector<LstmState> seg_state;
  std::vector<double> obs, u, old_log_prob, advantages, returns;

  std::size_t size() const { return returns.size(); }
};

struct LossSettings {
  double clip_eps = 0.1;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
};

struct LossStats {
  double loss = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
};

/// L = -mean(min(r A, clip(r) A)) + c_v mean((V - R)^2) - c_e mean(H).
/// Writes dL/dparams into grads (overwritten). Throws TrainingError when the
/// loss is not finite.
LossStats ppo_loss(const Policy& policy, std::span<const double> params, const LossBatch& batch,
                   const LossSettings& settings, std::span<double> grads);

/// Per-env state that persists across rollouts.
struct RolloutCursor {
  std::vector<std::vector<double>> obs;
  std::vector<LstmState> lstm;
  std::vector<std::uint8_t> episode_start;
  std::vector<double> running_return;
  std::vector<double> completed_returns;  // cleared by the caller
  std::vector<TerminationStatus> completed_status;
  std::mt19937_64 rng;
  std::uint64_t resets = 0;
};

RolloutCursor start_rollouts(std::span<Environment* const> envs, const Policy& policy, std::uint64_t seed);

/// Steps every env `length` times with sampled actions; episodes that end
/// are reset in place. Action sampling uses the cursor's single RNG, so the
/// buffer is deterministic for a given seed. `workers` > 1 steps the envs
/// concurrently.
void collect_rollouts(std::span<Environment* const> envs, const Policy& policy, std::size_t length,
                      RolloutCursor& cursor, RolloutBuffer& buffer, int workers = 1);

struct EvalSummary {
  double mean_return = 0.0;
  int episodes = 0;
  int successes = 0;
  int collisions = 0;
};

struct TrainLogRow {
  int update = 0;
  long timesteps = 0;
  LossStats stats;
  double mean_train_return = 0.0;
  int train_episodes = 0;
  bool evaluated = false;
  EvalSummary eval;
};

struct TrainResult {
  Policy initial;
  Policy best;
  Policy final;
  int best_update = 0;
  double best_eval_return = 0.0;
  bool aborted = false;
  std::string abort_reason;
  std::vector<TrainLogRow> log;
};

using EnvFactory = std::function<std::unique_ptr<Environment>(int index)>;
using PolicyEvaluator = std::function<EvalSummary(const Policy&)>;

struct TrainOptions {
  Hyperparams hp;
  PolicySpec spec;
  std::uint64_t seed = 7;
  int workers = 1;
  int recurrent_sequence = 16;  // BPTT segment length
  std::function<void(const TrainLogRow&)> on_update;
};

/// PPO loop with validation-based best-model selection. The initial policy
/// is evaluated as update 0.
TrainResult train(const EnvFactory& make_env, const PolicyEvaluator& evaluate, const TrainOptions& options);

std::string train_log_header();
std::string train_log_row(const TrainLogRow& row);

}  // namespace hplan
