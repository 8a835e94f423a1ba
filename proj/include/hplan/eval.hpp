#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hplan/config.hpp"
#include "hplan/policy.hpp"
#include "hplan/ppo.hpp"
#include "hplan/simulator.hpp"

namespace hplan {

enum class PlannerMode { Default, Hybrid };
const char* mode_name(PlannerMode m);
PlannerMode parse_mode(const std::string& s);

/// Per-episode metrics shared by plan, bench, train evaluation and timing.
struct EpisodeMetrics {
  std::string scenario_id;
  TerminationStatus status = TerminationStatus::Running;
  int steps = 0;
  double episode_return = 0.0;
  double max_ego_risk = 0.0, mean_ego_risk = 0.0;
  double max_obstacle_risk = 0.0, mean_obstacle_risk = 0.0;
  // Per executed step.
  std::vector<double> d, velocity, unweighted_cost;
  std::vector<TraceRow> trace;  // filled when requested
  // Per cycle wall-clock seconds (only meaningful when timed).
  std::vector<double> inference_seconds, bundle_seconds, overall_seconds;

  bool collision() const { return status == TerminationStatus::Collision; }
};

/// Closed loop on one world. Default mode steps the environment with zero
/// actions; hybrid mode uses the policy's deterministic action.
EpisodeMetrics run_episode(const std::shared_ptr<const World>& world, PlannerMode mode, const Policy* policy,
                           const EnvSettings& settings, bool trace);

/// Seeded 75/15/10 split of a corpus.
struct CorpusSplit {
  std::vector<std::size_t> train, validation, test;
};
CorpusSplit split_corpus(std::size_t n, std::uint64_t seed);

struct Summary {
  double max = 0.0, mean = 0.0, median = 0.0, stddev = 0.0;
};
Summary summarize(std::vector<double> values);

struct AggregateRow {
  std::string mode;
  double collision_weight = 0.0;
  int scenarios = 0;
  int successes = 0;
  int collisions = 0;
  double success_rate = 0.0;
  std::map<std::string, int> status_counts;
  double mean_ego_risk = 0.0, mean_obstacle_risk = 0.0;
  double max_ego_risk = 0.0, max_obstacle_risk = 0.0;
  Summary d, velocity, unweighted_cost;
};

struct BenchRow {
  std::string mode;
  double collision_weight = 0.0;
  EpisodeMetrics metrics;
};

struct BenchmarkReport {
  std::string config_hash;
  std::vector<BenchRow> rows;
  std::vector<AggregateRow> aggregates;
};

std::string bench_csv_header();
std::string bench_csv_row(const BenchRow& row);
std::string bench_csv(const BenchmarkReport& report);
std::string bench_json(const BenchmarkReport& report);
/// Aggregate over the rows of one (mode, weight) group.
AggregateRow aggregate(const std::vector<const BenchRow*>& rows);

struct BenchOptions {
  std::vector<PlannerMode> modes{PlannerMode::Default};
  std::vector<double> sweep;  // collision-probability weights for default mode; empty: config default
  std::optional<Policy> policy;
  int workers = 1;
};

/// Runs every scenario in every (mode, weight) configuration. Rows are in
/// (mode, weight, scenario order) regardless of the number of workers.
BenchmarkReport run_benchmark(const std::vector<Scenario>& corpus, const Config& config, const BenchOptions& opt);

struct PhaseTiming {
  std::string phase;
  int samples = 0;
  double min = 0.0, median = 0.0, mean = 0.0, max = 0.0;
};
struct TimingReport {
  std::vector<PhaseTiming> phases;  // policy_inference, bundle, overall
};
/// Times at least `runs` scenario episodes, cycling through the corpus.
TimingReport run_timing(const std::vector<Scenario>& corpus, const Config& config, const Policy* policy, int runs);
std::string timing_csv(const TimingReport& report);

/// Mean return, successes and collisions of deterministic policy rollouts.
EvalSummary evaluate_policy(const Policy& policy, const std::vector<std::shared_ptr<const World>>& worlds,
                            const EnvSettings& settings);

struct TrainOutputs {
  CorpusSplit split;
  TrainResult result;
};

/// Splits the corpus, trains on the training part with validation-based
/// selection, and writes best.ckpt, final.ckpt, train_log.csv and split.txt
/// into out_dir.
TrainOutputs run_training(const std::vector<Scenario>& corpus, const Config& config, const std::string& out_dir,
                          int workers, bool verbose);

/// Number of workers from the HPLAN_WORKERS variable, else `fallback`
/// (0: hardware concurrency).
int resolve_workers(int fallback);

}  // namespace hplan
