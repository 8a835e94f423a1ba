// Command-line front end: plan, train, bench, timing, generate.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hplan/config.hpp"
#include "hplan/errors.hpp"
#include "hplan/eval.hpp"
#include "hplan/scenario.hpp"

namespace {

using namespace hplan;

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  int workers = 0;
};

Config make_config(const Common& c) {
  Config cfg = c.config_path.empty() ? Config{} : load_config(c.config_path);
  if (c.seed) cfg.seed = *c.seed;
  cfg.validate();
  return cfg;
}

std::string out_dir(const Common& c) {
  if (const char* env = std::getenv("HPLAN_OUT"); env && *env) return env;
  return c.out;
}

std::vector<Scenario> load_corpus(const std::string& dir) {
  std::vector<Scenario> corpus;
  for (const std::string& path : list_corpus(dir)) corpus.push_back(load_scenario(path));
  if (corpus.empty()) throw std::runtime_error("no scenarios found in " + dir);
  return corpus;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::vector<double> parse_sweep(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    char* end = nullptr;
    const double w = std::strtod(item.c_str(), &end);
    if (item.empty() || *end != '\0' || w < 0.0) throw UsageError("bad --sweep value '" + item + "'");
    v.push_back(w);
  }
  return v;
}

Policy load_policy(const std::string& path, const Config& cfg) {
  std::string hash;
  Policy p = Policy::load(path, &hash);
  if (hash != cfg.hash())
    std::fprintf(stderr, "warning: checkpoint config hash %s differs from current config %s\n", hash.c_str(),
                 cfg.hash().c_str());
  return p;
}

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "Config file (TOML)")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "Seed override");
  cmd->add_option("--out", c.out, "Output directory (HPLAN_OUT overrides)");
  cmd->add_option("--workers", c.workers, "Worker threads (HPLAN_WORKERS overrides; 0: all cores)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid sampling-based planner with learned cost weights"};
  app.require_subcommand(1);
  Common common;

  std::string scenario_path, corpus_dir, mode_str = "default", policy_path, sweep_str;
  long timesteps = -1;
  int timing_runs = 0, count = 40;
  bool with_timing = false, quiet = false;

  CLI::App* plan = app.add_subcommand("plan", "Run one scenario in closed loop and write its trace");
  add_common(plan, common);
  plan->add_option("--scenario", scenario_path, "Scenario JSON")->required();
  plan->add_option("--mode", mode_str, "default or hybrid");
  plan->add_option("--policy", policy_path, "Policy checkpoint (hybrid mode)");

  CLI::App* trainc = app.add_subcommand("train", "Train the weight-adaptation agent on a corpus");
  add_common(trainc, common);
  trainc->add_option("--corpus", corpus_dir, "Scenario directory")->required();
  trainc->add_option("--timesteps", timesteps, "Override total timesteps");
  trainc->add_flag("--quiet", quiet, "No progress output");

  CLI::App* bench = app.add_subcommand("bench", "Benchmark default and hybrid planners over a corpus");
  add_common(bench, common);
  bench->add_option("--corpus", corpus_dir, "Scenario directory")->required();
  bench->add_option("--mode", mode_str, "Comma list of modes (default,hybrid)");
  bench->add_option("--policy", policy_path, "Policy checkpoint (hybrid mode)");
  bench->add_option("--sweep", sweep_str, "Collision-probability weights for default mode, comma list");
  bench->add_flag("--timing", with_timing, "Also write timing.csv");

  CLI::App* timing = app.add_subcommand("timing", "Per-iteration execution time of the planner phases");
  add_common(timing, common);
  timing->add_option("--corpus", corpus_dir, "Scenario directory")->required();
  timing->add_option("--policy", policy_path, "Policy checkpoint (times hybrid inference)");
  timing->add_option("--runs", timing_runs, "Scenario runs (default from config, at least 10)");

  CLI::App* gen = app.add_subcommand("generate", "Write the parametric T-junction corpus");
  add_common(gen, common);
  gen->add_option("--count", count, "Number of variants");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    const Config cfg = make_config(common);
    const std::string out = out_dir(common);
    const int workers = resolve_workers(common.workers);

    if (plan->parsed()) {
      const PlannerMode mode = parse_mode(mode_str);
      if (mode == PlannerMode::Hybrid && policy_path.empty()) throw UsageError("hybrid mode requires --policy");
      std::optional<Policy> policy;
      if (!policy_path.empty()) policy = load_policy(policy_path, cfg);
      auto world = std::make_shared<const World>(load_scenario(scenario_path), cfg);
      const EpisodeMetrics m = run_episode(world, mode, policy ? &*policy : nullptr, cfg.env, true);
      std::filesystem::create_directories(out);
      std::string csv = trace_csv_header() + "\n";
      for (const TraceRow& r : m.trace) csv += trace_csv_row(r) + "\n";
      const std::string path = out + "/trace_" + world->scenario().id + ".csv";
      write_file(path, csv);
      std::printf("%s %s steps=%d return=%.4f trace=%s\n", world->scenario().id.c_str(), status_name(m.status),
                  m.steps, m.episode_return, path.c_str());
    } else if (trainc->parsed()) {
      Config c = cfg;
      if (timesteps >= 0) c.ppo.total_timesteps = timesteps;
      const auto corpus = load_corpus(corpus_dir);
      const TrainOutputs res = run_training(corpus, c, out, workers, !quiet);
      std::printf("split train=%zu validation=%zu test=%zu\n", res.split.train.size(), res.split.validation.size(),
                  res.split.test.size());
      std::printf("best update %d eval_return %.4f%s\n", res.result.best_update, res.result.best_eval_return,
                  res.result.aborted ? (" (aborted: " + res.result.abort_reason + ")").c_str() : "");
      if (res.result.aborted) return kExitRuntime;
    } else if (bench->parsed()) {
      BenchOptions opt;
      opt.modes.clear();
      std::stringstream ss(mode_str);
      for (std::string m; std::getline(ss, m, ',');) opt.modes.push_back(parse_mode(m));
      if (opt.modes.empty()) throw UsageError("no mode given");
      if (!sweep_str.empty()) opt.sweep = parse_sweep(sweep_str);
      bool hybrid = false;
      for (PlannerMode m : opt.modes) hybrid = hybrid || m == PlannerMode::Hybrid;
      if (hybrid && policy_path.empty()) throw UsageError("hybrid mode requires --policy");
      if (!policy_path.empty()) opt.policy = load_policy(policy_path, cfg);
      opt.workers = workers;
      const auto corpus = load_corpus(corpus_dir);
      const BenchmarkReport report = run_benchmark(corpus, cfg, opt);
      std::filesystem::create_directories(out);
      write_file(out + "/bench.csv", bench_csv(report));
      write_file(out + "/bench.json", bench_json(report));
      for (const AggregateRow& a : report.aggregates)
        std::printf("%-8s w_coll=%-6g success %d/%d collisions %d mean_ego_risk %.3e\n", a.mode.c_str(),
                    a.collision_weight, a.successes, a.scenarios, a.collisions, a.mean_ego_risk);
      if (with_timing) {
        const int runs = std::max(10, cfg.bench.timing_runs);
        write_file(out + "/timing.csv", timing_csv(run_timing(corpus, cfg, opt.policy ? &*opt.policy : nullptr, runs)));
      }
    } else if (timing->parsed()) {
      std::optional<Policy> policy;
      if (!policy_path.empty()) policy = load_policy(policy_path, cfg);
      const auto corpus = load_corpus(corpus_dir);
      const int runs = std::max(10, timing_runs > 0 ? timing_runs : cfg.bench.timing_runs);
      const std::string csv = timing_csv(run_timing(corpus, cfg, policy ? &*policy : nullptr, runs));
      std::filesystem::create_directories(out);
      write_file(out + "/timing.csv", csv);
      std::fputs(csv.c_str(), stdout);
    } else if (gen->parsed()) {
      if (count <= 0) throw UsageError("--count must be positive");
      std::filesystem::create_directories(out);
      for (const Scenario& s : generate_t_junction_corpus(count, cfg.seed)) save_scenario(s, out + "/" + s.id + ".json");
      std::printf("wrote %d scenarios to %s\n", count, out.c_str());
    }
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return 0;
}
