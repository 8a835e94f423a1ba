#include "hplan/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include <json.hpp>

#include "hplan/env.hpp"
#include "hplan/errors.hpp"

namespace hplan {

const char* mode_name(PlannerMode m) { return m == PlannerMode::Default ? "default" : "hybrid"; }

PlannerMode parse_mode(const std::string& s) {
  if (s == "default") return PlannerMode::Default;
  if (s == "hybrid") return PlannerMode::Hybrid;
  throw InvalidArgument("unknown mode '" + s + "' (expected default or hybrid)");
}

EpisodeMetrics run_episode(const std::shared_ptr<const World>& world, PlannerMode mode, const Policy* policy,
                           const EnvSettings& settings, bool trace) {
  if (mode == PlannerMode::Hybrid && !policy) throw InvalidArgument("hybrid mode requires a policy");
  using clock = std::chrono::steady_clock;
  PlanningEnv env({world}, settings);
  env.set_tracing(trace);
  std::vector<double> obs = env.reset_to(0);
  LstmState lstm = policy ? policy->initial_state() : LstmState{};
  const std::vector<double> zero(kActionDim, 0.0);

  EpisodeMetrics m;
  m.scenario_id = world->scenario().id;
  double sum_ego = 0.0, sum_obs = 0.0;
  while (true) {
    const auto t0 = clock::now();
    std::vector<double> action = zero;
    if (mode == PlannerMode::Hybrid) action = policy->act_deterministic(obs, lstm);
    const auto t1 = clock::now();
    StepResult r = env.step(action);
    const auto t2 = clock::now();
    m.inference_seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
    m.overall_seconds.push_back(std::chrono::duration<double>(t2 - t0).count());
    m.bundle_seconds.push_back(r.info.at("bundle_seconds"));

    ++m.steps;
    m.episode_return += r.reward;
    const double er = r.info.at("ego_risk"), orisk = r.info.at("obstacle_risk");
    m.max_ego_risk = std::max(m.max_ego_risk, er);
    m.max_obstacle_risk = std::max(m.max_obstacle_risk, orisk);
    sum_ego += er;
    sum_obs += orisk;
    const SimState& st = env.state();
    m.d.push_back(st.ego_frenet.d);
    m.velocity.push_back(st.ego.velocity);
    if (const TrajectorySample* s = st.selected_sample()) m.unweighted_cost.push_back(s->cost.total_unweighted);
    if (r.terminated) {
      m.status = *r.status;
      break;
    }
    obs = std::move(r.observation);
  }
  m.mean_ego_risk = sum_ego / m.steps;
  m.mean_obstacle_risk = sum_obs / m.steps;
  if (trace) m.trace = env.trace();
  return m;
}

CorpusSplit split_corpus(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("cannot split an empty corpus");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::size_t n_train = n * 75 / 100, n_val = n * 15 / 100;
  if (n >= 3) {
    n_val = std::max<std::size_t>(n_val, 1);
    n_train = std::min(n_train, n - n_val - 1);
  }
  CorpusSplit s;
  s.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.validation.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train),
                      idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  s.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), idx.end());
  return s;
}

Summary summarize(std::vector<double> v) {
  Summary s;
  if (v.empty()) return s;
  const double n = static_cast<double>(v.size());
  s.max = *std::max_element(v.begin(), v.end());
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double var = 0.0;
  for (double x : v) var += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(var / n);
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  s.median = v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
  return s;
}

std::string bench_csv_header() {
  return "mode,collision_weight,scenario,status,steps,collision,return,max_ego_risk,mean_ego_risk,"
         "max_obstacle_risk,mean_obstacle_risk";
}

std::string bench_csv_row(const BenchRow& r) {
  const EpisodeMetrics& m = r.metrics;
  char buf[512];
  std::snprintf(buf, sizeof buf, "%s,%.9g,%s,%s,%d,%d,%.9g,%.9g,%.9g,%.9g,%.9g", r.mode.c_str(), r.collision_weight,
                m.scenario_id.c_str(), status_name(m.status), m.steps, m.collision() ? 1 : 0, m.episode_return,
                m.max_ego_risk, m.mean_ego_risk, m.max_obstacle_risk, m.mean_obstacle_risk);
  return buf;
}

std::string bench_csv(const BenchmarkReport& report) {
  std::string out = bench_csv_header() + "\n";
  for (const BenchRow& r : report.rows) out += bench_csv_row(r) + "\n";
  return out;
}

AggregateRow aggregate(const std::vector<const BenchRow*>& rows) {
  AggregateRow a;
  if (rows.empty()) return a;
  a.mode = rows.front()->mode;
  a.collision_weight = rows.front()->collision_weight;
  for (TerminationStatus s : kTerminalStatuses) a.status_counts[status_name(s)] = 0;
  std::vector<double> d, v, c;
  for (const BenchRow* r : rows) {
    const EpisodeMetrics& m = r->metrics;
    ++a.scenarios;
    ++a.status_counts[status_name(m.status)];
    if (is_goal(m.status)) ++a.successes;
    if (m.collision()) ++a.collisions;
    a.mean_ego_risk += m.mean_ego_risk;
    a.mean_obstacle_risk += m.mean_obstacle_risk;
    a.max_ego_risk = std::max(a.max_ego_risk, m.max_ego_risk);
    a.max_obstacle_risk = std::max(a.max_obstacle_risk, m.max_obstacle_risk);
    d.insert(d.end(), m.d.begin(), m.d.end());
    v.insert(v.end(), m.velocity.begin(), m.velocity.end());
    c.insert(c.end(), m.unweighted_cost.begin(), m.unweighted_cost.end());
  }
  a.success_rate = static_cast<double>(a.successes) / a.scenarios;
  a.mean_ego_risk /= a.scenarios;
  a.mean_obstacle_risk /= a.scenarios;
  a.d = summarize(std::move(d));
  a.velocity = summarize(std::move(v));
  a.unweighted_cost = summarize(std::move(c));
  return a;
}

namespace {

nlohmann::ordered_json summary_json(const Summary& s) {
  return {{"max", s.max}, {"average", s.mean}, {"median", s.median}, {"std", s.stddev}};
}

}  // namespace

std::string bench_json(const BenchmarkReport& report) {
  nlohmann::ordered_json j;
  j["config_hash"] = report.config_hash;
  j["aggregates"] = nlohmann::ordered_json::array();
  for (const AggregateRow& a : report.aggregates) {
    nlohmann::ordered_json row;
    row["mode"] = a.mode;
    row["collision_weight"] = a.collision_weight;
    row["scenarios"] = a.scenarios;
    row["successes"] = a.successes;
    row["success_rate"] = a.success_rate;
    row["collisions"] = a.collisions;
    row["status_counts"] = a.status_counts;
    row["risk"] = {{"mean_ego", a.mean_ego_risk},
                   {"mean_obstacle", a.mean_obstacle_risk},
                   {"max_ego", a.max_ego_risk},
                   {"max_obstacle", a.max_obstacle_risk}};
    row["driving"] = {{"d", summary_json(a.d)},
                      {"velocity", summary_json(a.velocity)},
                      {"unweighted_cost", summary_json(a.unweighted_cost)}};
    j["aggregates"].push_back(std::move(row));
  }
  return j.dump(2) + "\n";
}

namespace {

// Runs fn(i) for i in [0, n) on a pool of workers.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn fn) {
  const std::size_t w = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < w; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

BenchmarkReport run_benchmark(const std::vector<Scenario>& corpus, const Config& config, const BenchOptions& opt) {
  if (corpus.empty()) throw InvalidArgument("benchmark corpus is empty");
  struct Group {
    PlannerMode mode;
    double weight;
    Config config;
  };
  std::vector<Group> groups;
  const double base_weight = config.default_weights[index(CostTerm::CollisionProb)];
  for (PlannerMode mode : opt.modes) {
    if (mode == PlannerMode::Hybrid && !opt.policy) throw InvalidArgument("hybrid mode requires --policy");
    const std::vector<double> weights =
        mode == PlannerMode::Default && !opt.sweep.empty() ? opt.sweep : std::vector<double>{base_weight};
    for (double w : weights) {
      Config c = config;
      c.default_weights[index(CostTerm::CollisionProb)] = w;
      c.validate();
      groups.push_back({mode, w, std::move(c)});
    }
  }

  BenchmarkReport report;
  report.config_hash = config.hash();
  const std::size_t n = corpus.size();
  report.rows.resize(groups.size() * n);
  parallel_for(report.rows.size(), opt.workers, [&](std::size_t job) {
    const Group& g = groups[job / n];
    auto world = std::make_shared<const World>(corpus[job % n], g.config);
    BenchRow& row = report.rows[job];
    row.mode = mode_name(g.mode);
    row.collision_weight = g.weight;
    row.metrics = run_episode(world, g.mode, opt.policy ? &*opt.policy : nullptr, g.config.env, false);
    row.metrics.inference_seconds.clear();
    row.metrics.bundle_seconds.clear();
    row.metrics.overall_seconds.clear();
  });
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    std::vector<const BenchRow*> rows;
    for (std::size_t i = 0; i < n; ++i) rows.push_back(&report.rows[gi * n + i]);
    report.aggregates.push_back(aggregate(rows));
  }
  return report;
}

namespace {

PhaseTiming phase_stats(const std::string& name, std::vector<double> v) {
  PhaseTiming p;
  p.phase = name;
  p.samples = static_cast<int>(v.size());
  if (v.empty()) return p;
  const Summary s = summarize(v);
  p.min = *std::min_element(v.begin(), v.end());
  p.median = s.median;
  p.mean = s.mean;
  p.max = s.max;
  return p;
}

}  // namespace

TimingReport run_timing(const std::vector<Scenario>& corpus, const Config& config, const Policy* policy, int runs) {
  if (corpus.empty()) throw InvalidArgument("timing corpus is empty");
  const PlannerMode mode = policy ? PlannerMode::Hybrid : PlannerMode::Default;
  std::vector<double> inf, bundle, overall;
  for (int r = 0; r < std::max(runs, 1); ++r) {
    auto world = std::make_shared<const World>(corpus[static_cast<std::size_t>(r) % corpus.size()], config);
    EpisodeMetrics m = run_episode(world, mode, policy, config.env, false);
    inf.insert(inf.end(), m.inference_seconds.begin(), m.inference_seconds.end());
    bundle.insert(bundle.end(), m.bundle_seconds.begin(), m.bundle_seconds.end());
    overall.insert(overall.end(), m.overall_seconds.begin(), m.overall_seconds.end());
  }
  TimingReport t;
  t.phases.push_back(phase_stats("policy_inference", std::move(inf)));
  t.phases.push_back(phase_stats("bundle", std::move(bundle)));
  t.phases.push_back(phase_stats("overall", std::move(overall)));
  return t;
}

std::string timing_csv(const TimingReport& report) {
  std::string out = "phase,samples,min_s,median_s,mean_s,max_s\n";
  char buf[256];
  for (const PhaseTiming& p : report.phases) {
    std::snprintf(buf, sizeof buf, "%s,%d,%.9g,%.9g,%.9g,%.9g\n", p.phase.c_str(), p.samples, p.min, p.median,
                  p.mean, p.max);
    out += buf;
  }
  return out;
}

EvalSummary evaluate_policy(const Policy& policy, const std::vector<std::shared_ptr<const World>>& worlds,
                            const EnvSettings& settings) {
  EvalSummary s;
  for (const auto& w : worlds) {
    const EpisodeMetrics m = run_episode(w, PlannerMode::Hybrid, &policy, settings, false);
    s.mean_return += m.episode_return;
    ++s.episodes;
    if (is_goal(m.status)) ++s.successes;
    if (m.collision()) ++s.collisions;
  }
  if (s.episodes > 0) s.mean_return /= s.episodes;
  return s;
}

TrainOutputs run_training(const std::vector<Scenario>& corpus, const Config& config, const std::string& out_dir,
                          int workers, bool verbose) {
  if (corpus.empty()) throw InvalidArgument("training corpus is empty");
  TrainOutputs out;
  out.split = split_corpus(corpus.size(), config.seed);
  if (out.split.train.empty() || out.split.validation.empty())
    throw InvalidArgument("corpus too small for a 75/15/10 split");
  auto worlds_of = [&](const std::vector<std::size_t>& idx) {
    std::vector<std::shared_ptr<const World>> w;
    for (std::size_t i : idx) w.push_back(std::make_shared<const World>(corpus[i], config));
    return w;
  };
  const auto train_worlds = worlds_of(out.split.train);
  const auto val_worlds = worlds_of(out.split.validation);

  std::filesystem::create_directories(out_dir);
  std::ofstream log(out_dir + "/train_log.csv");
  if (!log) throw std::runtime_error("cannot write " + out_dir + "/train_log.csv");
  log << train_log_header() << "\n";

  TrainOptions opt;
  opt.hp = config.ppo;
  opt.spec = config.policy;
  opt.seed = config.seed;
  opt.workers = workers;
  opt.on_update = [&](const TrainLogRow& row) {
    log << train_log_row(row) << "\n";
    log.flush();
    if (verbose) {
      if (row.evaluated)
        std::fprintf(stderr, "update %d  steps %ld  train_return %.3f  eval_return %.3f  success %d/%d\n", row.update,
                     row.timesteps, row.mean_train_return, row.eval.mean_return, row.eval.successes,
                     row.eval.episodes);
      else
        std::fprintf(stderr, "update %d  steps %ld  train_return %.3f\n", row.update, row.timesteps,
                     row.mean_train_return);
    }
  };
  const EnvSettings settings = config.env;
  out.result = train([&](int) { return std::make_unique<PlanningEnv>(train_worlds, settings); },
                     [&](const Policy& p) { return evaluate_policy(p, val_worlds, settings); }, opt);

  const std::string hash = config.hash();
  out.result.best.save(out_dir + "/best.ckpt", hash, settings.scales);
  out.result.final.save(out_dir + "/final.ckpt", hash, settings.scales);
  std::ofstream split(out_dir + "/split.txt");
  auto write_part = [&](const char* name, const std::vector<std::size_t>& idx) {
    split << name;
    for (std::size_t i : idx) split << ' ' << corpus[i].id;
    split << "\n";
  };
  write_part("train", out.split.train);
  write_part("validation", out.split.validation);
  write_part("test", out.split.test);
  return out;
}

int resolve_workers(int fallback) {
  if (const char* env = std::getenv("HPLAN_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  if (fallback > 0) return fallback;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

}  // namespace hplan
