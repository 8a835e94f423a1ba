// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hplan/cost.hpp"
#include "hplan/env.hpp"
#include "hplan/eval.hpp"
#include "hplan/frenet.hpp"
#include "hplan/geometry.hpp"
#include "hplan/polynomial.hpp"
#include "hplan/ppo.hpp"
#include "hplan/risk.hpp"
#include "hplan/sampler.hpp"
#include "hplan/scenario.hpp"
#include "hplan/simulator.hpp"
#include "oracles.hpp"

using namespace hplan;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome polynomials() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double max_res = 0.0, max_coef = 0.0;
  for (int i = 0; i < 5000; ++i) {
    const double d0 = 3 * u(rng), v0 = 2 * u(rng), a0 = u(rng), dT = 3.5 * u(rng), T = 2.0 + u(rng);
    const Quintic q = solve_lateral_quintic(d0, v0, a0, dT, T);
    for (double r : {q.value(0) - d0, q.derivative(0, 1) - v0, q.derivative(0, 2) - a0, q.value(T) - dT,
                     q.derivative(T, 1), q.derivative(T, 2)})
      max_res = std::max(max_res, std::abs(r));
    const auto ref = oracle::quintic(d0, v0, a0, dT, T);
    for (std::size_t k = 0; k < 6; ++k) max_coef = std::max(max_coef, std::abs(q.c[k] - ref[k]));
  }
  for (int i = 0; i < 5000; ++i) {
    const double s0 = 50 * (1 + u(rng)), v0 = 6 * (1 + u(rng)), a0 = 2 * u(rng), vT = 6 * (1 + u(rng)),
                 T = 2.0 + u(rng);
    const Quartic q = solve_longitudinal_quartic(s0, v0, a0, vT, T);
    for (double r : {q.value(0) - s0, q.derivative(0, 1) - v0, q.derivative(0, 2) - a0, q.derivative(T, 1) - vT,
                     q.derivative(T, 2)})
      max_res = std::max(max_res, std::abs(r));
    const auto ref = oracle::quartic(s0, v0, a0, vT, T);
    for (std::size_t k = 0; k < 5; ++k) max_coef = std::max(max_coef, std::abs(q.c[k] - ref[k]));
  }
  const double t = seconds_since(t0);
  return {max_res < 1e-9 && max_coef < 1e-8 && t < 5.0,
          fmt("10000 solves, max residual %.2e, max coefficient error %.2e, %.2f s", max_res, max_coef, t)};
}

std::vector<Vec2> arc_points(double radius, double sweep, int n) {
  std::vector<Vec2> pts;
  for (int i = 0; i <= n; ++i) {
    const double a = -std::numbers::pi / 2 + sweep * i / n;
    pts.push_back({radius * std::cos(a), radius + radius * std::sin(a)});
  }
  return pts;
}

std::vector<Vec2> mixed_points() {
  std::vector<Vec2> pts;
  double x = 0, y = 0, h = 0;
  const double ds = 0.25;
  for (int i = 0; i < 600; ++i) {
    const double s = i * ds;
    double k = 0.0;
    if (s > 30 && s < 50) k = 0.04 * (s - 30) / 20;
    else if (s >= 50 && s < 90) k = 0.04;
    else if (s >= 90 && s < 110) k = 0.04 * (110 - s) / 20;
    pts.push_back({x, y});
    x += ds * std::cos(h);
    y += ds * std::sin(h);
    h += k * ds;
  }
  return pts;
}

Outcome geometry_round_trip() {
  std::mt19937_64 rng(102);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<std::vector<Vec2>> paths{{{0, 0}, {150, 0}}, arc_points(25.0, std::numbers::pi, 4000),
                                             mixed_points()};
  double max_pos = 0.0, max_ang = 0.0;
  int total = 0;
  for (const auto& pts : paths) {
    const ReferencePath p = ReferencePath::build(pts, 0.5);
    int done = 0;
    while (done < 1000) {
      FrenetState f;
      f.s = 5 + u(rng) * (p.length() - 10);
      f.d = -3 + 6 * u(rng);
      f.s_dot = 0.5 + 10 * u(rng);
      f.d_prime = -0.3 + 0.6 * u(rng);
      f.d_pprime = -0.05 + 0.1 * u(rng);
      f.s_ddot = -2 + 4 * u(rng);
      f.d_dot = f.d_prime * f.s_dot;
      CartesianState q;
      if (frenet_to_cartesian_into(p, f, q) != TransformStatus::Ok) continue;
      const CartesianState q2 = frenet_to_cartesian(p, cartesian_to_frenet(p, q));
      max_pos = std::max({max_pos, std::abs(q2.x - q.x), std::abs(q2.y - q.y)});
      max_ang = std::max(max_ang, std::abs(normalize_angle(q2.heading - q.heading)));
      ++done;
    }
    total += done;
  }
  return {max_pos < 1e-6 && max_ang < 1e-6,
          fmt("%d states on straight/circular/mixed paths, max error %.2e m, %.2e rad", total, max_pos, max_ang)};
}

Outcome jerk_integral() {
  std::mt19937_64 rng(103);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double T = 2.0 + u(rng);
    std::array<double, 6> c{};
    if (i % 2 == 0) {
      c = solve_lateral_quintic(3 * u(rng), u(rng), u(rng), 3 * u(rng), T).c;
    } else {
      const Quartic q = solve_longitudinal_quartic(10 * u(rng), 6 + 5 * u(rng), 2 * u(rng), 6 + 5 * u(rng), T);
      std::copy(q.c.begin(), q.c.end(), c.begin());
    }
    const std::vector<double> cv(c.begin(), c.end());
    const double num =
        oracle::simpson([&](double t) { return std::pow(oracle::poly_derivative(cv, t, 3), 2); }, 0.0, T, 1e-3);
    const double ana = integrated_squared_jerk(c, T);
    worst = std::max(worst, std::abs(ana - num) / std::max(std::abs(num), 1e-300));
  }
  return {worst < 1e-6, fmt("1000 polynomials, max relative error %.2e", worst)};
}

Outcome collision_oracle() {
  std::mt19937_64 rng(104);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int agree = 0, total = 0, skipped = 0;
  for (int i = 0; i < 10000; ++i) {
    const OrientedBox a{{0, 0}, u(rng) * 6.3, 1 + 4 * u(rng), 0.5 + 2 * u(rng)};
    const OrientedBox b{{-5 + 10 * u(rng), -5 + 10 * u(rng)}, u(rng) * 6.3, 1 + 4 * u(rng), 0.5 + 2 * u(rng)};
    const double area = oracle::intersection_area(oracle::rectangle(a.center.x, a.center.y, a.heading, a.length, a.width),
                                                  oracle::rectangle(b.center.x, b.center.y, b.heading, b.length, b.width));
    if (area > 0 && area < 1e-9) {
      ++skipped;
      continue;
    }
    ++total;
    if (boxes_overlap(a, b) == (area > 0)) ++agree;
  }
  return {agree == total, fmt("%d/%d agree (%d touching cases excluded)", agree, total, skipped)};
}

Outcome risk_max() {
  std::mt19937_64 rng(105);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const ReferencePath path = ReferencePath::build(std::vector<Vec2>{{0, 0}, {200, 0}}, 0.5);
  const Footprint fp{4.8, 1.8};
  HarmParams hp;
  int exact = 0;
  for (int i = 0; i < 1000; ++i) {
    FrenetState f;
    f.s = 10;
    f.s_dot = 3 + 8 * u(rng);
    const TrajectorySample s =
        make_sample(f, 1.0 + 2.0 * u(rng), 3 + 8 * u(rng), -3 + 6 * u(rng), path);
    std::vector<ObstaclePrediction> preds;
    const int n_obs = 1 + static_cast<int>(u(rng) * 4);
    for (int o = 0; o < n_obs; ++o)
      preds.push_back(predict_constant_velocity({15 + 40 * u(rng), -4 + 8 * u(rng), 6.3 * u(rng), 10 * u(rng)}, fp));
    const RiskPair r = trajectory_risk(s, preds, hp, fp);
    double ego = 0.0, obs = 0.0;
    for (std::size_t k = 0; k < kHorizonPoints; ++k)
      for (const ObstaclePrediction& pr : preds) {
        const PredictionStep& st = pr.steps[k];
        const double p = collision_probability({s.states.x[k], s.states.y[k], s.states.heading[k]}, fp, st, pr.footprint);
        const HarmPair h = harm(closing_speed(s.states.heading[k], s.states.velocity[k], st.heading, st.velocity), hp);
        ego = std::max(ego, p * h.ego);
        obs = std::max(obs, p * h.obstacle);
      }
    if (r.ego_risk == ego && r.obstacle_risk == obs) ++exact;
  }
  const std::vector<double> p{0.1, 0.2}, h{0.5, 0.4};
  const double worked = max_risk(p, h);
  return {exact == 1000 && std::abs(worked - 0.08) < 1e-15,
          fmt("%d/1000 exact matches, worked example %.17g", exact, worked)};
}

Outcome weight_clamping() {
  std::mt19937_64 rng(106);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  CostWeights w = default_weights();
  bool inside = true;
  for (int i = 0; i < 100000; ++i) {
    std::array<double, kNumCostTerms> a{};
    for (std::size_t k = 0; k < kNumCostTerms; ++k) a[k] = u(rng) * w.defaults[k];
    w = apply_weight_action(w, a);
    for (std::size_t k = 0; k < kNumCostTerms; ++k) inside = inside && w.value[k] >= w.min[k] && w.value[k] <= w.max[k];
  }
  auto one = [](double prev, double action) {
    CostWeights b = default_weights();
    b.value.fill(prev);
    b.min.fill(0.0);
    b.max.fill(5.0);
    b.action_min.fill(-0.5);
    b.action_max.fill(0.5);
    std::array<double, kNumCostTerms> a{};
    a.fill(action);
    return apply_weight_action(b, a).value[0];
  };
  const double e1 = one(1.0, 0.5), e2 = one(4.8, 0.5), e3 = one(0.2, -0.5);
  return {inside && e1 == 1.5 && e2 == 5.0 && e3 == 0.0,
          fmt("fuzz %s; examples %.17g %.17g %.17g", inside ? "stays in bounds" : "left bounds", e1, e2, e3)};
}

Outcome hybrid_contains_default(const std::vector<Scenario>& all) {
  int identical = 0;
  std::string first_bad;
  for (const Scenario& sc : all) {
    const World w(sc, Config{});
    const EpisodeResult ref = run_default_episode(w);
    EnvSettings st;
    st.weight_reset = WeightReset::PerEpisode;
    PlanningEnv env({std::make_shared<const World>(sc, Config{})}, st);
    env.set_tracing(true);
    env.reset_to(0);
    const std::vector<double> zero(kActionDim, 0.0);
    StepResult r;
    do r = env.step(zero);
    while (!r.terminated);
    bool same = r.status == ref.status && env.trace().size() == ref.trace.size();
    for (std::size_t i = 0; same && i < ref.trace.size(); ++i) {
      const TraceRow &a = env.trace()[i], &b = ref.trace[i];
      same = a.ego.x == b.ego.x && a.ego.y == b.ego.y && a.ego.heading == b.ego.heading &&
             a.ego.velocity == b.ego.velocity && a.total_cost == b.total_cost && a.selected == b.selected;
    }
    if (same) ++identical;
    else if (first_bad.empty()) first_bad = sc.id;
  }
  return {identical == static_cast<int>(all.size()),
          fmt("%d/%zu scenarios bit-identical%s%s", identical, all.size(), first_bad.empty() ? "" : ", first mismatch ",
              first_bad.c_str())};
}

Outcome gae() {
  std::mt19937_64 rng(108);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0, worst_mc = 0.0;
  for (int c = 0; c < 100; ++c) {
    const std::size_t T = 50;
    std::vector<double> r(T), v(T);
    std::vector<int> done(T);
    std::vector<std::uint8_t> done8(T);
    for (std::size_t t = 0; t < T; ++t) {
      r[t] = nd(rng);
      v[t] = nd(rng);
      done[t] = done8[t] = u(rng) < 0.08;
    }
    const double boot = nd(rng), gamma = 0.9 + 0.1 * u(rng), lambda = u(rng);
    const GaeResult g = compute_gae(r, v, done8, boot, gamma, lambda);
    const auto want = oracle::gae_direct(r, v, done, boot, gamma, lambda);
    for (std::size_t t = 0; t < T; ++t) worst = std::max(worst, std::abs(g.advantages[t] - want[t]));

    // lambda = 1: advantage equals the discounted return minus the value.
    const GaeResult m = compute_gae(r, v, done8, boot, gamma, 1.0);
    for (std::size_t t = 0; t < T; ++t) {
      double ret = 0.0, w = 1.0;
      std::size_t k = t;
      for (; k < T; ++k) {
        ret += w * r[k];
        if (done[k]) break;
        w *= gamma;
      }
      if (k == T) ret += w * boot;
      worst_mc = std::max(worst_mc, std::abs(m.advantages[t] - (ret - v[t])));
    }
  }
  return {worst < 1e-10 && worst_mc < 1e-9,
          fmt("100 cases of T=50, max error %.2e, lambda=1 vs Monte-Carlo %.2e", worst, worst_mc)};
}

LossBatch random_batch(const Policy& policy, std::size_t segs, std::size_t len, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, 3);
  LossBatch b;
  const std::size_t od = policy.obs_dim(), ad = policy.act_dim();
  for (std::size_t s = 0; s < segs; ++s) {
    b.seg_start.push_back(s * len);
    b.seg_len.push_back(len);
    LstmState st = policy.initial_state();
    for (double& x : st.h) x = 0.3 * nd(rng);
    for (double& x : st.c) x = 0.3 * nd(rng);
    b.seg_state.push_back(st);
    LstmState run = st;
    for (std::size_t t = 0; t < len; ++t) {
      std::vector<double> obs(od);
      for (double& x : obs) x = nd(rng);
      std::vector<double> mean;
      double value = 0.0;
      policy.forward(obs, run, mean, value);
      std::vector<double> u(ad);
      for (std::size_t j = 0; j < ad; ++j) u[j] = mean[j] + 0.5 * nd(rng);
      const double logp = gaussian::log_prob(mean, policy.log_std(), u) - gaussian::squash_log_det(u);
      // Ratios sit well inside or well outside the clip range.
      const double offsets[4] = {0.02, -0.03, 0.6, -0.7};
      b.obs.insert(b.obs.end(), obs.begin(), obs.end());
      b.u.insert(b.u.end(), u.begin(), u.end());
      b.old_log_prob.push_back(logp + offsets[pick(rng)]);
      b.advantages.push_back(nd(rng));
      b.returns.push_back(nd(rng));
    }
  }
  return b;
}

Outcome ppo_gradient() {
  int coords = 0, bad = 0;
  double worst = 0.0;
  for (bool recurrent : {false, true}) {
    PolicySpec spec;
    spec.hidden = {16, 16};
    spec.recurrent = recurrent;
    spec.lstm_hidden = 8;
    const Policy policy(kObservationDim, kActionDim, spec, -0.5, 109);
    std::mt19937_64 rng(recurrent ? 110 : 111);
    const LossBatch batch = random_batch(policy, recurrent ? 4 : 1, recurrent ? 8 : 32, rng);
    const LossSettings ls{0.1, 0.01, 0.5};
    std::vector<double> grads(policy.params().size()), scratch(grads.size());
    ppo_loss(policy, policy.params(), batch, ls, grads);
    std::uniform_int_distribution<std::size_t> any(0, grads.size() - 1);
    std::vector<std::size_t> idx;
    for (std::size_t j = 0; j < kActionDim; ++j) idx.push_back(policy.log_std_offset() + j);
    while (idx.size() < 150) idx.push_back(any(rng));
    for (std::size_t i : idx) {
      std::vector<double> p = policy.params(), m = policy.params();
      const double h = 1e-6;
      p[i] += h;
      m[i] -= h;
      const double fd =
          (ppo_loss(policy, p, batch, ls, scratch).loss - ppo_loss(policy, m, batch, ls, scratch).loss) / (2 * h);
      // Relative error with an absolute floor for near-zero gradients.
      const double err = std::abs(fd - grads[i]) / std::max({std::abs(fd), std::abs(grads[i]), 1e-4});
      worst = std::max(worst, err);
      if (err >= 1e-4) ++bad;
      ++coords;
    }
  }
  const double c1 = clipped_surrogate(1.3, 1.0, 0.1), c2 = clipped_surrogate(0.5, -1.0, 0.1);
  const bool clip_ok = c1 == 1.0 + 0.1 && c2 == -(1.0 - 0.1);
  return {bad == 0 && coords >= 200 && clip_ok,
          fmt("%d coordinates (feed-forward and recurrent), max relative error %.2e; clip examples %.17g %.17g", coords,
              worst, c1, c2)};
}

Outcome lstm() {
  std::mt19937_64 rng(112);
  std::normal_distribution<double> nd(0.0, 0.5);
  double worst = 0.0;
  for (int c = 0; c < 20; ++c) {
    nn::ParameterLayout layout;
    const std::size_t in = 5 + c % 7, H = 3 + c % 9;
    const nn::LstmCell cell = nn::LstmCell::make(layout, in, H);
    std::vector<double> params(layout.size());
    for (double& x : params) x = nd(rng);
    const std::vector<double> W(params.begin() + cell.w, params.begin() + cell.w + 4 * H * in);
    const std::vector<double> U(params.begin() + cell.u, params.begin() + cell.u + 4 * H * H);
    const std::vector<double> b(params.begin() + cell.b, params.begin() + cell.b + 4 * H);
    std::vector<double> h(H, 0.0), cc(H, 0.0), ho(H, 0.0), co(H, 0.0);
    for (int t = 0; t < 20; ++t) {
      std::vector<double> x(in);
      for (double& v : x) v = 2 * nd(rng);
      std::vector<double> hn(H), cn(H);
      cell.step(params, x, h, cc, hn, cn, nullptr);
      h = hn;
      cc = cn;
      oracle::lstm_step(W, U, b, in, H, x, ho, co);
      for (std::size_t j = 0; j < H; ++j) worst = std::max({worst, std::abs(h[j] - ho[j]), std::abs(cc[j] - co[j])});
    }
  }
  return {worst < 1e-10, fmt("20 random cells x 20 steps, max error %.2e", worst)};
}

struct Trained {
  bool ok = false;
  std::string error;
  TrainOutputs out;
  std::vector<Scenario> test;
  BenchmarkReport report;  // default then hybrid on the test split
};

Trained train_and_compare(const std::vector<Scenario>& corpus, long timesteps, const std::string& out_dir) {
  Trained t;
  Config cfg;
  cfg.ppo.total_timesteps = timesteps;
  try {
    t.out = run_training(corpus, cfg, out_dir + "/train", resolve_workers(0), true);
    for (std::size_t i : t.out.split.test) t.test.push_back(corpus[i]);
    BenchOptions opt;
    opt.modes = {PlannerMode::Default, PlannerMode::Hybrid};
    opt.policy = t.out.result.best;
    opt.workers = resolve_workers(0);
    t.report = run_benchmark(t.test, cfg, opt);
    t.ok = true;
  } catch (const std::exception& e) {
    t.error = e.what();
  }
  return t;
}

Outcome training_smoke(const Trained& t) {
  if (!t.ok) return {false, "training failed: " + t.error};
  std::vector<double> evals;
  for (const TrainLogRow& r : t.out.result.log)
    if (r.evaluated) evals.push_back(r.eval.mean_return);
  const std::size_t win = std::max<std::size_t>(1, std::min<std::size_t>(5, evals.size() / 2));
  const double first = std::accumulate(evals.begin(), evals.begin() + static_cast<long>(win), 0.0) / win;
  const double last = std::accumulate(evals.end() - static_cast<long>(win), evals.end(), 0.0) / win;
  const AggregateRow& dp = t.report.aggregates[0];
  const AggregateRow& hp = t.report.aggregates[1];
  const bool a = last > first;
  const bool b = hp.success_rate >= dp.success_rate && hp.collisions <= dp.collisions;
  return {a && b && !t.out.result.aborted,
          fmt("eval return first/last window %.3f/%.3f (%zu evals, window %zu, best update %d%s); test split of %zu: "
              "HP success %.2f collisions %d, DP success %.2f collisions %d",
              first, last, evals.size(), win, t.out.result.best_update, t.out.result.aborted ? ", aborted" : "",
              t.test.size(), hp.success_rate, hp.collisions, dp.success_rate, dp.collisions)};
}

Outcome risk_direction(const Trained& t) {
  if (!t.ok) return {false, "training failed: " + t.error};
  const AggregateRow& dp = t.report.aggregates[0];
  const AggregateRow& hp = t.report.aggregates[1];
  return {hp.mean_ego_risk <= dp.mean_ego_risk,
          fmt("mean ego risk HP %.3e vs DP %.3e", hp.mean_ego_risk, dp.mean_ego_risk)};
}

Outcome throughput(const std::vector<Scenario>& corpus) {
  // 800-sample matrix (5 x 8 x 20) run through sampling, kinematic checks,
  // costs, risk, sorting and collision checks of every sample.
  SamplingMatrix m;
  m.terminal_times = {1.0, 1.5, 2.0, 2.5, 3.0};
  for (int i = 0; i < 20; ++i) m.lateral_offsets.push_back(-3.5 + 7.0 * i / 19);
  std::vector<double> times;
  for (const Scenario& sc : corpus) {
    const World w(sc, Config{});
    const EpisodeResult ep = run_default_episode(w);
    for (std::size_t k = 0; k + 1 < ep.trace.size(); k += 10) {
      const TraceRow& row = ep.trace[k];
      const auto t0 = Clock::now();
      const FrenetState ego = cartesian_to_frenet(w.path(), row.ego);
      m.terminal_velocities.clear();
      for (int i = 0; i < 8; ++i) m.terminal_velocities.push_back(std::max(0.0, row.ego.velocity - 4.0) + i);
      TrajectoryBundle b = generate_bundle(ego, m, w.path(), sc.vehicle);
      check_bundle_kinematics(b, sc.vehicle);
      CostContext ctx;
      const auto preds = w.predictions_at(row.step);
      ctx.predictions = preds;
      ctx.ego_footprint = {sc.vehicle.length, sc.vehicle.width};
      ctx.v_target = sc.goal.target_velocity;
      evaluate_bundle(b, default_weights(), ctx);
      sort_by_cost(b);
      const ObstacleBoxes boxes = w.future_boxes(row.step);
      std::size_t free = 0;
      for (const TrajectorySample& s : b.samples)
        if (!collision_check(s, boxes, w.boundaries(), ctx.ego_footprint)) ++free;
      times.push_back(seconds_since(t0));
      if (b.samples.size() != 800 || free > 800) return {false, "unexpected bundle size"};
    }
  }
  std::sort(times.begin(), times.end());
  const double median = times[times.size() / 2];
  return {median < 0.1, fmt("%zu cycles of 800 samples, median %.2f ms, max %.2f ms", times.size(), 1e3 * median,
                            1e3 * times.back())};
}

Outcome determinism(const std::vector<Scenario>& corpus) {
  BenchOptions opt;
  opt.workers = resolve_workers(0);
  const std::string a = bench_csv(run_benchmark(corpus, Config{}, opt));
  opt.workers = 1;
  const std::string b = bench_csv(run_benchmark(corpus, Config{}, opt));
  return {a == b && !a.empty(), fmt("%zu-byte bench CSV, runs %s", a.size(), a == b ? "identical" : "differ")};
}

std::vector<Scenario> load_dir(const std::string& dir) {
  std::vector<Scenario> out;
  for (const std::string& f : list_corpus(dir)) out.push_back(load_scenario(f));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::string out_dir = "acceptance_out";
  std::string source = HPLAN_SOURCE_DIR;
  long timesteps = 200000;
  app.add_option("--out", out_dir, "Directory for training artefacts");
  app.add_option("--source", source, "Repository root holding scenarios/");
  app.add_option("--timesteps", timesteps, "Training budget for the training checks");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Scenario> corpus = load_dir(source + "/scenarios/tjunction");
  std::vector<Scenario> bundled = corpus;
  for (Scenario& s : load_dir(source + "/scenarios/fixtures")) bundled.push_back(std::move(s));

  int failed = 0;
  auto report = [&](int id, const char* name, const Outcome& o) {
    std::printf("%s  %2d %-28s %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  };
  auto guarded = [](const std::function<Outcome()>& f) {
    try {
      return f();
    } catch (const std::exception& e) {
      return Outcome{false, std::string("exception: ") + e.what()};
    }
  };

  report(1, "polynomial correctness", guarded(polynomials));
  report(2, "geometry round trip", guarded(geometry_round_trip));
  report(3, "jerk cost integral", guarded(jerk_integral));
  report(4, "collision check oracle", guarded(collision_oracle));
  report(5, "trajectory risk", guarded(risk_max));
  report(6, "weight clamping", guarded(weight_clamping));
  report(7, "hybrid contains default", guarded([&] { return hybrid_contains_default(bundled); }));
  report(8, "advantage estimation", guarded(gae));
  report(9, "policy gradient", guarded(ppo_gradient));
  report(10, "recurrent cell", guarded(lstm));
  if (corpus.size() < 24) {
    report(11, "training smoke", {false, fmt("corpus has %zu variants, need >= 24", corpus.size())});
    report(12, "risk direction", {false, "no corpus"});
  } else {
    const Trained t = train_and_compare(corpus, timesteps, out_dir);
    report(11, "training smoke", training_smoke(t));
    report(12, "risk direction", risk_direction(t));
  }
  report(13, "bundle throughput", guarded([&] { return throughput(corpus); }));
  report(14, "bench determinism", guarded([&] { return determinism(corpus); }));
  std::printf("%d of 14 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
