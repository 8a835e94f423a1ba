#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <filesystem>
#include <random>

#include "hplan/errors.hpp"
#include "hplan/ppo.hpp"
#include "oracles.hpp"

using namespace hplan;

namespace {

// One-step episodes rewarding actions near `target`.
class BanditEnv final : public Environment {
 public:
  explicit BanditEnv(double target) : target_(target) {}
  std::size_t observation_dim() const override { return 2; }
  std::size_t action_dim() const override { return 1; }
  std::vector<double> reset(std::uint64_t) override {
    live_ = true;
    return {1.0, 0.0};
  }
  StepResult step(std::span<const double> a) override {
    if (!live_) throw ProtocolError("terminated");
    live_ = false;
    StepResult r;
    r.observation = {1.0, 0.0};
    r.reward = -std::abs(a[0] - target_);
    r.terminated = true;
    r.status = TerminationStatus::GoalReachedInTime;
    return r;
  }

 private:
  double target_;
  bool live_ = false;
};

// Fixed-length episodes; the observation is the step counter.
class CounterEnv final : public Environment {
 public:
  explicit CounterEnv(int length) : length_(length) {}
  std::size_t observation_dim() const override { return 3; }
  std::size_t action_dim() const override { return 2; }
  std::vector<double> reset(std::uint64_t seed) override {
    t_ = 0;
    seed_ = static_cast<double>(seed % 1000) / 1000.0;
    return obs();
  }
  StepResult step(std::span<const double> a) override {
    ++t_;
    StepResult r;
    r.observation = obs();
    r.reward = a[0] - 0.5 * a[1] * a[1];
    r.terminated = t_ >= length_;
    if (r.terminated) r.status = TerminationStatus::Timeout;
    return r;
  }

 private:
  std::vector<double> obs() const { return {static_cast<double>(t_) / length_, seed_, 1.0}; }
  int length_;
  int t_ = 0;
  double seed_ = 0.0;
};

LossBatch random_batch(const Policy& policy, std::size_t segs, std::size_t len, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, 3);
  LossBatch b;
  const std::size_t od = policy.obs_dim(), ad = policy.act_dim();
  for (std::size_t s = 0; s < segs; ++s) {
    b.seg_start.push_back(s * len);
    b.seg_len.push_back(len);
    LstmState st = policy.initial_state();
    for (double& v : st.h) v = 0.3 * nd(rng);
    for (double& v : st.c) v = 0.3 * nd(rng);
    b.seg_state.push_back(st);
    LstmState run = st;
    for (std::size_t t = 0; t < len; ++t) {
      std::vector<double> obs(od);
      for (double& v : obs) v = nd(rng);
      std::vector<double> mean;
      double value = 0.0;
      policy.forward(obs, run, mean, value);
      std::vector<double> u(ad);
      for (std::size_t j = 0; j < ad; ++j) u[j] = mean[j] + 0.5 * nd(rng);
      const double logp = gaussian::log_prob(mean, policy.log_std(), u) - gaussian::squash_log_det(u);
      // Ratios either well inside the clip range or well outside it, so the
      // loss is smooth at the test point.
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

void check_loss_gradient(bool recurrent) {
  PolicySpec spec;
  spec.hidden = {8, 8};
  spec.recurrent = recurrent;
  spec.lstm_hidden = 6;
  const Policy policy(5, 3, spec, -0.5, 21);
  std::mt19937_64 rng(recurrent ? 2 : 1);
  const LossBatch batch = random_batch(policy, recurrent ? 4 : 1, recurrent ? 6 : 24, rng);
  const LossSettings ls{0.1, 0.01, 0.5};
  std::vector<double> grads(policy.params().size());
  ppo_loss(policy, policy.params(), batch, ls, grads);
  std::vector<double> scratch(grads.size());
  const std::size_t n = policy.params().size();
  std::uniform_int_distribution<std::size_t> any(0, n - 1);
  std::vector<std::size_t> coords;
  for (std::size_t j = 0; j < policy.act_dim(); ++j) coords.push_back(policy.log_std_offset() + j);
  while (coords.size() < 220) coords.push_back(any(rng));
  const double h = 1e-6;
  int bad = 0;
  for (std::size_t i : coords) {
    std::vector<double> p = policy.params(), m = policy.params();
    p[i] += h;
    m[i] -= h;
    const double fd = (ppo_loss(policy, p, batch, ls, scratch).loss - ppo_loss(policy, m, batch, ls, scratch).loss) /
                      (2 * h);
    if (std::abs(fd - grads[i]) > 1e-6 + 1e-4 * std::abs(fd)) ++bad;
  }
  CHECK(bad == 0);
}

}  // namespace

TEST_CASE("GAE matches the direct discounted sum") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd(0.0, 1.0);
  const std::size_t T = 40;
  std::vector<double> r(T), v(T);
  std::vector<int> done(T, 0);
  std::vector<std::uint8_t> done8(T, 0);
  for (std::size_t t = 0; t < T; ++t) {
    r[t] = nd(rng);
    v[t] = nd(rng);
  }
  for (std::size_t t : {7u, 19u, 20u}) done[t] = done8[t] = 1;
  for (double lambda : {0.0, 0.5, 0.97, 1.0}) {
    const GaeResult g = compute_gae(r, v, done8, 0.7, 0.99, lambda);
    const auto want = oracle::gae_direct(r, v, done, 0.7, 0.99, lambda);
    for (std::size_t t = 0; t < T; ++t) {
      CHECK(std::abs(g.advantages[t] - want[t]) < 1e-10);
      CHECK(g.returns[t] == doctest::Approx(want[t] + v[t]));
    }
  }
  // lambda = 1 gives Monte-Carlo returns inside a finished episode.
  const GaeResult g = compute_gae(r, v, done8, 0.7, 0.9, 1.0);
  double mc = 0.0;
  for (std::size_t t = 8; t-- > 0;) mc = r[t] + 0.9 * mc;
  CHECK(g.returns[0] == doctest::Approx(mc));
  CHECK_THROWS_AS(compute_gae(r, std::vector<double>(3), done8, 0, 0.9, 1.0), InvalidArgument);
}

TEST_CASE("clipped surrogate examples") {
  CHECK(clipped_surrogate(1.3, 1.0, 0.1) == doctest::Approx(1.1));
  CHECK(clipped_surrogate(0.5, -1.0, 0.1) == doctest::Approx(-0.9));
  CHECK(clipped_surrogate(0.5, 1.0, 0.1) == doctest::Approx(0.5));
  CHECK(clipped_surrogate(1.3, -1.0, 0.1) == doctest::Approx(-1.3));
}

TEST_CASE("advantage normalisation") {
  const std::vector<double> a{1.0, 2.0, 3.0, 4.0};
  const auto n = normalize_advantages(a);
  double mean = 0.0, var = 0.0;
  for (double x : n) mean += x / 4;
  for (double x : n) var += (x - mean) * (x - mean) / 4;
  CHECK(std::abs(mean) < 1e-12);
  CHECK(var == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("PPO loss gradient matches finite differences (feed-forward)") { check_loss_gradient(false); }
TEST_CASE("PPO loss gradient matches finite differences (recurrent)") { check_loss_gradient(true); }

TEST_CASE("non-finite losses raise TrainingError") {
  const Policy policy(5, 3, PolicySpec{{8}, false, 4}, -0.5, 3);
  std::mt19937_64 rng(4);
  LossBatch b = random_batch(policy, 1, 4, rng);
  b.returns[0] = std::numeric_limits<double>::infinity();
  std::vector<double> grads(policy.params().size());
  CHECK_THROWS_AS(ppo_loss(policy, policy.params(), b, LossSettings{}, grads), TrainingError);
}

TEST_CASE("rollout collection") {
  for (bool recurrent : {false, true}) {
    PolicySpec spec{{8}, recurrent, 4};
    const Policy policy(3, 2, spec, -0.5, 5);
    std::vector<std::unique_ptr<Environment>> owned;
    std::vector<Environment*> envs;
    for (int i = 0; i < 2; ++i) {
      owned.push_back(std::make_unique<CounterEnv>(3));
      envs.push_back(owned.back().get());
    }
    RolloutCursor cur = start_rollouts(envs, policy, 11);
    RolloutBuffer buf;
    collect_rollouts(envs, policy, 8, cur, buf);
    CHECK(buf.size() == 16);
    CHECK(buf.rewards.size() == 16);
    CHECK(buf.obs.size() == 16 * 3);
    for (std::size_t e = 0; e < 2; ++e)
      for (std::size_t t = 0; t < 8; ++t) {
        CHECK(buf.dones[buf.index(e, t)] == (t % 3 == 2 ? 1 : 0));
        CHECK(buf.episode_starts[buf.index(e, t)] == (t % 3 == 0 ? 1 : 0));
        if (recurrent && t % 3 == 0) CHECK(buf.h[buf.index(e, t) * 4] == 0.0);
      }
    CHECK(cur.completed_returns.size() == 4);

    RolloutCursor cur2 = start_rollouts(envs, policy, 11);
    RolloutBuffer buf2;
    collect_rollouts(envs, policy, 8, cur2, buf2, 2);
    CHECK(buf2.u == buf.u);
    CHECK(buf2.rewards == buf.rewards);
    buf.finish(0.99, 0.95);
    CHECK(buf.advantages.size() == 16);
  }
}

TEST_CASE("zero timesteps returns the initial policy") {
  TrainOptions opt;
  opt.hp.total_timesteps = 0;
  opt.hp.n_envs = 2;
  opt.hp.rollout_length = 8;
  opt.hp.batch_size = 16;
  opt.hp.minibatch_size = 8;
  opt.spec.hidden = {8};
  int evals = 0;
  const TrainResult r = train([](int) { return std::make_unique<BanditEnv>(0.5); },
                              [&](const Policy&) {
                                ++evals;
                                return EvalSummary{};
                              },
                              opt);
  CHECK(evals == 1);
  CHECK(r.final == r.initial);
  CHECK(r.best == r.initial);
  CHECK(r.log.size() == 1);
}

TEST_CASE("PPO solves a one-step bandit") {
  TrainOptions opt;
  opt.hp.total_timesteps = 50000;
  opt.hp.n_envs = 4;
  opt.hp.rollout_length = 128;
  opt.hp.batch_size = 512;
  opt.hp.minibatch_size = 128;
  opt.hp.learning_rate = 3e-3;
  opt.hp.eval_interval = 5;
  opt.spec.hidden = {16};
  opt.seed = 3;
  auto evaluate = [](const Policy& p) {
    LstmState s = p.initial_state();
    const std::vector<double> obs{1.0, 0.0};
    EvalSummary e;
    e.episodes = 1;
    e.mean_return = -std::abs(p.act_deterministic(obs, s)[0] - 0.5);
    return e;
  };
  const TrainResult r = train([](int) { return std::make_unique<BanditEnv>(0.5); }, evaluate, opt);
  CHECK_FALSE(r.aborted);
  CHECK(evaluate(r.final).mean_return > -0.1);
  CHECK(r.best_eval_return >= evaluate(r.initial).mean_return);
  CHECK(r.log.back().timesteps >= 50000);

  const TrainResult again = train([](int) { return std::make_unique<BanditEnv>(0.5); }, evaluate, opt);
  CHECK(again.final == r.final);
}

TEST_CASE("checkpoint round trip") {
  const Policy p(57, 5, PolicySpec{{16, 16}, true, 8}, -0.5, 9);
  const auto path = (std::filesystem::temp_directory_path() / "hplan_ckpt_test.ckpt").string();
  ObservationScales sc;
  sc.distance = 42.0;
  p.save(path, "abcdef0123456789", sc);
  std::string hash;
  ObservationScales back;
  const Policy q = Policy::load(path, &hash, &back);
  CHECK(q == p);
  CHECK(q.recurrent());
  CHECK(hash == "abcdef0123456789");
  CHECK(back.distance == 42.0);
  std::filesystem::remove(path);
  CHECK_THROWS(Policy::load(path));
}

TEST_CASE("train log rows") {
  TrainLogRow row;
  row.update = 3;
  const std::string h = train_log_header(), r = train_log_row(row);
  CHECK(std::count(h.begin(), h.end(), ',') == std::count(r.begin(), r.end(), ','));
}
