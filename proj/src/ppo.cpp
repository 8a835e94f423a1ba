#include "hplan/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <numeric>

#include "hplan/errors.hpp"

namespace hplan {

GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const std::uint8_t> dones, double bootstrap_value, double gamma, double lambda) {
  const std::size_t T = rewards.size();
  if (values.size() != T || dones.size() != T) throw InvalidArgument("compute_gae: length mismatch");
  GaeResult out;
  out.advantages.assign(T, 0.0);
  out.returns.assign(T, 0.0);
  double next_adv = 0.0;
  for (std::size_t t = T; t-- > 0;) {
    const double next_value = t + 1 < T ? values[t + 1] : bootstrap_value;
    const double live = dones[t] ? 0.0 : 1.0;
    const double delta = rewards[t] + gamma * next_value * live - values[t];
    next_adv = delta + gamma * lambda * live * next_adv;
    out.advantages[t] = next_adv;
    out.returns[t] = next_adv + values[t];
  }
  return out;
}

double clipped_surrogate(double ratio, double advantage, double eps) {
  const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
  return std::min(ratio * advantage, clipped * advantage);
}

void RolloutBuffer::allocate(std::size_t envs, std::size_t len, std::size_t obs_d, std::size_t act_d,
                             std::size_t state_d) {
  n_envs = envs;
  length = len;
  obs_dim = obs_d;
  act_dim = act_d;
  state_size = state_d;
  const std::size_t n = envs * len;
  obs.assign(n * obs_d, 0.0);
  u.assign(n * act_d, 0.0);
  actions.assign(n * act_d, 0.0);
  log_probs.assign(n, 0.0);
  values.assign(n, 0.0);
  rewards.assign(n, 0.0);
  dones.assign(n, 0);
  episode_starts.assign(n, 0);
  h.assign(n * state_d, 0.0);
  c.assign(n * state_d, 0.0);
  bootstrap_values.assign(envs, 0.0);
  advantages.assign(n, 0.0);
  returns.assign(n, 0.0);
}

void RolloutBuffer::finish(double gamma, double lambda) {
  for (std::size_t e = 0; e < n_envs; ++e) {
    const std::size_t b = index(e, 0);
    const GaeResult g = compute_gae({rewards.data() + b, length}, {values.data() + b, length},
                                    {dones.data() + b, length}, bootstrap_values[e], gamma, lambda);
    std::copy(g.advantages.begin(), g.advantages.end(), advantages.begin() + static_cast<std::ptrdiff_t>(b));
    std::copy(g.returns.begin(), g.returns.end(), returns.begin() + static_cast<std::ptrdiff_t>(b));
  }
}

std::vector<double> normalize_advantages(std::span<const double> adv) {
  std::vector<double> out(adv.begin(), adv.end());
  if (out.empty()) return out;
  const double mean = std::accumulate(out.begin(), out.end(), 0.0) / static_cast<double>(out.size());
  double var = 0.0;
  for (double a : out) var += (a - mean) * (a - mean);
  var /= static_cast<double>(out.size());
  const double inv = 1.0 / (std::sqrt(var) + 1e-8);
  for (double& a : out) a = (a - mean) * inv;
  return out;
}

LossStats ppo_loss(const Policy& policy, std::span<const double> params, const LossBatch& batch,
                   const LossSettings& settings, std::span<double> grads) {
  std::fill(grads.begin(), grads.end(), 0.0);
  const std::size_t N = batch.size();
  if (N == 0) throw InvalidArgument("ppo_loss: empty batch");
  const std::size_t act = policy.act_dim(), od = policy.obs_dim();
  const std::span<const double> log_std = params.subspan(policy.log_std_offset(), act);
  std::vector<double> inv_var(act), dlog_std(act, 0.0);
  for (std::size_t j = 0; j < act; ++j) inv_var[j] = std::exp(-2.0 * log_std[j]);
  const double inv_n = 1.0 / static_cast<double>(N);

  LossStats st;
  double pl = 0.0, vl = 0.0, kl = 0.0, clipped = 0.0;
  Policy::SegmentCache cache;
  std::vector<double> dmeans, dvalues;
  for (std::size_t s = 0; s < batch.seg_start.size(); ++s) {
    const std::size_t start = batch.seg_start[s], T = batch.seg_len[s];
    policy.forward_segment(params, std::span<const double>(batch.obs).subspan(start * od, T * od), T,
                           batch.seg_state[s], cache);
    dmeans.assign(T * act, 0.0);
    dvalues.assign(T, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
      const std::size_t i = start + t;
      const std::span<const double> mean(cache.means.data() + t * act, act);
      const std::span<const double> u(batch.u.data() + i * act, act);
      const double logp = gaussian::log_prob(mean, log_std, u) - gaussian::squash_log_det(u);
      const double ratio = std::exp(logp - batch.old_log_prob[i]);
      const double adv = batch.advantages[i];
      const double surr1 = ratio * adv;
      const double surr2 = std::clamp(ratio, 1.0 - settings.clip_eps, 1.0 + settings.clip_eps) * adv;
      pl -= std::min(surr1, surr2);
      // Gradient flows only through the unclipped branch.
      const double g = surr1 <= surr2 ? -adv * ratio * inv_n : 0.0;
      for (std::size_t j = 0; j < act; ++j) {
        const double z = u[j] - mean[j];
        dmeans[t * act + j] = g * z * inv_var[j];
        dlog_std[j] += g * (z * z * inv_var[j] - 1.0);
      }
      const double err = cache.values[t] - batch.returns[i];
      vl += err * err;
      dvalues[t] = settings.value_coef * 2.0 * err * inv_n;
      kl += batch.old_log_prob[i] - logp;
      if (std::abs(ratio - 1.0) > settings.clip_eps) clipped += 1.0;
    }
    policy.backward_segment(params, cache, dmeans, dvalues, grads);
  }
  const double entropy = gaussian::entropy(log_std);
  for (std::size_t j = 0; j < act; ++j) grads[policy.log_std_offset() + j] += dlog_std[j] - settings.entropy_coef;

  st.policy_loss = pl * inv_n;
  st.value_loss = vl * inv_n;
  st.entropy = entropy;
  st.loss = st.policy_loss + settings.value_coef * st.value_loss - settings.entropy_coef * entropy;
  st.approx_kl = kl * inv_n;
  st.clip_fraction = clipped * inv_n;
  if (!std::isfinite(st.loss)) {
    char msg[160];
    std::snprintf(msg, sizeof msg, "non-finite PPO loss (policy %.3g, value %.3g, entropy %.3g)", st.policy_loss,
                  st.value_loss, st.entropy);
    throw TrainingError(msg);
  }
  return st;
}

RolloutCursor start_rollouts(std::span<Environment* const> envs, const Policy& policy, std::uint64_t seed) {
  RolloutCursor cur;
  cur.rng.seed(seed);
  for (Environment* env : envs) {
    cur.obs.push_back(env->reset(cur.rng()));
    cur.lstm.push_back(policy.initial_state());
    cur.episode_start.push_back(1);
    cur.running_return.push_back(0.0);
    ++cur.resets;
  }
  return cur;
}

void collect_rollouts(std::span<Environment* const> envs, const Policy& policy, std::size_t length,
                      RolloutCursor& cur, RolloutBuffer& buf, int workers) {
  const std::size_t n = envs.size();
  const std::size_t od = policy.obs_dim(), ad = policy.act_dim(), sd = policy.state_size();
  buf.allocate(n, length, od, ad, sd);
  std::vector<ActSample> acts(n);
  std::vector<StepResult> results(n);
  for (std::size_t t = 0; t < length; ++t) {
    for (std::size_t e = 0; e < n; ++e) {
      const std::size_t i = buf.index(e, t);
      if (cur.episode_start[e]) cur.lstm[e] = policy.initial_state();
      std::copy(cur.obs[e].begin(), cur.obs[e].end(), buf.obs.begin() + static_cast<std::ptrdiff_t>(i * od));
      std::copy(cur.lstm[e].h.begin(), cur.lstm[e].h.end(), buf.h.begin() + static_cast<std::ptrdiff_t>(i * sd));
      std::copy(cur.lstm[e].c.begin(), cur.lstm[e].c.end(), buf.c.begin() + static_cast<std::ptrdiff_t>(i * sd));
      buf.episode_starts[i] = cur.episode_start[e];
      acts[e] = policy.sample(cur.obs[e], cur.lstm[e], cur.rng);
    }
    if (workers > 1 && n > 1) {
      std::vector<std::future<void>> jobs;
      const std::size_t per = (n + static_cast<std::size_t>(workers) - 1) / static_cast<std::size_t>(workers);
      for (std::size_t b = 0; b < n; b += per)
        jobs.push_back(std::async(std::launch::async, [&, b] {
          for (std::size_t e = b; e < std::min(n, b + per); ++e) results[e] = envs[e]->step(acts[e].action);
        }));
      for (auto& j : jobs) j.get();
    } else {
      for (std::size_t e = 0; e < n; ++e) results[e] = envs[e]->step(acts[e].action);
    }
    for (std::size_t e = 0; e < n; ++e) {
      const std::size_t i = buf.index(e, t);
      std::copy(acts[e].u.begin(), acts[e].u.end(), buf.u.begin() + static_cast<std::ptrdiff_t>(i * ad));
      std::copy(acts[e].action.begin(), acts[e].action.end(),
                buf.actions.begin() + static_cast<std::ptrdiff_t>(i * ad));
      buf.log_probs[i] = acts[e].log_prob;
      buf.values[i] = acts[e].value;
      buf.rewards[i] = results[e].reward;
      buf.dones[i] = results[e].terminated ? 1 : 0;
      cur.running_return[e] += results[e].reward;
      if (results[e].terminated) {
        cur.completed_returns.push_back(cur.running_return[e]);
        cur.completed_status.push_back(results[e].status.value_or(TerminationStatus::Running));
        cur.running_return[e] = 0.0;
        cur.obs[e] = envs[e]->reset(cur.rng());
        ++cur.resets;
        cur.episode_start[e] = 1;
      } else {
        cur.obs[e] = std::move(results[e].observation);
        cur.episode_start[e] = 0;
      }
    }
  }
  // Bootstrap from the state after the last step (masked by dones[T-1]).
  for (std::size_t e = 0; e < n; ++e) {
    LstmState s = cur.episode_start[e] ? policy.initial_state() : cur.lstm[e];
    std::vector<double> mean;
    policy.forward(cur.obs[e], s, mean, buf.bootstrap_values[e]);
  }
}

namespace {

LossBatch gather(const RolloutBuffer& buf, std::span<const double> norm_adv,
                 const std::vector<std::pair<std::size_t, std::size_t>>& segments) {
  // segments: (first flat index, length); steps inside a segment are consecutive in one env.
  LossBatch b;
  const std::size_t od = buf.obs_dim, ad = buf.act_dim, sd = buf.state_size;
  for (const auto& [first, len] : segments) {
    b.seg_start.push_back(b.returns.size());
    b.seg_len.push_back(len);
    b.seg_state.push_back({std::vector<double>(buf.h.begin() + static_cast<std::ptrdiff_t>(first * sd),
                                               buf.h.begin() + static_cast<std::ptrdiff_t>((first + 1) * sd)),
                           std::vector<double>(buf.c.begin() + static_cast<std::ptrdiff_t>(first * sd),
                                               buf.c.begin() + static_cast<std::ptrdiff_t>((first + 1) * sd))});
    for (std::size_t i = first; i < first + len; ++i) {
      b.obs.insert(b.obs.end(), buf.obs.begin() + static_cast<std::ptrdiff_t>(i * od),
                   buf.obs.begin() + static_cast<std::ptrdiff_t>((i + 1) * od));
      b.u.insert(b.u.end(), buf.u.begin() + static_cast<std::ptrdiff_t>(i * ad),
                 buf.u.begin() + static_cast<std::ptrdiff_t>((i + 1) * ad));
      b.old_log_prob.push_back(buf.log_probs[i]);
      b.advantages.push_back(norm_adv[i]);
      b.returns.push_back(buf.returns[i]);
    }
  }
  return b;
}

// Feed-forward: one merged segment per minibatch. Recurrent: sequence-
// contiguous chunks that never cross an episode start.
std::vector<std::vector<std::pair<std::size_t, std::size_t>>> make_minibatches(const RolloutBuffer& buf,
                                                                                const Hyperparams& hp,
                                                                                bool recurrent, int seq_len,
                                                                                std::mt19937_64& rng) {
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> out;
  const std::size_t mb = static_cast<std::size_t>(hp.minibatch_size);
  if (!recurrent) {
    std::vector<std::size_t> idx(buf.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(std::min(idx.size(), static_cast<std::size_t>(hp.batch_size)));
    for (std::size_t b = 0; b < idx.size(); b += mb) {
      std::vector<std::pair<std::size_t, std::size_t>> steps;
      for (std::size_t i = b; i < std::min(idx.size(), b + mb); ++i) steps.emplace_back(idx[i], 1);
      out.push_back(std::move(steps));
    }
    return out;
  }
  std::vector<std::pair<std::size_t, std::size_t>> segs;
  for (std::size_t e = 0; e < buf.n_envs; ++e) {
    std::size_t first = buf.index(e, 0), len = 0;
    for (std::size_t t = 0; t < buf.length; ++t) {
      const std::size_t i = buf.index(e, t);
      if (len > 0 && (buf.episode_starts[i] || len == static_cast<std::size_t>(seq_len))) {
        segs.emplace_back(first, len);
        first = i;
        len = 0;
      }
      ++len;
    }
    if (len > 0) segs.emplace_back(first, len);
  }
  std::shuffle(segs.begin(), segs.end(), rng);
  std::vector<std::pair<std::size_t, std::size_t>> cur;
  std::size_t count = 0;
  for (const auto& s : segs) {
    cur.push_back(s);
    count += s.second;
    if (count >= mb) {
      out.push_back(std::move(cur));
      cur.clear();
      count = 0;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

TrainResult train(const EnvFactory& make_env, const PolicyEvaluator& evaluate, const TrainOptions& opt) {
  const Hyperparams& hp = opt.hp;
  hp.validate();
  std::vector<std::unique_ptr<Environment>> owned;
  std::vector<Environment*> envs;
  for (int i = 0; i < hp.n_envs; ++i) {
    owned.push_back(make_env(i));
    envs.push_back(owned.back().get());
  }
  Policy policy(envs[0]->observation_dim(), envs[0]->action_dim(), opt.spec, hp.init_log_std, opt.seed);

  TrainResult result;
  result.initial = policy;
  result.best = policy;
  TrainLogRow row0;
  row0.evaluated = true;
  row0.eval = evaluate(policy);
  result.best_eval_return = row0.eval.mean_return;
  result.log.push_back(row0);
  if (opt.on_update) opt.on_update(row0);

  const long per_rollout = static_cast<long>(hp.rollout_length) * hp.n_envs;
  const long n_updates = hp.total_timesteps <= 0 ? 0 : (hp.total_timesteps + per_rollout - 1) / per_rollout;
  if (n_updates == 0) {
    result.final = policy;
    return result;
  }

  nn::Adam adam(policy.params().size(), hp.learning_rate);
  RolloutCursor cursor = start_rollouts(envs, policy, opt.seed * 0x9E3779B97F4A7C15ull + 1);
  std::mt19937_64 shuffle_rng(opt.seed + 17);
  RolloutBuffer buf;
  const LossSettings ls{hp.clip_eps, hp.entropy_coef, hp.value_coef};
  std::vector<double> grads(policy.params().size());
  long timesteps = 0;

  for (long update = 1; update <= n_updates; ++update) {
    if (hp.anneal_lr)
      adam.set_lr(hp.learning_rate * (1.0 - static_cast<double>(update - 1) / static_cast<double>(n_updates)));
    cursor.completed_returns.clear();
    cursor.completed_status.clear();
    collect_rollouts(envs, policy, static_cast<std::size_t>(hp.rollout_length), cursor, buf, opt.workers);
    timesteps += per_rollout;
    buf.finish(hp.gamma, hp.gae_lambda);
    const std::vector<double> adv = normalize_advantages(buf.advantages);

    const std::vector<double> snapshot = policy.params();
    TrainLogRow row;
    row.update = static_cast<int>(update);
    row.timesteps = timesteps;
    int n_mb = 0;
    try {
      for (int epoch = 0; epoch < hp.epochs; ++epoch) {
        for (const auto& segs : make_minibatches(buf, hp, policy.recurrent(), opt.recurrent_sequence, shuffle_rng)) {
          const LossBatch batch = gather(buf, adv, segs);
          const LossStats st = ppo_loss(policy, policy.params(), batch, ls, grads);
          nn::clip_grad_norm(grads, hp.max_grad_norm);
          adam.step(policy.params(), grads);
          row.stats.loss += st.loss;
          row.stats.policy_loss += st.policy_loss;
          row.stats.value_loss += st.value_loss;
          row.stats.entropy += st.entropy;
          row.stats.approx_kl += st.approx_kl;
          row.stats.clip_fraction += st.clip_fraction;
          ++n_mb;
        }
      }
      if (!all_finite(policy.params())) throw TrainingError("non-finite parameters after update");
    } catch (const TrainingError& e) {
      policy.params() = snapshot;
      result.aborted = true;
      result.abort_reason = e.what();
      break;
    }
    if (n_mb > 0) {
      const double k = 1.0 / n_mb;
      row.stats.loss *= k;
      row.stats.policy_loss *= k;
      row.stats.value_loss *= k;
      row.stats.entropy *= k;
      row.stats.approx_kl *= k;
      row.stats.clip_fraction *= k;
    }
    row.train_episodes = static_cast<int>(cursor.completed_returns.size());
    if (row.train_episodes > 0)
      row.mean_train_return = std::accumulate(cursor.completed_returns.begin(), cursor.completed_returns.end(), 0.0) /
                              row.train_episodes;
    if (update % hp.eval_interval == 0 || update == n_updates) {
      row.evaluated = true;
      row.eval = evaluate(policy);
      if (row.eval.mean_return > result.best_eval_return) {
        result.best_eval_return = row.eval.mean_return;
        result.best = policy;
        result.best_update = static_cast<int>(update);
      }
    }
    result.log.push_back(row);
    if (opt.on_update) opt.on_update(row);
  }
  result.final = policy;
  return result;
}

std::string train_log_header() {
  return "update,timesteps,loss,policy_loss,value_loss,entropy,approx_kl,clip_fraction,train_return,"
         "train_episodes,eval_return,eval_success,eval_collisions,eval_episodes";
}

std::string train_log_row(const TrainLogRow& r) {
  char buf[512];
  char eval[128] = ",,,";
  if (r.evaluated)
    std::snprintf(eval, sizeof eval, "%.9g,%d,%d,%d", r.eval.mean_return, r.eval.successes, r.eval.collisions,
                  r.eval.episodes);
  std::snprintf(buf, sizeof buf, "%d,%ld,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%d,%s", r.update, r.timesteps,
                r.stats.loss, r.stats.policy_loss, r.stats.value_loss, r.stats.entropy, r.stats.approx_kl,
                r.stats.clip_fraction, r.mean_train_return, r.train_episodes, eval);
  return buf;
}

}  // namespace hplan
