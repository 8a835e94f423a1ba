#include "hplan/policy.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "hplan/errors.hpp"

namespace hplan {

namespace gaussian {

double log_prob(std::span<const double> mean, std::span<const double> log_std, std::span<const double> u) {
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  double lp = 0.0;
  for (std::size_t j = 0; j < mean.size(); ++j) {
    const double z = (u[j] - mean[j]) * std::exp(-log_std[j]);
    lp += -0.5 * z * z - log_std[j] - half_log_2pi;
  }
  return lp;
}

double squash_log_det(std::span<const double> u) {
  // log(1 - tanh(u)^2) = 2 * (log 2 - u - softplus(-2u)), stable for large |u|.
  double acc = 0.0;
  for (double x : u) {
    const double m = -2.0 * x;
    const double softplus = m > 0.0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
    acc += 2.0 * (std::numbers::ln2 - x - softplus);
  }
  return acc;
}

double entropy(std::span<const double> log_std) {
  const double c = 0.5 + 0.5 * std::log(2.0 * std::numbers::pi);
  double h = 0.0;
  for (double ls : log_std) h += c + ls;
  return h;
}

}  // namespace gaussian

Policy::Policy(std::size_t obs_dim, std::size_t act_dim, PolicySpec spec, double init_log_std, std::uint64_t seed)
    : obs_dim_(obs_dim), act_dim_(act_dim), spec_(std::move(spec)) {
  build_layout();
  std::mt19937_64 rng(seed);
  if (spec_.recurrent) lstm_.init(params_, rng);
  actor_.init(params_, rng, 0.01);
  critic_.init(params_, rng, 1.0);
  for (std::size_t j = 0; j < act_dim_; ++j) params_[log_std_ + j] = init_log_std;
}

void Policy::build_layout() {
  nn::ParameterLayout layout;
  std::size_t feat = obs_dim_;
  if (spec_.recurrent) {
    lstm_ = nn::LstmCell::make(layout, obs_dim_, static_cast<std::size_t>(spec_.lstm_hidden));
    feat = lstm_.hidden;
  }
  actor_ = nn::Mlp::make(layout, feat, spec_.hidden, act_dim_);
  critic_ = nn::Mlp::make(layout, feat, spec_.hidden, 1);
  log_std_ = layout.allocate(act_dim_);
  params_.assign(layout.size(), 0.0);
}

LstmState Policy::initial_state() const {
  return {std::vector<double>(state_size(), 0.0), std::vector<double>(state_size(), 0.0)};
}

void Policy::forward(std::span<const double> obs, LstmState& state, std::vector<double>& mean, double& value) const {
  std::vector<double> feat;
  std::span<const double> input = obs;
  if (spec_.recurrent) {
    std::vector<double> h(lstm_.hidden), c(lstm_.hidden);
    lstm_.step(params_, obs, state.h, state.c, h, c, nullptr);
    state.h = h;
    state.c = c;
    feat = std::move(h);
    input = feat;
  }
  nn::Mlp::Cache cache;
  mean.resize(act_dim_);
  actor_.forward(params_, input, cache, mean);
  double v = 0.0;
  critic_.forward(params_, input, cache, {&v, 1});
  value = v;
}

ActSample Policy::sample(std::span<const double> obs, LstmState& state, std::mt19937_64& rng) const {
  ActSample s;
  std::vector<double> mean;
  forward(obs, state, mean, s.value);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::span<const double> ls = log_std();
  s.u.resize(act_dim_);
  s.action.resize(act_dim_);
  for (std::size_t j = 0; j < act_dim_; ++j) {
    s.u[j] = mean[j] + std::exp(ls[j]) * normal(rng);
    s.action[j] = std::tanh(s.u[j]);
  }
  s.log_prob = gaussian::log_prob(mean, ls, s.u) - gaussian::squash_log_det(s.u);
  return s;
}

std::vector<double> Policy::act_deterministic(std::span<const double> obs, LstmState& state) const {
  std::vector<double> mean;
  double value = 0.0;
  forward(obs, state, mean, value);
  for (double& m : mean) m = std::tanh(m);
  return mean;
}

void Policy::forward_segment(std::span<const double> params, std::span<const double> obs, std::size_t T,
                             const LstmState& start, SegmentCache& cache) const {
  cache.actor.resize(T);
  cache.critic.resize(T);
  cache.means.assign(T * act_dim_, 0.0);
  cache.values.assign(T, 0.0);
  cache.lstm.resize(spec_.recurrent ? T : 0);
  std::vector<double> h = start.h, c = start.c, h_next(state_size()), c_next(state_size());
  for (std::size_t t = 0; t < T; ++t) {
    std::span<const double> x = obs.subspan(t * obs_dim_, obs_dim_);
    std::span<const double> feat = x;
    if (spec_.recurrent) {
      lstm_.step(params, x, h, c, h_next, c_next, &cache.lstm[t]);
      h.swap(h_next);
      c.swap(c_next);
      feat = h;
    }
    actor_.forward(params, feat, cache.actor[t], {cache.means.data() + t * act_dim_, act_dim_});
    critic_.forward(params, feat, cache.critic[t], {cache.values.data() + t, 1});
  }
}

void Policy::backward_segment(std::span<const double> params, const SegmentCache& cache,
                              std::span<const double> dmeans, std::span<const double> dvalues,
                              std::span<double> grads) const {
  const std::size_t T = cache.values.size();
  const std::size_t H = state_size();
  std::vector<double> dfeat(spec_.recurrent ? H : 0);
  std::vector<double> dh(H, 0.0), dc(H, 0.0), dh_prev(H), dc_prev(H);
  for (std::size_t t = T; t-- > 0;) {
    if (spec_.recurrent) std::fill(dfeat.begin(), dfeat.end(), 0.0);
    actor_.backward(params, cache.actor[t], dmeans.subspan(t * act_dim_, act_dim_), grads, dfeat);
    critic_.backward(params, cache.critic[t], dvalues.subspan(t, 1), grads, dfeat);
    if (spec_.recurrent) {
      for (std::size_t j = 0; j < H; ++j) dh[j] += dfeat[j];
      lstm_.backward(params, cache.lstm[t], dh, dc, grads, {}, dh_prev, dc_prev);
      dh.swap(dh_prev);
      dc.swap(dc_prev);
    }
  }
}

void Policy::save(const std::string& path, const std::string& config_hash, const ObservationScales& scales) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path);
  out << "hplan-policy 1\n";
  out << "config_hash " << config_hash << "\n";
  out << "obs_dim " << obs_dim_ << "\n";
  out << "act_dim " << act_dim_ << "\n";
  out << "hidden";
  for (int h : spec_.hidden) out << ' ' << h;
  out << "\n";
  out << "recurrent " << (spec_.recurrent ? 1 : 0) << "\n";
  out << "lstm_hidden " << spec_.lstm_hidden << "\n";
  char buf[64];
  out << "obs_scales";
  for (double v : {scales.velocity, scales.distance, scales.acceleration, scales.cost, scales.clip}) {
    std::snprintf(buf, sizeof buf, " %.17g", v);
    out << buf;
  }
  out << "\n";
  out << "params " << params_.size() << "\n";
  for (double v : params_) {
    std::snprintf(buf, sizeof buf, "%.17g\n", v);
    out << buf;
  }
  if (!out) throw std::runtime_error("failed writing checkpoint " + path);
}

Policy Policy::load(const std::string& path, std::string* config_hash, ObservationScales* scales) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path);
  auto fail = [&](const std::string& what) { throw std::runtime_error("checkpoint " + path + ": " + what); };
  std::string line, key;
  auto next_line = [&](const char* expect) {
    if (!std::getline(in, line)) fail(std::string("missing ") + expect);
    std::istringstream ss(line);
    ss >> key;
    if (key != expect) fail(std::string("expected '") + expect + "'");
    return ss;
  };
  {
    auto ss = next_line("hplan-policy");
    int version = 0;
    ss >> version;
    if (version != 1) fail("unsupported version");
  }
  std::string hash;
  next_line("config_hash") >> hash;
  Policy p;
  next_line("obs_dim") >> p.obs_dim_;
  next_line("act_dim") >> p.act_dim_;
  {
    auto ss = next_line("hidden");
    p.spec_.hidden.clear();
    int h = 0;
    while (ss >> h) p.spec_.hidden.push_back(h);
  }
  int rec = 0;
  next_line("recurrent") >> rec;
  p.spec_.recurrent = rec != 0;
  next_line("lstm_hidden") >> p.spec_.lstm_hidden;
  ObservationScales sc;
  next_line("obs_scales") >> sc.velocity >> sc.distance >> sc.acceleration >> sc.cost >> sc.clip;
  std::size_t n = 0;
  next_line("params") >> n;
  if (p.obs_dim_ == 0 || p.act_dim_ == 0 || p.spec_.hidden.empty()) fail("invalid dimensions");
  p.build_layout();
  if (n != p.params_.size()) fail("parameter count does not match the architecture");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::getline(in, line)) fail("truncated parameter list");
    char* end = nullptr;
    p.params_[i] = std::strtod(line.c_str(), &end);
    if (end == line.c_str()) fail("bad parameter value");
  }
  if (config_hash) *config_hash = hash;
  if (scales) *scales = sc;
  return p;
}

}  // namespace hplan
