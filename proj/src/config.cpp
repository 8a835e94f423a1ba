#include "hplan/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hplan/errors.hpp"

namespace hplan {
namespace {

using Ref = std::variant<double*, int*, long*, std::uint64_t*, bool*, std::vector<double>*, std::vector<int>*,
                         WeightReset*>;

struct Binding {
  std::string section;
  std::string key;
  Ref ref;
};

std::vector<Binding> bindings(Config& c) {
  std::vector<Binding> b;
  auto add = [&](const char* section, const char* key, Ref ref) { b.push_back({section, key, ref}); };
  add("general", "seed", &c.seed);

  add("vehicle", "wheelbase", &c.vehicle.wheelbase);
  add("vehicle", "length", &c.vehicle.length);
  add("vehicle", "width", &c.vehicle.width);
  add("vehicle", "max_steering", &c.vehicle.max_steering);
  add("vehicle", "max_abs_acceleration", &c.vehicle.max_abs_acceleration);
  add("vehicle", "max_velocity", &c.vehicle.max_velocity);
  add("vehicle", "max_curvature_rate", &c.vehicle.max_curvature_rate);
  add("vehicle", "yaw_rate_tolerance", &c.vehicle.yaw_rate_tolerance);

  add("sampling", "terminal_times", &c.sampling.terminal_times);
  add("sampling", "n_velocities", &c.sampling.n_velocities);
  add("sampling", "velocity_span", &c.sampling.velocity_span);
  add("sampling", "n_offsets", &c.sampling.n_offsets);
  add("sampling", "max_offset", &c.sampling.max_offset);
  add("sampling", "path_spacing", &c.path_spacing);

  for (std::size_t i = 0; i < kNumCostTerms; ++i)
    add("weights", cost_term_name(static_cast<CostTerm>(i)), &c.default_weights[i]);
  add("weights", "max_factor", &c.weight_max_factor);
  add("weights", "action_factor", &c.action_factor);
  add("weights", "reset", &c.env.weight_reset);

  add("harm", "slope", &c.harm.slope);
  add("harm", "offset", &c.harm.offset);
  add("harm", "ego_mass", &c.harm.ego_mass);
  add("harm", "obstacle_mass", &c.harm.obstacle_mass);

  add("prediction", "sigma0_sq", &c.prediction.sigma0_sq);
  add("prediction", "growth", &c.prediction.growth);

  RewardConfig& r = c.env.reward;
  add("reward", "goal_reached", &r.goal_reached);
  add("reward", "goal_faster", &r.goal_faster);
  add("reward", "goal_slower", &r.goal_slower);
  add("reward", "collision", &r.collision);
  add("reward", "no_feasible", &r.no_feasible);
  add("reward", "timeout", &r.timeout);
  add("reward", "dist_ref", &r.dist_ref);
  add("reward", "velocity_diff", &r.velocity_diff);
  add("reward", "s_progress", &r.s_progress);
  add("reward", "action_regulation", &r.action_regulation);
  add("reward", "ego_risk", &r.ego_risk);
  add("reward", "obstacle_risk", &r.obstacle_risk);

  ObservationScales& o = c.env.scales;
  add("observation", "velocity_scale", &o.velocity);
  add("observation", "distance_scale", &o.distance);
  add("observation", "acceleration_scale", &o.acceleration);
  add("observation", "cost_scale", &o.cost);
  add("observation", "clip", &o.clip);

  Hyperparams& h = c.ppo;
  add("ppo", "learning_rate", &h.learning_rate);
  add("ppo", "clip_eps", &h.clip_eps);
  add("ppo", "gamma", &h.gamma);
  add("ppo", "gae_lambda", &h.gae_lambda);
  add("ppo", "batch_size", &h.batch_size);
  add("ppo", "minibatch_size", &h.minibatch_size);
  add("ppo", "epochs", &h.epochs);
  add("ppo", "entropy_coef", &h.entropy_coef);
  add("ppo", "value_coef", &h.value_coef);
  add("ppo", "max_grad_norm", &h.max_grad_norm);
  add("ppo", "rollout_length", &h.rollout_length);
  add("ppo", "n_envs", &h.n_envs);
  add("ppo", "total_timesteps", &h.total_timesteps);
  add("ppo", "eval_interval", &h.eval_interval);
  add("ppo", "init_log_std", &h.init_log_std);
  add("ppo", "anneal_lr", &h.anneal_lr);

  add("policy", "hidden", &c.policy.hidden);
  add("policy", "recurrent", &c.policy.recurrent);
  add("policy", "lstm_hidden", &c.policy.lstm_hidden);

  add("bench", "workers", &c.bench.workers);
  add("bench", "timing_runs", &c.bench.timing_runs);
  return b;
}

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, res.ptr);
  // Keep floats recognisable as floats.
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string render(const Ref& ref) {
  struct V {
    std::string operator()(double* p) const { return fmt(*p); }
    std::string operator()(int* p) const { return std::to_string(*p); }
    std::string operator()(long* p) const { return std::to_string(*p); }
    std::string operator()(std::uint64_t* p) const { return std::to_string(*p); }
    std::string operator()(bool* p) const { return *p ? "true" : "false"; }
    std::string operator()(std::vector<double>* p) const {
      std::string s = "[";
      for (std::size_t i = 0; i < p->size(); ++i) s += (i ? ", " : "") + fmt((*p)[i]);
      return s + "]";
    }
    std::string operator()(std::vector<int>* p) const {
      std::string s = "[";
      for (std::size_t i = 0; i < p->size(); ++i) s += (i ? ", " : "") + std::to_string((*p)[i]);
      return s + "]";
    }
    std::string operator()(WeightReset* p) const { return "\"" + weight_reset_name(*p) + "\""; }
  };
  return std::visit(V{}, ref);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) {
  bool in_str = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_str = !in_str;
    if (line[i] == '#' && !in_str) return line.substr(0, i);
  }
  return line;
}

template <typename T>
T parse_number(const std::string& text, const std::string& field) {
  T v{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && text[0] == '+') ++first;
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last) throw SchemaError(field, "cannot parse '" + text + "'");
  return v;
}

std::vector<std::string> split_array(const std::string& text, const std::string& field) {
  if (text.size() < 2 || text.front() != '[' || text.back() != ']') throw SchemaError(field, "expected an array");
  std::vector<std::string> out;
  std::stringstream ss(text.substr(1, text.size() - 2));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void assign(const Ref& ref, const std::string& text, const std::string& field) {
  struct V {
    const std::string& text;
    const std::string& field;
    void operator()(double* p) const { *p = parse_number<double>(text, field); }
    void operator()(int* p) const { *p = parse_number<int>(text, field); }
    void operator()(long* p) const { *p = parse_number<long>(text, field); }
    void operator()(std::uint64_t* p) const { *p = parse_number<std::uint64_t>(text, field); }
    void operator()(bool* p) const {
      if (text == "true") *p = true;
      else if (text == "false") *p = false;
      else throw SchemaError(field, "expected true or false");
    }
    void operator()(std::vector<double>* p) const {
      p->clear();
      for (const auto& item : split_array(text, field)) p->push_back(parse_number<double>(item, field));
    }
    void operator()(std::vector<int>* p) const {
      p->clear();
      for (const auto& item : split_array(text, field)) p->push_back(parse_number<int>(item, field));
    }
    void operator()(WeightReset* p) const {
      if (text == "\"per_episode\"") *p = WeightReset::PerEpisode;
      else if (text == "\"per_step\"") *p = WeightReset::PerStep;
      else throw SchemaError(field, "expected \"per_episode\" or \"per_step\"");
    }
  };
  std::visit(V{text, field}, ref);
}

}  // namespace

std::string weight_reset_name(WeightReset r) { return r == WeightReset::PerStep ? "per_step" : "per_episode"; }

void RewardConfig::validate() const {
  if (collision > 0.0) throw SchemaError("reward.collision", "must be <= 0");
  if (no_feasible > 0.0) throw SchemaError("reward.no_feasible", "must be <= 0");
  if (timeout > 0.0) throw SchemaError("reward.timeout", "must be <= 0");
  if (goal_reached < 0.0) throw SchemaError("reward.goal_reached", "must be >= 0");
}

void Hyperparams::validate() const {
  if (!(clip_eps > 0.0 && clip_eps < 1.0)) throw SchemaError("ppo.clip_eps", "must lie in (0, 1)");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw SchemaError("ppo.gamma", "must lie in (0, 1]");
  if (!(gae_lambda > 0.0 && gae_lambda <= 1.0)) throw SchemaError("ppo.gae_lambda", "must lie in (0, 1]");
  if (rollout_length <= 0 || n_envs <= 0) throw SchemaError("ppo.rollout_length", "must be positive");
  if (batch_size <= 0 || batch_size > rollout_length * n_envs)
    throw SchemaError("ppo.batch_size", "must lie in (0, rollout_length * n_envs]");
  if (minibatch_size <= 0 || minibatch_size > batch_size)
    throw SchemaError("ppo.minibatch_size", "must lie in (0, batch_size]");
  if (epochs <= 0) throw SchemaError("ppo.epochs", "must be positive");
  if (!(learning_rate > 0.0)) throw SchemaError("ppo.learning_rate", "must be positive");
  if (total_timesteps < 0) throw SchemaError("ppo.total_timesteps", "must be >= 0");
  if (eval_interval <= 0) throw SchemaError("ppo.eval_interval", "must be positive");
}

CostWeights Config::weights() const {
  CostWeights w;
  w.defaults = default_weights;
  w.value = default_weights;
  for (std::size_t i = 0; i < kNumCostTerms; ++i) {
    w.min[i] = 0.0;
    w.max[i] = weight_max_factor * default_weights[i];
    w.action_min[i] = -action_factor * default_weights[i];
    w.action_max[i] = action_factor * default_weights[i];
  }
  w.validate();
  return w;
}

void Config::validate() const {
  try {
    vehicle.validate();
  } catch (const InvalidArgument& e) {
    throw SchemaError("vehicle", e.what());
  }
  if (sampling.n_velocities <= 0) throw SchemaError("sampling.n_velocities", "must be positive");
  if (sampling.n_offsets <= 0) throw SchemaError("sampling.n_offsets", "must be positive");
  if (sampling.terminal_times.empty()) throw SchemaError("sampling.terminal_times", "must be non-empty");
  for (double T : sampling.terminal_times)
    if (!(T > 0.0 && T <= kHorizon)) throw SchemaError("sampling.terminal_times", "must lie in (0, 3]");
  if (!(path_spacing > 0.0)) throw SchemaError("sampling.path_spacing", "must be positive");
  if (!(weight_max_factor >= 1.0)) throw SchemaError("weights.max_factor", "must be >= 1");
  if (!(action_factor >= 0.0)) throw SchemaError("weights.action_factor", "must be >= 0");
  for (std::size_t i = 0; i < kNumCostTerms; ++i)
    if (!(default_weights[i] >= 0.0))
      throw SchemaError(std::string("weights.") + cost_term_name(static_cast<CostTerm>(i)), "must be >= 0");
  if (!(harm.slope > 0.0)) throw SchemaError("harm.slope", "must be positive");
  if (!(harm.ego_mass > 0.0 && harm.obstacle_mass > 0.0)) throw SchemaError("harm", "masses must be positive");
  if (!(prediction.sigma0_sq >= 0.0 && prediction.growth >= 0.0))
    throw SchemaError("prediction", "variances must be non-negative");
  env.reward.validate();
  ppo.validate();
  if (policy.hidden.empty()) throw SchemaError("policy.hidden", "needs at least one layer");
  for (int h : policy.hidden)
    if (h <= 0) throw SchemaError("policy.hidden", "layer sizes must be positive");
  if (policy.lstm_hidden <= 0) throw SchemaError("policy.lstm_hidden", "must be positive");
  if (bench.workers < 0) throw SchemaError("bench.workers", "must be >= 0");
  if (bench.timing_runs < 1) throw SchemaError("bench.timing_runs", "must be >= 1");
}

std::string Config::to_toml() const {
  Config copy = *this;
  std::string out, section;
  for (const Binding& b : bindings(copy)) {
    if (b.section != section) {
      if (!section.empty()) out += "\n";
      section = b.section;
      out += "[" + section + "]\n";
    }
    out += b.key + " = " + render(b.ref) + "\n";
  }
  return out;
}

std::string Config::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : to_toml()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Config parse_config(const std::string& text) {
  Config cfg;
  std::vector<Binding> table = bindings(cfg);
  std::istringstream in(text);
  std::string raw, section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']' && line.find('=') == std::string::npos) {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw SchemaError("line " + std::to_string(line_no), "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string field = section.empty() ? key : section + "." + key;
    bool found = false;
    for (const Binding& b : table)
      if (b.section == section && b.key == key) {
        assign(b.ref, value, field);
        found = true;
        break;
      }
    if (!found) throw SchemaError(field, "unknown key (line " + std::to_string(line_no) + ")");
  }
  cfg.vehicle.max_curvature = std::tan(cfg.vehicle.max_steering) / cfg.vehicle.wheelbase;
  cfg.validate();
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace hplan
