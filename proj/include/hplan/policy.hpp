#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hplan/config.hpp"
#include "hplan/nn.hpp"

namespace hplan {

/// Recurrent state carried between steps (empty for feed-forward policies).
struct LstmState {
  std::vector<double> h;
  std::vector<double> c;
};

/// Diagonal Gaussian over the pre-squash action u with state-independent
/// log standard deviation; the emitted action is tanh(u).
namespace gaussian {
/// Log density of u (no squash correction).
double log_prob(std::span<const double> mean, std::span<const double> log_std, std::span<const double> u);
/// log |d tanh(u) / du| summed over dimensions.
double squash_log_det(std::span<const double> u);
/// Entropy of the pre-squash Gaussian.
double entropy(std::span<const double> log_std);
}  // namespace gaussian

struct ActSample {
  std::vector<double> u;       // pre-squash
  std::vector<double> action;  // tanh(u)
  double log_prob = 0.0;       // includes the squash correction
  double value = 0.0;
};

/// Actor-critic network: [shared LSTM] -> actor MLP (mean) and critic MLP
/// (value), plus a learnable log_std vector.
class Policy {
 public:
  Policy() = default;
  Policy(std::size_t obs_dim, std::size_t act_dim, PolicySpec spec, double init_log_std, std::uint64_t seed);

  std::size_t obs_dim() const { return obs_dim_; }
  std::size_t act_dim() const { return act_dim_; }
  const PolicySpec& spec() const { return spec_; }
  bool recurrent() const { return spec_.recurrent; }
  std::size_t state_size() const { return spec_.recurrent ? static_cast<std::size_t>(spec_.lstm_hidden) : 0; }
  LstmState initial_state() const;

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  std::size_t log_std_offset() const { return log_std_; }
  std::span<const double> log_std() const { return {params_.data() + log_std_, act_dim_}; }

  /// Mean and value for one observation; advances `state` when recurrent.
  void forward(std::span<const double> obs, LstmState& state, std::vector<double>& mean, double& value) const;

  ActSample sample(std::span<const double> obs, LstmState& state, std::mt19937_64& rng) const;
  /// tanh(mean): the deterministic evaluation action.
  std::vector<double> act_deterministic(std::span<const double> obs, LstmState& state) const;

  struct SegmentCache {
    std::vector<nn::LstmCell::StepCache> lstm;
    std::vector<nn::Mlp::Cache> actor, critic;
    std::vector<double> means;  // T x act_dim
    std::vector<double> values;
  };

  /// Runs T consecutive steps starting from (h0, c0), caching everything the
  /// backward pass needs. For feed-forward policies the steps are
  /// independent and h0/c0 are ignored.
  void forward_segment(std::span<const double> params, std::span<const double> obs, std::size_t T,
                       const LstmState& start, SegmentCache& cache) const;
  /// Backpropagates dL/dmean (T x act_dim) and dL/dvalue (T) through the
  /// segment into grads (log_std gradient is the caller's job).
  void backward_segment(std::span<const double> params, const SegmentCache& cache, std::span<const double> dmeans,
                        std::span<const double> dvalues, std::span<double> grads) const;

  void save(const std::string& path, const std::string& config_hash, const ObservationScales& scales) const;
  /// Throws std::runtime_error on malformed files.
  static Policy load(const std::string& path, std::string* config_hash = nullptr,
                     ObservationScales* scales = nullptr);

  bool operator==(const Policy& o) const {
    return obs_dim_ == o.obs_dim_ && act_dim_ == o.act_dim_ && params_ == o.params_;
  }

 private:
  void build_layout();

  std::size_t obs_dim_ = 0, act_dim_ = 0;
  PolicySpec spec_;
  nn::LstmCell lstm_;
  nn::Mlp actor_, critic_;
  std::size_t log_std_ = 0;
  std::vector<double> params_;
};

}  // namespace hplan
