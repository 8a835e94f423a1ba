#include "hplan/cost.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "hplan/errors.hpp"
#include "hplan/simd.hpp"

namespace hplan {

CostWeights CostWeights::from_defaults(const CostVector& defaults) {
  CostWeights w;
  w.defaults = defaults;
  w.value = defaults;
  for (std::size_t i = 0; i < kNumCostTerms; ++i) {
    w.min[i] = 0.0;
    w.max[i] = 5.0 * defaults[i];
    w.action_min[i] = -0.5 * defaults[i];
    w.action_max[i] = 0.5 * defaults[i];
  }
  w.validate();
  return w;
}

void CostWeights::validate() const {
  for (std::size_t i = 0; i < kNumCostTerms; ++i) {
    if (!(min[i] >= 0.0) || !(min[i] <= defaults[i]) || !(defaults[i] <= max[i]))
      throw InvalidArgument(std::string("weight bounds inconsistent for ") +
                            cost_term_name(static_cast<CostTerm>(i)));
    if (!(value[i] >= min[i] && value[i] <= max[i]))
      throw InvalidArgument(std::string("weight out of bounds for ") +
                            cost_term_name(static_cast<CostTerm>(i)));
    if (!(action_min[i] <= 0.0 && action_max[i] >= 0.0))
      throw InvalidArgument("action range must contain 0");
  }
}

CostWeights default_weights() { return CostWeights::from_defaults({1.0, 0.2, 0.2, 1.0, 1.0}); }

std::atomic<long>& action_clamps() {
  static std::atomic<long> count{0};
  return count;
}

CostWeights apply_weight_action(const CostWeights& weights, std::span<const double> deltas) {
  if (deltas.size() != kNumCostTerms) throw InvalidArgument("one delta per cost term expected");
  CostWeights out = weights;
  for (std::size_t i = 0; i < kNumCostTerms; ++i) {
    double a = deltas[i];
    if (!(a >= weights.action_min[i] && a <= weights.action_max[i])) {
      action_clamps().fetch_add(1, std::memory_order_relaxed);
      a = std::isnan(a) ? 0.0 : std::clamp(a, weights.action_min[i], weights.action_max[i]);
    }
    out.value[i] = std::clamp(weights.value[i] + a, weights.min[i], weights.max[i]);
  }
  return out;
}

JerkCost jerk_cost(const TrajectorySample& sample) {
  return {integrated_squared_jerk(sample.lateral.c, sample.duration),
          integrated_squared_jerk(sample.longitudinal.c, sample.duration)};
}

double dist_ref_cost(const TrajectorySample& sample) {
  double acc = 0.0;
  for (double d : sample.states.d) acc += d * d;
  return acc / kHorizonPoints;
}

double velocity_offset_cost(const TrajectorySample& sample, double v_target) {
  double acc = 0.0;
  for (double v : sample.states.velocity) acc += (v - v_target) * (v - v_target);
  const double terminal = sample.states.velocity.back() - v_target;
  return acc / kHorizonPoints + terminal * terminal;
}

double collision_prob_cost(const TrajectorySample& sample, std::span<const ObstaclePrediction> predictions,
                           const Footprint& ego_footprint) {
  const TrajectoryPoints& st = sample.states;
  double acc = 0.0;
  for (std::size_t k = 0; k < kHorizonPoints; ++k) {
    double step_max = 0.0;
    for (const ObstaclePrediction& pred : predictions)
      step_max = std::max(step_max, collision_probability({st.x[k], st.y[k], st.heading[k]}, ego_footprint,
                                                          pred.steps[k], pred.footprint));
    acc += step_max;
  }
  return acc;
}

double total_cost(const CostBreakdown& breakdown, const CostWeights& weights) {
  double acc = 0.0;
  for (std::size_t i = 0; i < kNumCostTerms; ++i) acc += weights.value[i] * breakdown.terms[i];
  return acc;
}

namespace {

void finish(CostBreakdown& c, const CostWeights& weights) {
  c.total_unweighted = 0.0;
  for (double v : c.terms) c.total_unweighted += v;
  c.total_weighted = total_cost(c, weights);
}

}  // namespace

CostBreakdown cost_breakdown(const TrajectorySample& sample, const CostContext& ctx) {
  CostBreakdown c;
  const JerkCost j = jerk_cost(sample);
  c.terms[index(CostTerm::CollisionProb)] = collision_prob_cost(sample, ctx.predictions, ctx.ego_footprint);
  c.terms[index(CostTerm::JerkLat)] = j.lat;
  c.terms[index(CostTerm::JerkLon)] = j.lon;
  c.terms[index(CostTerm::DistRef)] = dist_ref_cost(sample);
  c.terms[index(CostTerm::VelocityOffset)] = velocity_offset_cost(sample, ctx.v_target);
  c.total_unweighted = 0.0;
  for (double v : c.terms) c.total_unweighted += v;
  return c;
}

void evaluate_bundle(TrajectoryBundle& bundle, const CostWeights& weights, const CostContext& ctx) {
  const std::size_t n = bundle.samples.size();
  const std::size_t n_obs = ctx.predictions.size();

  for (TrajectorySample& smp : bundle.samples) {
    const JerkCost j = jerk_cost(smp);
    smp.cost.terms[index(CostTerm::CollisionProb)] = 0.0;
    smp.cost.terms[index(CostTerm::JerkLat)] = j.lat;
    smp.cost.terms[index(CostTerm::JerkLon)] = j.lon;
    smp.cost.terms[index(CostTerm::DistRef)] = dist_ref_cost(smp);
    smp.cost.terms[index(CostTerm::VelocityOffset)] = velocity_offset_cost(smp, ctx.v_target);
    smp.ego_risk = 0.0;
    smp.obstacle_risk = 0.0;
  }

  if (n_obs > 0 && n > 0) {
    std::vector<double> xs(n), ys(n), p(n), step_max(n), coll(n, 0.0);
    std::vector<simd::GaussianFootprint> kernels(n_obs);
    for (std::size_t k = 0; k < kHorizonPoints; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        xs[i] = bundle.samples[i].states.x[k];
        ys[i] = bundle.samples[i].states.y[k];
      }
      std::fill(step_max.begin(), step_max.end(), 0.0);
      for (std::size_t o = 0; o < n_obs; ++o) {
        const PredictionStep& step = ctx.predictions[o].steps[k];
        const simd::GaussianFootprint g = footprint_kernel(step, ctx.predictions[o].footprint, ctx.ego_footprint);
        simd::footprint_prob(xs, ys, g, p);
        simd::max_inplace(step_max, p);
        for (std::size_t i = 0; i < n; ++i) {
          TrajectorySample& smp = bundle.samples[i];
          // H <= 1, so p alone bounds the product.
          if (p[i] <= smp.ego_risk && p[i] <= smp.obstacle_risk) continue;
          const double cs = closing_speed(smp.states.heading[k], smp.states.velocity[k], step.heading, step.velocity);
          const HarmPair h = harm(cs, ctx.harm);
          smp.ego_risk = std::max(smp.ego_risk, p[i] * h.ego);
          smp.obstacle_risk = std::max(smp.obstacle_risk, p[i] * h.obstacle);
        }
      }
      for (std::size_t i = 0; i < n; ++i) coll[i] += step_max[i];
    }
    for (std::size_t i = 0; i < n; ++i) bundle.samples[i].cost.terms[index(CostTerm::CollisionProb)] = coll[i];
  }

  for (TrajectorySample& smp : bundle.samples) {
    finish(smp.cost, weights);
    smp.total_cost = smp.cost.total_weighted;
  }
}

void reweight_bundle(TrajectoryBundle& bundle, const CostWeights& weights) {
  for (TrajectorySample& smp : bundle.samples) {
    smp.cost.total_weighted = total_cost(smp.cost, weights);
    smp.total_cost = smp.cost.total_weighted;
  }
}

}  // namespace hplan
