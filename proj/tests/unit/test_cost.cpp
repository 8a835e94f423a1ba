#include <doctest.h>

#include <cmath>
#include <random>

#include "hplan/cost.hpp"
#include "hplan/frenet.hpp"
#include "hplan/sampler.hpp"
#include "hplan/simd.hpp"

using namespace hplan;

namespace {

ReferencePath straight() {
  const std::vector<Vec2> line{{0, 0}, {200, 0}};
  return ReferencePath::build(line, 0.5);
}

CostWeights unit_bounds(double value) {
  CostWeights w = default_weights();
  w.value.fill(value);
  w.min.fill(0.0);
  w.max.fill(5.0);
  w.action_min.fill(-0.5);
  w.action_max.fill(0.5);
  return w;
}

}  // namespace

TEST_CASE("weight action arithmetic") {
  const std::array<double, 5> up{0.5, 0.5, 0.5, 0.5, 0.5}, down{-0.5, -0.5, -0.5, -0.5, -0.5};
  CHECK(apply_weight_action(unit_bounds(1.0), up).value[0] == 1.5);
  CHECK(apply_weight_action(unit_bounds(4.8), up).value[0] == 5.0);
  CHECK(apply_weight_action(unit_bounds(0.2), down).value[0] == 0.0);
}

TEST_CASE("out-of-range deltas are clamped and counted") {
  const long before = action_clamps().load();
  const std::array<double, 5> big{2.0, 0, 0, 0, 0};
  const CostWeights w = apply_weight_action(unit_bounds(1.0), big);
  CHECK(w.value[0] == 1.5);
  CHECK(action_clamps().load() == before + 1);
  CHECK(w.defaults == default_weights().defaults);
}

TEST_CASE("default weights and bounds") {
  const CostWeights w = default_weights();
  CHECK(w.value == CostVector{1.0, 0.2, 0.2, 1.0, 1.0});
  for (std::size_t i = 0; i < kNumCostTerms; ++i) {
    CHECK(w.max[i] == doctest::Approx(5 * w.defaults[i]));
    CHECK(w.action_max[i] == doctest::Approx(0.5 * w.defaults[i]));
    CHECK(w.action_min[i] == doctest::Approx(-0.5 * w.defaults[i]));
  }
}

TEST_CASE("total cost is the weighted sum") {
  CostBreakdown c;
  CHECK(total_cost(c, default_weights()) == 0.0);
  c.terms = {0, 0, 0, 2.0, 0};
  CostWeights w = default_weights();
  w.value = {0, 0, 0, 1.5, 0};
  CHECK(total_cost(c, w) == doctest::Approx(3.0));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 3);
  for (int i = 0; i < 50; ++i) {
    double ref = 0;
    for (std::size_t k = 0; k < kNumCostTerms; ++k) {
      c.terms[k] = u(rng);
      w.value[k] = u(rng);
      ref += c.terms[k] * w.value[k];
    }
    CHECK(total_cost(c, w) == doctest::Approx(ref).epsilon(1e-14));
  }
}

TEST_CASE("on-speed centreline trajectory costs nothing") {
  const ReferencePath p = straight();
  FrenetState f;
  f.s = 10;
  f.s_dot = 8;
  const TrajectorySample s = make_sample(f, 3.0, 8.0, 0.0, p);
  CostContext ctx;
  ctx.v_target = 8.0;
  const CostBreakdown c = cost_breakdown(s, ctx);
  CHECK(c.total_unweighted == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(dist_ref_cost(make_sample(f, 3.0, 8.0, 1.0, p)) > 0.0);
  CHECK(velocity_offset_cost(make_sample(f, 3.0, 6.0, 0.0, p), 8.0) > 0.0);
}

TEST_CASE("bundle evaluation matches per-sample costs and risks") {
  const ReferencePath p = straight();
  FrenetState f;
  f.s = 20;
  f.s_dot = 7;
  f.d = 0.3;
  TrajectoryBundle b = generate_bundle(f, SamplingSettings{}.matrix_for(7, 8, 20), p, default_vehicle());
  std::vector<ObstaclePrediction> preds{
      predict_constant_velocity({45, 1.0, 3.1, 3.0}, {4.8, 1.8}),
      predict_constant_velocity({30, -3.5, 0.0, 5.0}, {4.0, 1.8}),
  };
  CostContext ctx;
  ctx.predictions = preds;
  ctx.v_target = 8.0;
  ctx.harm.ego_mass = 1200;
  for (simd::Isa isa : {simd::Isa::Scalar, simd::Isa::Avx2}) {
    simd::force_isa(isa);
    evaluate_bundle(b, default_weights(), ctx);
    for (std::size_t i = 0; i < b.samples.size(); i += 7) {
      const TrajectorySample& s = b.samples[i];
      const CostBreakdown ref = cost_breakdown(s, ctx);
      for (std::size_t k = 0; k < kNumCostTerms; ++k)
        CHECK(std::abs(s.cost.terms[k] - ref.terms[k]) <= 1e-12 * (1 + std::abs(ref.terms[k])));
      const RiskPair r = trajectory_risk(s, preds, ctx.harm, ctx.ego_footprint);
      CHECK(std::abs(s.ego_risk - r.ego_risk) <= 1e-12);
      CHECK(std::abs(s.obstacle_risk - r.obstacle_risk) <= 1e-12);
      CHECK(s.total_cost == doctest::Approx(total_cost(ref, default_weights())).epsilon(1e-12));
    }
  }
  simd::force_isa(simd::detected_isa());
}

TEST_CASE("common weight scaling keeps the argmin") {
  const ReferencePath p = straight();
  FrenetState f;
  f.s = 20;
  f.s_dot = 5;
  f.d = 1.0;
  TrajectoryBundle b = generate_bundle(f, SamplingSettings{}.matrix_for(5, 8, 20), p, default_vehicle());
  CostContext ctx;
  ctx.v_target = 8.0;
  CostWeights w = default_weights();
  evaluate_bundle(b, w, ctx);
  sort_by_cost(b);
  const std::size_t best = b.sorted_indices.front();
  for (double k : {0.1, 3.0, 17.0}) {
    CostWeights scaled = w;
    for (double& v : scaled.value) v *= k;
    reweight_bundle(b, scaled);
    sort_by_cost(b);
    CHECK(b.sorted_indices.front() == best);
  }
}
