#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hplan/risk.hpp"
#include "hplan/sampler.hpp"

using namespace hplan;

TEST_CASE("worked risk example") {
  const std::vector<double> p{0.1, 0.2}, h{0.5, 0.4};
  CHECK(max_risk(p, h) == doctest::Approx(0.08).epsilon(1e-15));
  CHECK(max_risk({}, {}) == 0.0);
}

TEST_CASE("collision probability against Monte Carlo") {
  // Sigma_eff = 9 I: obstacle spread 3^2 + 3^2 over 12 is 1.5, plus 7.5.
  PredictionStep step;
  step.cov_xx = step.cov_yy = 7.5;
  const Footprint obstacle{3.0, 3.0}, ego{2.0, 1.0};
  const double px = 1.0, py = -0.5;
  const double p = collision_probability({px, py, 0.0}, ego, step, obstacle);
  // Density at the ego centre times the ego area.
  std::mt19937_64 rng(99);
  std::normal_distribution<double> n(0.0, 3.0);
  const int N = 2000000;
  int hits = 0;
  const double r = 0.3;
  for (int i = 0; i < N; ++i) {
    const double x = n(rng), y = n(rng);
    if (std::hypot(x - px, y - py) < r) ++hits;
  }
  const double mc = static_cast<double>(hits) / N / (std::numbers::pi * r * r) * ego.area();
  CHECK(p == doctest::Approx(mc).epsilon(0.05));
  CHECK(p == doctest::Approx(2.0 / (2 * std::numbers::pi * 9) * std::exp(-0.5 * 1.25 / 9)).epsilon(1e-12));
}

TEST_CASE("collision probability decreases with distance") {
  PredictionStep step;
  step.cov_xx = step.cov_yy = 0.5;
  double prev = 2.0;
  for (double d = 0.0; d < 20.0; d += 0.25) {
    const double p = collision_probability({d, 0, 0}, {4.8, 1.8}, step, {4.8, 1.8});
    CHECK(p <= prev);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    prev = p;
  }
}

TEST_CASE("singular covariance is regularised") {
  PredictionStep step;
  const long before = covariance_regularisations().load();
  const double p = collision_probability({0.5, 0, 0}, {1, 1}, step, {0.0, 0.0});
  CHECK(std::isfinite(p));
  CHECK(covariance_regularisations().load() == before + 1);
}

TEST_CASE("harm is logistic in the closing speed") {
  HarmParams hp;
  const HarmPair at_mid = harm(hp.offset / hp.slope, hp);
  CHECK(at_mid.ego == doctest::Approx(0.5));
  CHECK(harm(0, hp).ego < 0.01);
  CHECK(harm(60, hp).ego > 0.99);
  hp.ego_mass = 1000;
  hp.obstacle_mass = 2000;
  const HarmPair light = harm(15, hp);
  CHECK(light.ego > light.obstacle);
  CHECK(light.ego <= 1.0);
  CHECK(closing_speed(0, 5, std::numbers::pi, 5) == doctest::Approx(10.0));
  CHECK(closing_speed(0.3, 5, 0.3, 5) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("trajectory risk is bounded by collision probability") {
  const std::vector<Vec2> line{{0, 0}, {200, 0}};
  const ReferencePath p = ReferencePath::build(line, 0.5);
  FrenetState f;
  f.s = 10;
  f.s_dot = 8;
  const TrajectorySample s = make_sample(f, 3.0, 8.0, 0.0, p);
  CHECK(trajectory_risk(s, {}, {}, {}).ego_risk == 0.0);
  const std::vector<ObstaclePrediction> preds{predict_constant_velocity({40, 0.5, 3.14159, 6}, {4.8, 1.8})};
  const RiskPair r = trajectory_risk(s, preds, {}, {4.8, 1.8});
  double pmax = 0;
  for (std::size_t k = 0; k < kHorizonPoints; ++k)
    pmax = std::max(pmax, collision_probability({s.states.x[k], s.states.y[k], 0}, {4.8, 1.8}, preds[0].steps[k],
                                                {4.8, 1.8}));
  CHECK(r.ego_risk > 0.0);
  CHECK(r.ego_risk <= pmax);
}

TEST_CASE("collision check reports the first overlapping step") {
  const std::vector<Vec2> line{{0, 0}, {200, 0}};
  const ReferencePath p = ReferencePath::build(line, 0.5);
  FrenetState f;
  f.s = 10;
  f.s_dot = 10;
  const TrajectorySample s = make_sample(f, 3.0, 10.0, 0.0, p);
  // Ego front reaches x = 10 + 10 t + 2.4; a parked box whose rear is at
  // 10 + 7 + 2.4 is first touched at t = 0.7.
  ObstacleBoxes boxes(1);
  for (auto& b : boxes[0]) b = {{10 + 7 + 2.4 + 2.4, 0}, 0, 4.8, 1.8};
  const auto hit = collision_check(s, boxes, {}, {4.8, 1.8});
  REQUIRE(hit.has_value());
  CHECK(*hit == 7);
  CHECK_FALSE(collision_check(s, {}, {}, {4.8, 1.8}).has_value());
}
