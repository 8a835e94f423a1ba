#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "hplan/errors.hpp"
#include "hplan/scenario.hpp"

namespace hplan {
namespace {

constexpr double kLaneWidth = 3.5;

// Piecewise-linear curvature profile: (segment length, curvature at start,
// curvature at end).
struct CurvatureSegment {
  double length;
  double k0;
  double k1;
};

std::vector<Vec2> integrate_path(Vec2 start, double heading, const std::vector<CurvatureSegment>& segs,
                                 double out_step = 0.5) {
  constexpr double h = 0.01;
  std::vector<Vec2> pts{start};
  Vec2 p = start;
  double since_out = 0.0;
  for (const CurvatureSegment& seg : segs) {
    const int n = static_cast<int>(std::lround(seg.length / h));
    for (int i = 0; i < n; ++i) {
      const double u0 = static_cast<double>(i) / n, u1 = static_cast<double>(i + 1) / n;
      const double k_mid = seg.k0 + (seg.k1 - seg.k0) * 0.5 * (u0 + u1);
      const double hm = heading + 0.5 * h * k_mid;
      p = p + Vec2{std::cos(hm), std::sin(hm)} * h;
      heading += h * k_mid;
      since_out += h;
      if (since_out >= out_step - 1e-9) {
        pts.push_back(p);
        since_out = 0.0;
      }
    }
  }
  if (since_out > 1e-6) pts.push_back(p);
  return pts;
}

void add_boundaries(Scenario& sc, double left, double right) {
  const ReferencePath path = ReferencePath::build(sc.reference_path);
  sc.left_boundary = path.offset_polyline(left);
  sc.right_boundary = path.offset_polyline(-right);
}

double path_length(const std::vector<Vec2>& pts) {
  double len = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) len += norm(pts[i] - pts[i - 1]);
  return len;
}

// Nominal steps to cover `distance` starting at v0 and settling at v1 with
// a gentle acceleration.
int nominal_steps(double distance, double v0, double v1) {
  constexpr double a = 1.5;
  const double ramp = std::abs(v1 - v0) / a;
  const double ramp_dist = 0.5 * (v0 + v1) * ramp;
  const double t = ramp_dist >= distance ? distance / std::max(0.5 * (v0 + v1), 0.5)
                                         : ramp + (distance - ramp_dist) / std::max(v1, 0.5);
  return static_cast<int>(std::lround(t * kStepsPerSecond));
}

ObstacleSpec scripted_vehicle(const std::string& id, Vec2 start, double heading, double speed, double accel,
                              int steps) {
  ObstacleSpec o;
  o.id = id;
  const double v_lo = 0.75 * speed, v_hi = 1.5 * speed;
  ObstacleState s{start.x, start.y, heading, speed};
  for (int k = 0; k <= steps; ++k) {
    o.trajectory.push_back(s);
    const double v_next = std::clamp(s.velocity + accel * kDt, v_lo, v_hi);
    const double ds = 0.5 * (s.velocity + v_next) * kDt;
    s.x += ds * std::cos(heading);
    s.y += ds * std::sin(heading);
    s.velocity = v_next;
  }
  return o;
}

// Distance travelled after time t under the same clamped-acceleration law.
double scripted_distance(double speed, double accel, double t) {
  const double v_lo = 0.75 * speed, v_hi = 1.5 * speed;
  double v = speed, x = 0.0;
  const int n = static_cast<int>(std::lround(t * kStepsPerSecond));
  for (int k = 0; k < n; ++k) {
    const double v_next = std::clamp(v + accel * kDt, v_lo, v_hi);
    x += 0.5 * (v + v_next) * kDt;
    v = v_next;
  }
  return x;
}

}  // namespace

Scenario make_t_junction(const std::string& id, const TJunctionParams& p) {
  constexpr double kStem = 40.0, kRamp = 6.0, kRadius = 9.0, kExit = 70.0;
  const double kappa = 1.0 / kRadius;
  const double arc = std::numbers::pi / 2.0 - kRamp * kappa;  // ramps turn kRamp * kappa / 2 each
  const std::vector<CurvatureSegment> segs{
      {kStem, 0.0, 0.0}, {kRamp, 0.0, kappa}, {arc / kappa, kappa, kappa}, {kRamp, kappa, 0.0}, {kExit, 0.0, 0.0}};

  // Stem in the northbound lane (x = 1.75); the exit runs west in the
  // lane centred at y = +1.75.
  std::vector<Vec2> pts = integrate_path({0.0, 0.0}, std::numbers::pi / 2.0, segs);
  const double shift_y = kLaneWidth / 2.0 - pts.back().y;
  for (Vec2& q : pts) q = Vec2{q.x + kLaneWidth / 2.0, q.y + shift_y};

  Scenario sc;
  sc.id = id;
  sc.reference_path = pts;
  add_boundaries(sc, 1.5 * kLaneWidth, 0.5 * kLaneWidth);
  sc.adjacency = {true, false, false, true};

  const ReferencePath path = ReferencePath::build(sc.reference_path);
  const double s_start = 5.0;
  const PathSample start = path.interpolate(s_start);
  sc.ego_init = {start.x, start.y, start.heading, p.ego_speed, 0.0, 0.0};

  const double s_turn_end = kStem + 2.0 * kRamp + arc / kappa;
  sc.goal.s_min = s_turn_end + 15.0;
  sc.goal.s_max = s_turn_end + 25.0;
  sc.goal.target_velocity = p.target_speed;
  const int t_nom = nominal_steps(sc.goal.s_min - s_start, p.ego_speed, p.target_speed);
  sc.goal.t_min = std::max(0, t_nom - 15);
  sc.goal.t_max = t_nom + 25;
  sc.max_steps = 160;

  // Where the ego path crosses the eastbound lane (y = -1.75).
  const double y_lane = -kLaneWidth / 2.0;
  double s_conflict = 0.0, x_conflict = 0.0;
  for (std::size_t i = 1; i < path.samples().size(); ++i) {
    const PathSample& a = path.samples()[i - 1];
    const PathSample& b = path.samples()[i];
    if ((a.y - y_lane) * (b.y - y_lane) <= 0.0 && a.y != b.y) {
      const double u = (y_lane - a.y) / (b.y - a.y);
      s_conflict = a.s + u * (b.s - a.s);
      x_conflict = a.x + u * (b.x - a.x);
      break;
    }
  }
  const double t_ego = nominal_steps(s_conflict - s_start, p.ego_speed, p.target_speed) * kDt;

  const int steps = sc.max_steps + static_cast<int>(kHorizonPoints);
  const double arrivals[2] = {t_ego + p.conflict_offset, t_ego + p.conflict_offset + p.spawn_gap};
  const double accels[2] = {p.accel_first, p.accel_second};
  for (int i = 0; i < 2; ++i) {
    const double t_arr = std::max(arrivals[i], 0.0);
    const double x0 = x_conflict - scripted_distance(p.oncoming_speed, accels[i], t_arr) -
                      (arrivals[i] < 0.0 ? arrivals[i] * p.oncoming_speed : 0.0);
    sc.obstacles.push_back(scripted_vehicle("crossing_" + std::to_string(i), {x0, y_lane}, 0.0, p.oncoming_speed,
                                            accels[i], steps));
  }
  sc.validate();
  return sc;
}

Scenario make_straight_empty(const std::string& id, double length, double speed) {
  Scenario sc;
  sc.id = id;
  sc.reference_path = {{0.0, 0.0}, {length, 0.0}};
  add_boundaries(sc, 1.5 * kLaneWidth, 0.5 * kLaneWidth);
  sc.adjacency = {true, false, false, true};
  sc.ego_init = {5.0, 0.0, 0.0, speed, 0.0, 0.0};
  sc.goal = {length - 40.0, length - 20.0, 0, 0, speed};
  const int t_nom = nominal_steps(sc.goal.s_min - 5.0, speed, speed);
  sc.goal.t_min = std::max(0, t_nom - 15);
  sc.goal.t_max = t_nom + 25;
  sc.max_steps = 300;
  sc.validate();
  return sc;
}

Scenario make_lead_vehicle(const std::string& id, double lead_gap, double lead_speed, double ego_speed) {
  constexpr double kLength = 180.0;
  Scenario sc;
  sc.id = id;
  sc.reference_path = {{0.0, 0.0}, {kLength, 0.0}};
  add_boundaries(sc, 1.5 * kLaneWidth, 0.5 * kLaneWidth);
  sc.adjacency = {true, false, true, true};
  sc.ego_init = {5.0, 0.0, 0.0, ego_speed, 0.0, 0.0};
  ObstacleSpec lead;
  lead.id = "lead";
  lead.trajectory = {{5.0 + lead_gap, 0.0, 0.0, lead_speed}};
  sc.obstacles.push_back(lead);
  sc.goal = {kLength - 60.0, kLength - 40.0, 0, 0, ego_speed};
  const int t_nom = nominal_steps(sc.goal.s_min - 5.0, ego_speed, ego_speed);
  sc.goal.t_min = std::max(0, t_nom - 15);
  sc.goal.t_max = t_nom + 40;
  sc.max_steps = 300;
  sc.validate();
  return sc;
}

Scenario make_curved_follow(const std::string& id, double radius, double speed) {
  const double kappa = 1.0 / radius;
  const std::vector<CurvatureSegment> segs{
      {10.0, 0.0, 0.0}, {10.0, 0.0, kappa}, {60.0, kappa, kappa}, {10.0, kappa, 0.0}, {50.0, 0.0, 0.0}};
  Scenario sc;
  sc.id = id;
  sc.reference_path = integrate_path({0.0, 0.0}, 0.0, segs);
  add_boundaries(sc, 1.5 * kLaneWidth, 0.5 * kLaneWidth);
  sc.adjacency = {true, false, false, true};
  const ReferencePath path = ReferencePath::build(sc.reference_path);
  const PathSample start = path.interpolate(5.0);
  sc.ego_init = {start.x, start.y, start.heading, speed, 0.0, 0.0};
  const double len = path_length(sc.reference_path);
  sc.goal = {len - 40.0, len - 20.0, 0, 0, speed};
  const int t_nom = nominal_steps(sc.goal.s_min - 5.0, speed, speed);
  sc.goal.t_min = std::max(0, t_nom - 15);
  sc.goal.t_max = t_nom + 25;
  sc.max_steps = 300;
  sc.validate();
  return sc;
}

std::vector<Scenario> generate_t_junction_corpus(int n, std::uint64_t seed) {
  if (n < 0) throw InvalidArgument("scenario count must be non-negative");
  std::mt19937_64 rng(seed);
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  std::vector<Scenario> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    TJunctionParams p;
    p.ego_speed = uniform(3.0, 8.0);
    p.target_speed = uniform(7.0, 9.0);
    p.oncoming_speed = uniform(6.0, 12.0);
    p.conflict_offset = uniform(-3.0, 3.0);
    p.spawn_gap = uniform(2.5, 5.0);
    p.accel_first = uniform(-1.0, 1.0);
    p.accel_second = uniform(-1.0, 1.0);
    char name[32];
    std::snprintf(name, sizeof name, "tjunction_%03d", i);
    out.push_back(make_t_junction(name, p));
  }
  return out;
}

}  // namespace hplan
