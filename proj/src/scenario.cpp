#include "hplan/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hplan/errors.hpp"

namespace hplan {
namespace {

using nlohmann::json;

json points_to_json(const std::vector<Vec2>& pts) {
  json arr = json::array();
  for (const Vec2& p : pts) arr.push_back({p.x, p.y});
  return arr;
}

const json& require(const json& obj, const char* key, const std::string& path) {
  const std::string field = path.empty() ? key : path + "." + key;
  if (!obj.is_object() || !obj.contains(key)) throw SchemaError(field, "missing field");
  return obj.at(key);
}

std::string join(const std::string& path, const char* key) { return path.empty() ? key : path + "." + key; }

double get_number(const json& obj, const char* key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_number()) throw SchemaError(join(path, key), "expected a number");
  return v.get<double>();
}

int get_int(const json& obj, const char* key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_number_integer()) throw SchemaError(join(path, key), "expected an integer");
  return v.get<int>();
}

bool get_bool(const json& obj, const char* key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_boolean()) throw SchemaError(join(path, key), "expected true or false");
  return v.get<bool>();
}

std::string get_string(const json& obj, const char* key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_string()) throw SchemaError(join(path, key), "expected a string");
  return v.get<std::string>();
}

std::vector<Vec2> get_points(const json& obj, const char* key, const std::string& path) {
  const json& v = require(obj, key, path);
  const std::string field = join(path, key);
  if (!v.is_array()) throw SchemaError(field, "expected an array of [x, y] pairs");
  std::vector<Vec2> pts;
  pts.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const json& p = v[i];
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
      throw SchemaError(field + "[" + std::to_string(i) + "]", "expected [x, y]");
    pts.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return pts;
}

json obstacle_state_json(const ObstacleState& s) {
  return {{"x", s.x}, {"y", s.y}, {"heading", s.heading}, {"velocity", s.velocity}};
}

ObstacleState obstacle_state_from(const json& j, const std::string& path) {
  return {get_number(j, "x", path), get_number(j, "y", path), get_number(j, "heading", path),
          get_number(j, "velocity", path)};
}

}  // namespace

ObstacleState ObstacleSpec::state_at(int step) const {
  if (trajectory.empty()) return {};
  const int last = static_cast<int>(trajectory.size()) - 1;
  if (step <= last) return trajectory[static_cast<std::size_t>(std::max(step, 0))];
  ObstacleState s = trajectory.back();
  const double t = (step - last) * kDt;
  s.x += s.velocity * t * std::cos(s.heading);
  s.y += s.velocity * t * std::sin(s.heading);
  return s;
}

void Scenario::validate() const {
  if (id.empty()) throw SchemaError("id", "must be non-empty");
  if (reference_path.size() < 2) throw SchemaError("reference_path", "needs at least 2 points");
  if (left_boundary.size() < 2) throw SchemaError("left_boundary", "needs at least 2 points");
  if (right_boundary.size() < 2) throw SchemaError("right_boundary", "needs at least 2 points");
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const std::string f = "obstacles[" + std::to_string(i) + "]";
    if (obstacles[i].trajectory.empty()) throw SchemaError(f + ".trajectory", "must be non-empty");
    if (!(obstacles[i].footprint.length > 0.0 && obstacles[i].footprint.width > 0.0))
      throw SchemaError(f + ".footprint", "dimensions must be positive");
  }
  if (!(ego_init.velocity >= 0.0)) throw SchemaError("ego_init.velocity", "must be >= 0");
  if (!(goal.s_min < goal.s_max)) throw SchemaError("goal.s_range", "must be a non-empty interval");
  if (goal.t_min > goal.t_max) throw SchemaError("goal.time_window", "t_min must not exceed t_max");
  if (!(goal.target_velocity >= 0.0)) throw SchemaError("goal.target_velocity", "must be >= 0");
  if (max_steps < goal.t_max) throw SchemaError("max_steps", "must be >= goal.time_window upper bound");
  double length = 0.0;
  for (std::size_t i = 1; i < reference_path.size(); ++i) length += norm(reference_path[i] - reference_path[i - 1]);
  if (goal.s_min < 0.0 || goal.s_max > length) throw SchemaError("goal.s_range", "must lie within the reference path");
  try {
    vehicle.validate();
  } catch (const InvalidArgument& e) {
    throw SchemaError("vehicle", e.what());
  }
}

bool Scenario::operator==(const Scenario& o) const {
  auto same_vehicle = [](const VehicleParams& a, const VehicleParams& b) {
    return a.wheelbase == b.wheelbase && a.length == b.length && a.width == b.width &&
           a.max_steering == b.max_steering && a.max_curvature == b.max_curvature &&
           a.max_abs_acceleration == b.max_abs_acceleration && a.max_velocity == b.max_velocity &&
           a.max_curvature_rate == b.max_curvature_rate && a.yaw_rate_tolerance == b.yaw_rate_tolerance;
  };
  return id == o.id && reference_path == o.reference_path && left_boundary == o.left_boundary &&
         right_boundary == o.right_boundary && adjacency == o.adjacency && obstacles == o.obstacles &&
         ego_init == o.ego_init && goal == o.goal && max_steps == o.max_steps && same_vehicle(vehicle, o.vehicle);
}

std::string scenario_to_json(const Scenario& sc) {
  json j;
  j["format_version"] = kScenarioFormatVersion;
  j["id"] = sc.id;
  j["reference_path"] = points_to_json(sc.reference_path);
  j["left_boundary"] = points_to_json(sc.left_boundary);
  j["right_boundary"] = points_to_json(sc.right_boundary);
  j["adjacency"] = {{"left_exists", sc.adjacency.left_exists},
                    {"right_exists", sc.adjacency.right_exists},
                    {"left_same_direction", sc.adjacency.left_same_direction},
                    {"right_same_direction", sc.adjacency.right_same_direction}};
  json obs = json::array();
  for (const ObstacleSpec& o : sc.obstacles) {
    json traj = json::array();
    for (const ObstacleState& s : o.trajectory) traj.push_back(obstacle_state_json(s));
    obs.push_back({{"id", o.id},
                   {"footprint", {{"length", o.footprint.length}, {"width", o.footprint.width}}},
                   {"trajectory", traj}});
  }
  j["obstacles"] = obs;
  const CartesianState& e = sc.ego_init;
  j["ego_init"] = {{"x", e.x},
                   {"y", e.y},
                   {"heading", e.heading},
                   {"velocity", e.velocity},
                   {"acceleration", e.acceleration},
                   {"curvature", e.curvature}};
  j["goal"] = {{"s_range", {sc.goal.s_min, sc.goal.s_max}},
               {"time_window", {sc.goal.t_min, sc.goal.t_max}},
               {"target_velocity", sc.goal.target_velocity}};
  j["max_steps"] = sc.max_steps;
  const VehicleParams& v = sc.vehicle;
  j["vehicle"] = {{"wheelbase", v.wheelbase},
                  {"length", v.length},
                  {"width", v.width},
                  {"max_steering", v.max_steering},
                  {"max_abs_acceleration", v.max_abs_acceleration},
                  {"max_velocity", v.max_velocity},
                  {"max_curvature_rate", v.max_curvature_rate},
                  {"yaw_rate_tolerance", v.yaw_rate_tolerance}};
  return j.dump(1) + "\n";
}

Scenario scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("document", std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("document", "expected an object");
  const int version = get_int(j, "format_version", "");
  if (version != kScenarioFormatVersion)
    throw SchemaError("format_version", "unsupported version " + std::to_string(version));

  Scenario sc;
  sc.id = get_string(j, "id", "");
  sc.reference_path = get_points(j, "reference_path", "");
  sc.left_boundary = get_points(j, "left_boundary", "");
  sc.right_boundary = get_points(j, "right_boundary", "");

  const json& adj = require(j, "adjacency", "");
  sc.adjacency.left_exists = get_bool(adj, "left_exists", "adjacency");
  sc.adjacency.right_exists = get_bool(adj, "right_exists", "adjacency");
  sc.adjacency.left_same_direction = get_bool(adj, "left_same_direction", "adjacency");
  sc.adjacency.right_same_direction = get_bool(adj, "right_same_direction", "adjacency");

  const json& obs = require(j, "obstacles", "");
  if (!obs.is_array()) throw SchemaError("obstacles", "expected an array");
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const std::string path = "obstacles[" + std::to_string(i) + "]";
    ObstacleSpec o;
    o.id = get_string(obs[i], "id", path);
    const json& fp = require(obs[i], "footprint", path);
    o.footprint = {get_number(fp, "length", path + ".footprint"), get_number(fp, "width", path + ".footprint")};
    const json& traj = require(obs[i], "trajectory", path);
    if (!traj.is_array()) throw SchemaError(path + ".trajectory", "expected an array");
    for (std::size_t k = 0; k < traj.size(); ++k)
      o.trajectory.push_back(obstacle_state_from(traj[k], path + ".trajectory[" + std::to_string(k) + "]"));
    sc.obstacles.push_back(std::move(o));
  }

  const json& ego = require(j, "ego_init", "");
  sc.ego_init = {get_number(ego, "x", "ego_init"),       get_number(ego, "y", "ego_init"),
                 get_number(ego, "heading", "ego_init"), get_number(ego, "velocity", "ego_init"),
                 get_number(ego, "acceleration", "ego_init"), get_number(ego, "curvature", "ego_init")};

  const json& goal = require(j, "goal", "");
  const json& sr = require(goal, "s_range", "goal");
  if (!sr.is_array() || sr.size() != 2 || !sr[0].is_number() || !sr[1].is_number())
    throw SchemaError("goal.s_range", "expected [s_min, s_max]");
  const json& tw = require(goal, "time_window", "goal");
  if (!tw.is_array() || tw.size() != 2 || !tw[0].is_number_integer() || !tw[1].is_number_integer())
    throw SchemaError("goal.time_window", "expected [t_min, t_max] in steps");
  sc.goal = {sr[0].get<double>(), sr[1].get<double>(), tw[0].get<int>(), tw[1].get<int>(),
             get_number(goal, "target_velocity", "goal")};

  sc.max_steps = get_int(j, "max_steps", "");
  const json& v = require(j, "vehicle", "");
  try {
    sc.vehicle = VehicleParams::make(get_number(v, "wheelbase", "vehicle"), get_number(v, "length", "vehicle"),
                                     get_number(v, "width", "vehicle"), get_number(v, "max_steering", "vehicle"),
                                     get_number(v, "max_abs_acceleration", "vehicle"),
                                     get_number(v, "max_velocity", "vehicle"),
                                     get_number(v, "max_curvature_rate", "vehicle"));
  } catch (const InvalidArgument& e) {
    throw SchemaError("vehicle", e.what());
  }
  sc.vehicle.yaw_rate_tolerance = get_number(v, "yaw_rate_tolerance", "vehicle");
  sc.validate();
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return scenario_from_json(ss.str());
}

void save_scenario(const Scenario& scenario, const std::string& path) {
  scenario.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scenario file " + path);
  out << scenario_to_json(scenario);
}

std::vector<std::string> list_corpus(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw std::runtime_error("corpus directory not found: " + dir);
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path().string());
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace hplan
