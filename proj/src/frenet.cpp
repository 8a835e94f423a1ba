#include "hplan/frenet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hplan/errors.hpp"

namespace hplan {
namespace {

constexpr double kSpacingTolerance = 1e-9;

std::vector<double> smooth3(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0)
      out[i] = 0.5 * (v[0] + v[1]);
    else if (i + 1 == n)
      out[i] = 0.5 * (v[n - 2] + v[n - 1]);
    else
      out[i] = (v[i - 1] + v[i] + v[i + 1]) / 3.0;
  }
  return out;
}

// Central differences in the interior, one-sided at the ends.
std::vector<double> differentiate(const std::vector<double>& v, double h) {
  const std::size_t n = v.size();
  std::vector<double> out(n);
  out[0] = (v[1] - v[0]) / h;
  out[n - 1] = (v[n - 1] - v[n - 2]) / h;
  for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
  return out;
}

}  // namespace

ReferencePath ReferencePath::build(std::span<const Vec2> polyline, double spacing) {
  if (polyline.size() < 2)
    throw InvalidArgument("reference path needs at least 2 points, got " +
                          std::to_string(polyline.size()));
  if (!(spacing > 0.0) || !std::isfinite(spacing))
    throw InvalidArgument("reference path spacing must be positive");

  std::vector<double> cumulative(polyline.size(), 0.0);
  for (std::size_t i = 1; i < polyline.size(); ++i) {
    const double len = norm(polyline[i] - polyline[i - 1]);
    if (!std::isfinite(len))
      throw InvalidArgument("reference path contains non-finite coordinates");
    if (len < 1e-12)
      throw GeometryError(GeometryError::Kind::DegeneratePath,
                          "degenerate polyline: zero-length segment between points " +
                              std::to_string(i - 1) + " and " + std::to_string(i));
    cumulative[i] = cumulative[i - 1] + len;
  }
  const double total = cumulative.back();
  if (total < 2.0 * spacing)
    throw InvalidArgument("reference path length " + std::to_string(total) +
                          " m is shorter than twice the spacing");

  const auto count = static_cast<std::size_t>(std::floor(total / spacing + kSpacingTolerance)) + 1;
  std::vector<double> xs(count), ys(count);
  std::size_t seg = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const double s = static_cast<double>(i) * spacing;
    while (seg + 2 < polyline.size() && cumulative[seg + 1] < s) ++seg;
    const double u = std::clamp((s - cumulative[seg]) / (cumulative[seg + 1] - cumulative[seg]), 0.0, 1.0);
    const Vec2 p = polyline[seg] + (polyline[seg + 1] - polyline[seg]) * u;
    xs[i] = p.x;
    ys[i] = p.y;
  }

  std::vector<double> heading(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = i + 1 == count ? i : i + 1;
    heading[i] = std::atan2(ys[hi] - ys[lo], xs[hi] - xs[lo]);
  }
  for (std::size_t i = 1; i < count; ++i)
    heading[i] = heading[i - 1] + normalize_angle(heading[i] - heading[i - 1]);

  const std::vector<double> curvature = smooth3(differentiate(heading, spacing));
  const std::vector<double> curvature_rate = differentiate(curvature, spacing);

  ReferencePath path;
  path.spacing_ = spacing;
  path.source_.assign(polyline.begin(), polyline.end());
  path.samples_.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    path.samples_[i] = {xs[i], ys[i], static_cast<double>(i) * spacing, heading[i], curvature[i],
                        curvature_rate[i]};
  }
  return path;
}

PathSample ReferencePath::interpolate(double s) const {
  const std::size_t n = samples_.size();
  s = std::clamp(s, 0.0, length());
  const std::size_t i = std::min(static_cast<std::size_t>(s / spacing_), n - 2);
  const PathSample& a = samples_[i];
  const PathSample& b = samples_[i + 1];
  const double u = (s - a.s) / spacing_;
  const double u2 = u * u, u3 = u2 * u;
  const double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u;
  const double h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
  const double ta_x = spacing_ * std::cos(a.heading), ta_y = spacing_ * std::sin(a.heading);
  const double tb_x = spacing_ * std::cos(b.heading), tb_y = spacing_ * std::sin(b.heading);
  PathSample out;
  out.s = s;
  out.x = h00 * a.x + h10 * ta_x + h01 * b.x + h11 * tb_x;
  out.y = h00 * a.y + h10 * ta_y + h01 * b.y + h11 * tb_y;
  out.heading = a.heading + u * (b.heading - a.heading);
  out.curvature = a.curvature + u * (b.curvature - a.curvature);
  out.curvature_rate = a.curvature_rate + u * (b.curvature_rate - a.curvature_rate);
  return out;
}

double ReferencePath::project(Vec2 p) const {
  const std::size_t n = samples_.size();
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = p.x - samples_[i].x, dy = p.y - samples_[i].y;
    const double d2 = dx * dx + dy * dy;
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }

  // Quadratic fit of the squared distance through the three nearest samples.
  double s0 = samples_[best].s;
  if (best > 0 && best + 1 < n) {
    auto d2 = [&](std::size_t i) {
      const double dx = p.x - samples_[i].x, dy = p.y - samples_[i].y;
      return dx * dx + dy * dy;
    };
    const double dm = d2(best - 1), d0 = best_d2, dp = d2(best + 1);
    const double denom = dm - 2.0 * d0 + dp;
    if (denom > 0.0) s0 += std::clamp(0.5 * (dm - dp) / denom, -1.0, 1.0) * spacing_;
  }

  // Refine on the orthogonality condition f(s) = (p - r(s)) . t(s) = 0, which
  // is decreasing in s near the foot point.
  auto f = [&](double s) {
    const PathSample r = interpolate(s);
    return (p.x - r.x) * std::cos(r.heading) + (p.y - r.y) * std::sin(r.heading);
  };
  const double total = length();
  double lo = std::max(0.0, s0 - spacing_), hi = std::min(total, s0 + spacing_);
  double f_lo = f(lo), f_hi = f(hi);
  for (int expand = 0; expand < 8 && (f_lo < 0.0 || f_hi > 0.0); ++expand) {
    if (f_lo < 0.0) {
      if (lo <= 0.0) break;
      lo = std::max(0.0, lo - spacing_);
      f_lo = f(lo);
    }
    if (f_hi > 0.0) {
      if (hi >= total) break;
      hi = std::min(total, hi + spacing_);
      f_hi = f(hi);
    }
  }
  if (f_lo < 0.0 || f_hi > 0.0)
    throw GeometryError(GeometryError::Kind::OutOfPath, "point projects beyond the reference path ends");

  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, total); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm > 0.0)
      lo = mid;
    else if (fm < 0.0)
      hi = mid;
    else
      lo = hi = mid;
  }
  const double s = 0.5 * (lo + hi);
  if (s <= 0.0 || s >= total)
    throw GeometryError(GeometryError::Kind::OutOfPath, "point projects onto the reference path end");
  return s;
}

std::vector<Vec2> ReferencePath::offset_polyline(double d) const {
  std::vector<Vec2> out;
  out.reserve(samples_.size());
  for (const PathSample& sm : samples_)
    out.push_back({sm.x - d * std::sin(sm.heading), sm.y + d * std::cos(sm.heading)});
  return out;
}

FrenetState cartesian_to_frenet(const ReferencePath& path, const CartesianState& state) {
  const double s = path.project({state.x, state.y});
  const PathSample ref = path.interpolate(s);

  const double dx = state.x - ref.x, dy = state.y - ref.y;
  const double cross_rd = std::cos(ref.heading) * dy - std::sin(ref.heading) * dx;
  const double d = std::copysign(std::hypot(dx, dy), cross_rd);

  const double kappa_d = ref.curvature * d;
  if (std::abs(kappa_d) >= 1.0)
    throw GeometryError(GeometryError::Kind::Singularity,
                        "lateral offset exceeds the path's radius of curvature");
  const double one_minus_kd = 1.0 - kappa_d;
  const double delta_theta = normalize_angle(state.heading - ref.heading);
  const double cos_dt = std::cos(delta_theta);
  if (std::abs(cos_dt) < 1e-12)
    throw GeometryError(GeometryError::Kind::Singularity, "heading perpendicular to the reference path");
  const double tan_dt = std::tan(delta_theta);

  FrenetState fs;
  fs.s = s;
  fs.d = d;
  fs.d_prime = one_minus_kd * tan_dt;
  const double kd_prime = ref.curvature_rate * d + ref.curvature * fs.d_prime;
  fs.d_pprime = -kd_prime * tan_dt +
                one_minus_kd / (cos_dt * cos_dt) * (state.curvature * one_minus_kd / cos_dt - ref.curvature);
  fs.s_dot = state.velocity * cos_dt / one_minus_kd;
  const double delta_theta_prime = one_minus_kd / cos_dt * state.curvature - ref.curvature;
  fs.s_ddot = (state.acceleration * cos_dt -
               fs.s_dot * fs.s_dot * (fs.d_prime * delta_theta_prime - kd_prime)) /
              one_minus_kd;
  fs.d_dot = fs.d_prime * fs.s_dot;
  fs.d_ddot = fs.d_pprime * fs.s_dot * fs.s_dot + fs.d_prime * fs.s_ddot;
  return fs;
}

TransformStatus frenet_to_cartesian_into(const ReferencePath& path, const FrenetState& fs,
                                         CartesianState& out) {
  if (!(fs.s >= -1e-9 && fs.s <= path.length() + 1e-9)) return TransformStatus::OutOfPath;
  const PathSample ref = path.interpolate(fs.s);
  const double kappa_d = ref.curvature * fs.d;
  if (std::abs(kappa_d) >= 1.0) return TransformStatus::Singularity;

  const double sin_r = std::sin(ref.heading), cos_r = std::cos(ref.heading);
  const double one_minus_kd = 1.0 - kappa_d;
  const double tan_dt = fs.d_prime / one_minus_kd;
  const double delta_theta = std::atan2(fs.d_prime, one_minus_kd);
  const double cos_dt = std::cos(delta_theta);
  const double kd_prime = ref.curvature_rate * fs.d + ref.curvature * fs.d_prime;

  out.x = ref.x - sin_r * fs.d;
  out.y = ref.y + cos_r * fs.d;
  out.heading = normalize_angle(delta_theta + ref.heading);
  out.curvature = ((fs.d_pprime + kd_prime * tan_dt) * cos_dt * cos_dt / one_minus_kd + ref.curvature) *
                  cos_dt / one_minus_kd;
  out.velocity = fs.s_dot * one_minus_kd / cos_dt;
  const double delta_theta_prime = one_minus_kd / cos_dt * out.curvature - ref.curvature;
  out.acceleration = fs.s_ddot * one_minus_kd / cos_dt +
                     fs.s_dot * fs.s_dot / cos_dt * (fs.d_prime * delta_theta_prime - kd_prime);
  return TransformStatus::Ok;
}

CartesianState frenet_to_cartesian(const ReferencePath& path, const FrenetState& state) {
  CartesianState out;
  switch (frenet_to_cartesian_into(path, state, out)) {
    case TransformStatus::OutOfPath:
      throw GeometryError(GeometryError::Kind::OutOfPath,
                          "arc length " + std::to_string(state.s) + " outside the reference path");
    case TransformStatus::Singularity:
      throw GeometryError(GeometryError::Kind::Singularity,
                          "lateral offset exceeds the path's radius of curvature");
    case TransformStatus::Ok:
      break;
  }
  return out;
}

}  // namespace hplan
