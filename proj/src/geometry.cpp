#include "hplan/geometry.hpp"

#include <algorithm>
#include <limits>

namespace hplan {
namespace {

struct Interval {
  double lo, hi;
};

template <std::size_t N>
Interval project(const std::array<Vec2, N>& pts, Vec2 axis) {
  Interval iv{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const Vec2& p : pts) {
    const double v = dot(p, axis);
    iv.lo = std::min(iv.lo, v);
    iv.hi = std::max(iv.hi, v);
  }
  return iv;
}

// Strict inequality: intervals sharing an endpoint are not separated.
inline bool separated(Interval a, Interval b) { return a.hi < b.lo || b.hi < a.lo; }

template <std::size_t N, std::size_t M>
bool separated_on(const std::array<Vec2, N>& a, const std::array<Vec2, M>& b, Vec2 axis) {
  return separated(project(a, axis), project(b, axis));
}

}  // namespace

std::array<Vec2, 4> OrientedBox::corners() const {
  const Vec2 u{std::cos(heading), std::sin(heading)};
  const Vec2 v{-u.y, u.x};
  const Vec2 hu = u * (0.5 * length);
  const Vec2 hv = v * (0.5 * width);
  return {center + hu + hv, center - hu + hv, center - hu - hv, center + hu - hv};
}

bool boxes_overlap(const OrientedBox& a, const OrientedBox& b) {
  const double reach = 0.5 * (std::hypot(a.length, a.width) + std::hypot(b.length, b.width));
  const Vec2 dc = a.center - b.center;
  if (dot(dc, dc) > reach * reach) return false;

  const auto ca = a.corners();
  const auto cb = b.corners();
  const Vec2 axes[4] = {{std::cos(a.heading), std::sin(a.heading)},
                        {-std::sin(a.heading), std::cos(a.heading)},
                        {std::cos(b.heading), std::sin(b.heading)},
                        {-std::sin(b.heading), std::cos(b.heading)}};
  for (const Vec2& axis : axes)
    if (separated_on(ca, cb, axis)) return false;
  return true;
}

bool box_segment_overlap(const OrientedBox& box, Vec2 p, Vec2 q) {
  const auto cb = box.corners();
  const std::array<Vec2, 2> seg{p, q};
  const Vec2 axes[2] = {{std::cos(box.heading), std::sin(box.heading)},
                        {-std::sin(box.heading), std::cos(box.heading)}};
  for (const Vec2& axis : axes)
    if (separated_on(cb, seg, axis)) return false;
  const Vec2 d = q - p;
  const double len = norm(d);
  if (len > 0.0) {
    const Vec2 n{-d.y / len, d.x / len};
    if (separated_on(cb, seg, n)) return false;
  }
  return true;
}

SegmentSet::SegmentSet(std::span<const Vec2> polyline) {
  if (polyline.size() < 2) return;
  segments_.reserve(polyline.size() - 1);
  for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
    const Vec2 p = polyline[i], q = polyline[i + 1];
    segments_.push_back({p, q, std::min(p.x, q.x), std::max(p.x, q.x), std::min(p.y, q.y),
                         std::max(p.y, q.y)});
  }
}

bool SegmentSet::overlaps(const OrientedBox& box) const {
  const double r = 0.5 * std::hypot(box.length, box.width);
  const double lo_x = box.center.x - r, hi_x = box.center.x + r;
  const double lo_y = box.center.y - r, hi_y = box.center.y + r;
  for (const Segment& s : segments_) {
    if (s.max_x < lo_x || s.min_x > hi_x || s.max_y < lo_y || s.min_y > hi_y) continue;
    if (box_segment_overlap(box, s.p, s.q)) return true;
  }
  return false;
}

}  // namespace hplan
