#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace hplan {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double k) const { return {x * k, y * k}; }
  bool operator==(const Vec2&) const = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// Wraps an angle to (-pi, pi].
inline double normalize_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

/// Vehicle-style footprint: length along heading, width across.
struct Footprint {
  double length = 4.8;
  double width = 1.8;

  double area() const { return length * width; }
  bool operator==(const Footprint&) const = default;
};

/// Rectangle centred at `center`, long axis along `heading`.
struct OrientedBox {
  Vec2 center;
  double heading = 0.0;
  double length = 0.0;
  double width = 0.0;

  /// Counter-clockwise corners starting front-left.
  std::array<Vec2, 4> corners() const;
};

/// Closed-set test: touching boxes count as overlapping.
bool boxes_overlap(const OrientedBox& a, const OrientedBox& b);

/// Closed-set box vs line segment [p, q].
bool box_segment_overlap(const OrientedBox& box, Vec2 p, Vec2 q);

/// Polyline stored as consecutive vertices, with per-segment bounding boxes
/// for quick rejection.
class SegmentSet {
 public:
  SegmentSet() = default;
  explicit SegmentSet(std::span<const Vec2> polyline);

  bool overlaps(const OrientedBox& box) const;
  bool empty() const { return segments_.empty(); }

 private:
  struct Segment {
    Vec2 p, q;
    double min_x, max_x, min_y, max_y;
  };
  std::vector<Segment> segments_;
};

}  // namespace hplan
