#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace nav {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::sqrt(x * x + y * y); }
};

inline Vec2 rotate(const Vec2& v, double angle) {
  double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

inline double wrap_angle(double a) {
  // Normalize to (-pi, pi].
  a = std::fmod(a, 2.0 * M_PI);
  if (a <= -M_PI) a += 2.0 * M_PI;
  if (a > M_PI) a -= 2.0 * M_PI;
  return a;
}

// 2D obstacle footprint. Axis-aligned boxes are boxes with yaw 0.
struct Footprint {
  enum class Shape { circle, box } shape = Shape::circle;
  Vec2 center;
  double radius = 0.0;  // circle
  Vec2 half;            // box half-extents
  double yaw = 0.0;     // box orientation
};

inline Footprint make_circle(Vec2 c, double r) {
  Footprint f;
  f.shape = Footprint::Shape::circle;
  f.center = c;
  f.radius = r;
  return f;
}

inline Footprint make_box(Vec2 c, Vec2 half, double yaw = 0.0) {
  Footprint f;
  f.shape = Footprint::Shape::box;
  f.center = c;
  f.half = half;
  f.yaw = yaw;
  return f;
}

// Distance from a point to the footprint boundary (0 inside).
inline double point_footprint_distance(const Vec2& p, const Footprint& f) {
  if (f.shape == Footprint::Shape::circle) {
    return std::max(0.0, (p - f.center).norm() - f.radius);
  }
  Vec2 local = rotate(p - f.center, -f.yaw);
  double dx = std::max(0.0, std::abs(local.x) - f.half.x);
  double dy = std::max(0.0, std::abs(local.y) - f.half.y);
  return std::sqrt(dx * dx + dy * dy);
}

struct RayInterval {
  double t_in;
  double t_out;
};

// Ray (origin o, unit direction d) vs circle; interval of parameters inside.
inline std::optional<RayInterval> ray_circle(const Vec2& o, const Vec2& d, const Vec2& c,
                                             double r) {
  Vec2 m = o - c;
  double b = m.dot(d);
  double q = m.dot(m) - r * r;
  double disc = b * b - q;
  if (disc < 0.0) return std::nullopt;
  double s = std::sqrt(disc);
  double t0 = -b - s, t1 = -b + s;
  if (t1 < 0.0) return std::nullopt;
  return RayInterval{std::max(0.0, t0), t1};
}

// Ray vs oriented box (slab test in the box frame).
inline std::optional<RayInterval> ray_box(const Vec2& o, const Vec2& d, const Footprint& f) {
  Vec2 lo = rotate(o - f.center, -f.yaw);
  Vec2 ld = rotate(d, -f.yaw);
  double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();
  const double ox[2] = {lo.x, lo.y}, dx[2] = {ld.x, ld.y}, h[2] = {f.half.x, f.half.y};
  for (int i = 0; i < 2; ++i) {
    if (std::abs(dx[i]) < 1e-12) {
      if (std::abs(ox[i]) > h[i]) return std::nullopt;
    } else {
      double ta = (-h[i] - ox[i]) / dx[i];
      double tb = (h[i] - ox[i]) / dx[i];
      if (ta > tb) std::swap(ta, tb);
      t0 = std::max(t0, ta);
      t1 = std::min(t1, tb);
      if (t0 > t1) return std::nullopt;
    }
  }
  if (t1 < 0.0) return std::nullopt;
  return RayInterval{t0, t1};
}

inline std::optional<RayInterval> ray_footprint(const Vec2& o, const Vec2& d,
                                                const Footprint& f) {
  if (f.shape == Footprint::Shape::circle) return ray_circle(o, d, f.center, f.radius);
  return ray_box(o, d, f);
}

// Entry parameter of the ray into the footprint inflated by `inflate`
// (Minkowski sum with a disc). The inflated box is the union of two
// expanded boxes and four corner discs; entry into a union is the minimum
// of the component entries.
inline std::optional<double> ray_inflated_entry(const Vec2& o, const Vec2& d,
                                                const Footprint& f, double inflate) {
  if (f.shape == Footprint::Shape::circle) {
    auto iv = ray_circle(o, d, f.center, f.radius + inflate);
    if (!iv) return std::nullopt;
    return iv->t_in;
  }
  double best = std::numeric_limits<double>::infinity();
  Footprint a = f;
  a.half.x += inflate;
  if (auto iv = ray_box(o, d, a)) best = std::min(best, iv->t_in);
  Footprint b = f;
  b.half.y += inflate;
  if (auto iv = ray_box(o, d, b)) best = std::min(best, iv->t_in);
  for (int sx = -1; sx <= 1; sx += 2) {
    for (int sy = -1; sy <= 1; sy += 2) {
      Vec2 corner = f.center + rotate({sx * f.half.x, sy * f.half.y}, f.yaw);
      if (auto iv = ray_circle(o, d, corner, inflate)) best = std::min(best, iv->t_in);
    }
  }
  if (!std::isfinite(best)) return std::nullopt;
  return best;
}

}  // namespace nav
