#pragma once

#include <cmath>
#include <vector>

namespace crowdnav {

/// Point or velocity in the workspace plane (meters, or m/s for velocities).
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2() = default;
  constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

  constexpr Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(const Vec2& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr bool operator==(const Vec2&) const = default;

  double norm() const { return std::hypot(x, y); }
  constexpr double squared_norm() const { return x * x + y * y; }
  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

constexpr Vec2 operator*(double s, const Vec2& v) { return v * s; }
constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
/// z-component of the 3D cross product.
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

/// Unit vector, or zero for the zero vector.
Vec2 normalized(const Vec2& v);
Vec2 rotated(const Vec2& v, double angle);
/// Clamp to a disk of the given radius about the origin.
Vec2 clamp_norm(const Vec2& v, double max_norm);

/// Rigid motion p -> R(angle) p + offset.
struct RigidTransform {
  double angle = 0.0;
  Vec2 offset;

  Vec2 apply(const Vec2& p) const { return rotated(p, angle) + offset; }
};

/// Positions sampled on a uniform time grid.
using Trajectory = std::vector<Vec2>;

}  // namespace crowdnav
