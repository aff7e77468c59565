#include "crowdnav/geometry.hpp"

namespace crowdnav {

Vec2 normalized(const Vec2& v) {
  const double n = v.norm();
  if (n == 0.0) return {};
  return v / n;
}

Vec2 rotated(const Vec2& v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

Vec2 clamp_norm(const Vec2& v, double max_norm) {
  const double n = v.norm();
  if (n <= max_norm || n == 0.0) return v;
  return v * (max_norm / n);
}

}  // namespace crowdnav
