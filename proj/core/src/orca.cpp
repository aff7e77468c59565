#include "crowdnav/orca.hpp"

#include <algorithm>
#include <cmath>

#include "crowdnav/error.hpp"

namespace crowdnav::sim {
namespace {

constexpr double kEpsilon = 1e-9;

// Optimum on constraint line `index` subject to lines [0, index) and the speed disk.
bool solve_on_line(std::span<const HalfPlane> lines, std::size_t index, double radius,
                   Vec2 optimum, bool optimize_direction, Vec2& result) {
  const HalfPlane& line = lines[index];
  const double along = dot(line.point, line.direction);
  const double discriminant = along * along + radius * radius - line.point.squared_norm();
  if (discriminant < 0.0) return false;

  const double root = std::sqrt(discriminant);
  double t_left = -along - root;
  double t_right = -along + root;

  for (std::size_t i = 0; i < index; ++i) {
    const double denominator = cross(line.direction, lines[i].direction);
    const double numerator = cross(lines[i].direction, line.point - lines[i].point);
    if (std::fabs(denominator) <= kEpsilon) {
      if (numerator < 0.0) return false;
      continue;
    }
    const double t = numerator / denominator;
    if (denominator >= 0.0) {
      t_right = std::min(t_right, t);
    } else {
      t_left = std::max(t_left, t);
    }
    if (t_left > t_right) return false;
  }

  if (optimize_direction) {
    result = line.point + (dot(optimum, line.direction) > 0.0 ? t_right : t_left) * line.direction;
  } else {
    const double t = std::clamp(dot(line.direction, optimum - line.point), t_left, t_right);
    result = line.point + t * line.direction;
  }
  return true;
}

// Incremental 2D LP. Returns the index of the first line that could not be
// satisfied, or lines.size() on success.
std::size_t solve_lp(std::span<const HalfPlane> lines, double radius, Vec2 optimum,
                     bool optimize_direction, Vec2& result) {
  if (optimize_direction) {
    result = optimum * radius;
  } else if (optimum.squared_norm() > radius * radius) {
    result = normalized(optimum) * radius;
  } else {
    result = optimum;
  }

  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (cross(lines[i].direction, lines[i].point - result) > 0.0) {
      const Vec2 previous = result;
      if (!solve_on_line(lines, i, radius, optimum, optimize_direction, result)) {
        result = previous;
        return i;
      }
    }
  }
  return lines.size();
}

// Fallback when the constraint set is infeasible: minimize the largest
// signed violation over lines [first_failed, end).
void minimize_max_violation(std::span<const HalfPlane> lines, std::size_t first_failed,
                            double radius, Vec2& result) {
  double violation = 0.0;
  for (std::size_t i = first_failed; i < lines.size(); ++i) {
    if (cross(lines[i].direction, lines[i].point - result) <= violation) continue;

    std::vector<HalfPlane> projected;
    projected.reserve(i);
    for (std::size_t j = 0; j < i; ++j) {
      HalfPlane line;
      const double determinant = cross(lines[i].direction, lines[j].direction);
      if (std::fabs(determinant) <= kEpsilon) {
        if (dot(lines[i].direction, lines[j].direction) > 0.0) continue;
        line.point = 0.5 * (lines[i].point + lines[j].point);
      } else {
        line.point = lines[i].point +
                     (cross(lines[j].direction, lines[i].point - lines[j].point) / determinant) *
                         lines[i].direction;
      }
      line.direction = normalized(lines[j].direction - lines[i].direction);
      projected.push_back(line);
    }

    const Vec2 previous = result;
    const Vec2 outward{-lines[i].direction.y, lines[i].direction.x};
    if (solve_lp(projected, radius, outward, true, result) < projected.size()) {
      // Only reachable through round-off; keep the previous point.
      result = previous;
    }
    violation = cross(lines[i].direction, lines[i].point - result);
  }
}

}  // namespace

void OrcaParams::validate() const {
  if (!(neighbor_distance > 0.0) || !(time_horizon > 0.0) || !(max_speed >= 0.0) ||
      !(time_step > 0.0) || !std::isfinite(neighbor_distance) || !std::isfinite(time_horizon) ||
      !std::isfinite(max_speed) || !std::isfinite(time_step)) {
    throw ValidationError("invalid ORCA parameters");
  }
}

std::vector<HalfPlane> orca_constraints(const AgentState& self,
                                        std::span<const AgentState> neighbors,
                                        const OrcaParams& params) {
  std::vector<HalfPlane> lines;
  lines.reserve(neighbors.size());
  const double inv_horizon = 1.0 / params.time_horizon;
  const double range_sq = params.neighbor_distance * params.neighbor_distance;

  for (const AgentState& other : neighbors) {
    const Vec2 rel_position = other.position - self.position;
    const double dist_sq = rel_position.squared_norm();
    if (dist_sq >= range_sq) continue;

    const Vec2 rel_velocity = self.velocity - other.velocity;
    const double combined_radius = self.radius + other.radius;
    const double combined_radius_sq = combined_radius * combined_radius;

    HalfPlane line;
    Vec2 u;
    if (dist_sq > combined_radius_sq) {
      const Vec2 w = rel_velocity - inv_horizon * rel_position;
      const double w_length_sq = w.squared_norm();
      const double w_dot_p = dot(w, rel_position);

      if (w_dot_p < 0.0 && w_dot_p * w_dot_p > combined_radius_sq * w_length_sq) {
        // Closest boundary point lies on the cut-off circle.
        const double w_length = std::sqrt(w_length_sq);
        const Vec2 unit_w = w / w_length;
        line.direction = {unit_w.y, -unit_w.x};
        u = (combined_radius * inv_horizon - w_length) * unit_w;
      } else {
        const double leg = std::sqrt(dist_sq - combined_radius_sq);
        if (cross(rel_position, w) > 0.0) {
          line.direction = Vec2{rel_position.x * leg - rel_position.y * combined_radius,
                                rel_position.x * combined_radius + rel_position.y * leg} /
                           dist_sq;
        } else {
          line.direction = -Vec2{rel_position.x * leg + rel_position.y * combined_radius,
                                 -rel_position.x * combined_radius + rel_position.y * leg} /
                           dist_sq;
        }
        u = dot(rel_velocity, line.direction) * line.direction - rel_velocity;
      }
    } else {
      // Already overlapping: resolve within a single step.
      const double inv_step = 1.0 / params.time_step;
      const Vec2 w = rel_velocity - inv_step * rel_position;
      const double w_length = w.norm();
      const Vec2 unit_w = w_length > 0.0 ? w / w_length : Vec2{1.0, 0.0};
      line.direction = {unit_w.y, -unit_w.x};
      u = (combined_radius * inv_step - w_length) * unit_w;
    }
    line.point = self.velocity + 0.5 * u;
    lines.push_back(line);
  }
  return lines;
}

Vec2 solve_velocity(std::span<const HalfPlane> constraints, Vec2 preferred, double max_speed) {
  Vec2 result;
  const std::size_t failed = solve_lp(constraints, max_speed, preferred, false, result);
  if (failed < constraints.size()) {
    minimize_max_violation(constraints, failed, max_speed, result);
  }
  return clamp_norm(result, max_speed);
}

Vec2 orca_velocity(const AgentState& self, std::span<const AgentState> neighbors,
                   Vec2 preferred_velocity, const OrcaParams& params) {
  const auto lines = orca_constraints(self, neighbors, params);
  return solve_velocity(lines, preferred_velocity, params.max_speed);
}

}  // namespace crowdnav::sim
