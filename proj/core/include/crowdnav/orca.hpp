#pragma once

#include <span>
#include <vector>

#include "crowdnav/geometry.hpp"

namespace crowdnav::sim {

struct AgentState {
  Vec2 position;
  Vec2 velocity;
  double radius = 0.3;
};

struct OrcaParams {
  double neighbor_distance = 5.0;
  double time_horizon = 2.0;
  double max_speed = 0.96;
  /// Simulation step, used when agents already overlap.
  double time_step = 0.1;

  void validate() const;
};

/// Directed line; the feasible half-plane lies to its left.
struct HalfPlane {
  Vec2 point;
  Vec2 direction;
};

/// One reciprocal velocity-obstacle half-plane per neighbor inside the
/// neighbor distance.
std::vector<HalfPlane> orca_constraints(const AgentState& self,
                                        std::span<const AgentState> neighbors,
                                        const OrcaParams& params);

/// Velocity inside the max-speed disk closest to `preferred` that satisfies
/// every half-plane. When the set is infeasible the maximum violation is
/// minimized instead.
Vec2 solve_velocity(std::span<const HalfPlane> constraints, Vec2 preferred, double max_speed);

/// Collision-avoiding velocity for `self` given its neighbors (self excluded).
Vec2 orca_velocity(const AgentState& self, std::span<const AgentState> neighbors,
                   Vec2 preferred_velocity, const OrcaParams& params);

}  // namespace crowdnav::sim
