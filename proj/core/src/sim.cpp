#include "crowdnav/sim.hpp"

#include <algorithm>
#include <cmath>

#include "crowdnav/error.hpp"

namespace crowdnav::sim {

const char* to_string(Behavior behavior) {
  switch (behavior) {
    case Behavior::Orca:
      return "orca";
    case Behavior::NonReactiveStraight:
      return "non_reactive_straight";
    case Behavior::DistractedWaypoints:
      return "distracted_waypoints";
  }
  return "unknown";
}

void Scenario::validate() const {
  auto finite = [](const Vec2& v) { return v.finite(); };
  if (!finite(workspace.min) || !finite(workspace.max) || workspace.min.x >= workspace.max.x ||
      workspace.min.y >= workspace.max.y) {
    throw ValidationError("scenario '" + id + "': invalid workspace bounds");
  }
  if (!finite(robot_start) || !finite(robot_goal) || !workspace.contains(robot_start) ||
      !workspace.contains(robot_goal)) {
    throw ValidationError("scenario '" + id + "': robot start/goal outside workspace");
  }
  if (!(robot_preferred_speed > 0.0) || !(robot_radius > 0.0) || !(human_radius > 0.0)) {
    throw ValidationError("scenario '" + id + "': speeds and radii must be positive");
  }
  if (!(goal_tolerance > 0.0) || !(max_duration >= 0.0) || !std::isfinite(max_duration)) {
    throw ValidationError("scenario '" + id + "': invalid goal tolerance or duration");
  }
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const AgentSpec& a = agents[i];
    if (!finite(a.start) || !finite(a.goal) || !workspace.contains(a.start) ||
        !workspace.contains(a.goal)) {
      throw ValidationError("scenario '" + id + "': agent " + std::to_string(i + 1) +
                            " start/goal outside workspace");
    }
    if (!(a.preferred_speed > 0.0) || !std::isfinite(a.preferred_speed) ||
        !(a.start_time >= 0.0)) {
      throw ValidationError("scenario '" + id + "': agent " + std::to_string(i + 1) +
                            " needs a positive preferred speed");
    }
  }
}

void SimConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt must be positive");
  if (!(neighbor_distance > 0.0) || !(time_horizon > 0.0) || !(max_speed_factor >= 1.0)) {
    throw ValidationError("invalid ORCA parameters");
  }
  if (history_capacity < 2) throw ValidationError("history capacity must be at least 2");
}

OrcaParams SimConfig::orca_params(double preferred_speed) const {
  return OrcaParams{neighbor_distance, time_horizon, max_speed_factor * preferred_speed, dt};
}

void History::push(double time, Vec2 position) {
  points_.push_back({time, position});
  while (points_.size() > capacity_) points_.pop_front();
}

std::vector<Vec2> History::sample(std::size_t count, std::size_t stride, bool* padded) const {
  std::vector<Vec2> out(count);
  bool any_padding = false;
  const auto newest = static_cast<std::ptrdiff_t>(points_.size()) - 1;
  for (std::size_t m = 0; m < count; ++m) {
    // m counts back from the newest sample.
    const std::ptrdiff_t index = newest - static_cast<std::ptrdiff_t>(m * stride);
    if (index >= 0) {
      out[count - 1 - m] = points_[static_cast<std::size_t>(index)].position;
    } else {
      out[count - 1 - m] = points_.front().position;
      any_padding = true;
    }
  }
  if (padded) *padded = any_padding;
  return out;
}

WorldState initial_world(const Scenario& scenario, const SimConfig& config) {
  scenario.validate();
  config.validate();
  WorldState world;
  world.step = 0;
  world.dt = config.dt;
  world.robot = AgentState{scenario.robot_start, {}, scenario.robot_radius};
  world.histories.emplace_back(config.history_capacity);
  world.histories.back().push(0.0, scenario.robot_start);
  for (const AgentSpec& spec : scenario.agents) {
    world.humans.push_back(AgentState{spec.start, {}, scenario.human_radius});
    world.histories.emplace_back(config.history_capacity);
    world.histories.back().push(0.0, spec.start);
    world.plans.push_back(PlanState{});
  }
  return world;
}

std::vector<Vec2> waypoints(const AgentSpec& spec) {
  if (spec.behavior == Behavior::DistractedWaypoints) return {spec.goal, spec.start};
  return {spec.goal};
}

Vec2 velocity_toward(const Vec2& from, const Vec2& target, double speed, double tolerance) {
  const Vec2 offset = target - from;
  if (offset.norm() <= tolerance) return {};
  return normalized(offset) * speed;
}

Vec2 scripted_velocity(const AgentState& agent, const AgentSpec& spec, PlanState& plan,
                       double time, double goal_tolerance) {
  if (time + 1e-12 < spec.start_time) return {};
  const auto route = waypoints(spec);
  while (plan.waypoint + 1 < route.size() &&
         distance(agent.position, route[plan.waypoint]) <= goal_tolerance) {
    ++plan.waypoint;
  }
  const Vec2 target = route[std::min(plan.waypoint, route.size() - 1)];
  return velocity_toward(agent.position, target, spec.preferred_speed, goal_tolerance);
}

bool human_at_goal(const AgentState& agent, const AgentSpec& spec, const PlanState& plan,
                   double goal_tolerance) {
  const auto route = waypoints(spec);
  if (plan.waypoint + 1 < route.size()) return false;
  return distance(agent.position, route.back()) <= goal_tolerance;
}

namespace {

Vec2 orca_preferred_velocity(const AgentState& agent, const AgentSpec& spec,
                             double goal_tolerance, double dt) {
  const Vec2 offset = spec.goal - agent.position;
  const double dist = offset.norm();
  if (dist <= goal_tolerance) return {};
  // Slow down on the final step instead of overshooting.
  return normalized(offset) * std::min(spec.preferred_speed, dist / dt);
}

}  // namespace

WorldState step_world(const WorldState& world, Vec2 robot_command, const Scenario& scenario,
                      const SimConfig& config) {
  WorldState next = world;
  const double time = world.time();
  const std::size_t n = world.humans.size();

  std::vector<Vec2> velocities(n);
  std::vector<AgentState> neighbors;
  neighbors.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const AgentSpec& spec = scenario.agents[i];
    const AgentState& self = world.humans[i];
    PlanState& plan = next.plans[i];
    if (time + 1e-12 < spec.start_time) continue;

    if (spec.behavior == Behavior::Orca) {
      if (human_at_goal(self, spec, plan, scenario.goal_tolerance)) continue;
      neighbors.clear();
      neighbors.push_back(world.robot);
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) neighbors.push_back(world.humans[j]);
      }
      const Vec2 preferred =
          orca_preferred_velocity(self, spec, scenario.goal_tolerance, config.dt);
      velocities[i] =
          orca_velocity(self, neighbors, preferred, config.orca_params(spec.preferred_speed));
    } else {
      velocities[i] = scripted_velocity(self, spec, plan, time, scenario.goal_tolerance);
    }
  }

  Vec2 robot_velocity = robot_command;
  if (distance(world.robot.position, scenario.robot_goal) <= scenario.goal_tolerance) {
    robot_velocity = {};
  }

  next.step = world.step + 1;
  const double next_time = next.time();
  next.robot.velocity = robot_velocity;
  next.robot.position = world.robot.position + robot_velocity * config.dt;
  next.histories[0].push(next_time, next.robot.position);
  for (std::size_t i = 0; i < n; ++i) {
    next.humans[i].velocity = velocities[i];
    next.humans[i].position = world.humans[i].position + velocities[i] * config.dt;
    next.histories[i + 1].push(next_time, next.humans[i].position);
  }
  return next;
}

}  // namespace crowdnav::sim
