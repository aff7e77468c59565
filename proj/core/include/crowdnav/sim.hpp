#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "crowdnav/geometry.hpp"
#include "crowdnav/orca.hpp"

namespace crowdnav::sim {

enum class Behavior { Orca, NonReactiveStraight, DistractedWaypoints };

const char* to_string(Behavior behavior);

struct Workspace {
  Vec2 min;
  Vec2 max;

  bool contains(const Vec2& p, double slack = 1e-9) const {
    return p.x >= min.x - slack && p.x <= max.x + slack && p.y >= min.y - slack &&
           p.y <= max.y + slack;
  }
};

struct AgentSpec {
  Vec2 start;
  /// Final goal. For DistractedWaypoints this is the intermediate waypoint;
  /// the agent returns to `start` afterwards.
  Vec2 goal;
  Behavior behavior = Behavior::Orca;
  double preferred_speed = 0.8;
  /// The agent stays put until this time.
  double start_time = 0.0;
};

struct Scenario {
  std::string id;
  Workspace workspace{{0.0, 0.0}, {3.6, 4.5}};
  Vec2 robot_start{0.0, 0.0};
  Vec2 robot_goal{3.6, 4.5};
  double robot_preferred_speed = 0.8;
  double robot_radius = 0.3;
  double human_radius = 0.3;
  std::vector<AgentSpec> agents;
  double goal_tolerance = 0.1;
  double max_duration = 30.0;

  /// Throws ValidationError.
  void validate() const;
};

struct SimConfig {
  double dt = 0.1;
  std::uint64_t seed = 0;
  double neighbor_distance = 5.0;
  double time_horizon = 2.0;
  /// Agent max speed as a multiple of its preferred speed.
  double max_speed_factor = 1.2;
  /// History capacity per agent, in simulation steps.
  std::size_t history_capacity = 64;

  void validate() const;
  OrcaParams orca_params(double preferred_speed) const;
};

struct HistoryPoint {
  double time = 0.0;
  Vec2 position;
};

/// Bounded, time-ordered position history. Oldest entries are dropped.
class History {
 public:
  explicit History(std::size_t capacity = 64) : capacity_(capacity) {}

  void push(double time, Vec2 position);
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const HistoryPoint& operator[](std::size_t i) const { return points_[i]; }
  const HistoryPoint& back() const { return points_.back(); }
  const HistoryPoint& front() const { return points_.front(); }

  /// `count` positions ending at the newest one, spaced `stride` entries
  /// apart, oldest first. Missing leading entries repeat the earliest
  /// recorded position; `padded` reports whether that happened.
  std::vector<Vec2> sample(std::size_t count, std::size_t stride, bool* padded = nullptr) const;

 private:
  std::size_t capacity_;
  std::deque<HistoryPoint> points_;
};

/// Per-human progress through its scripted plan.
struct PlanState {
  std::size_t waypoint = 0;
};

/// Immutable snapshot of the world. Agent index 0 in `histories` is the robot.
struct WorldState {
  std::int64_t step = 0;
  double dt = 0.1;
  AgentState robot;
  std::vector<AgentState> humans;
  std::vector<History> histories;
  std::vector<PlanState> plans;

  double time() const { return static_cast<double>(step) * dt; }
  std::size_t num_humans() const { return humans.size(); }
};

WorldState initial_world(const Scenario& scenario, const SimConfig& config);

/// Waypoint sequence walked by a scripted agent.
std::vector<Vec2> waypoints(const AgentSpec& spec);

/// Velocity for a non-ORCA agent. Advances `plan` when the current waypoint is
/// reached so the next call heads to the following one.
Vec2 scripted_velocity(const AgentState& agent, const AgentSpec& spec, PlanState& plan,
                       double time, double goal_tolerance);

/// Velocity toward `target` at `speed`, zero when within `tolerance`.
Vec2 velocity_toward(const Vec2& from, const Vec2& target, double speed, double tolerance);

/// True once the human has completed its plan and sits at its final goal.
bool human_at_goal(const AgentState& agent, const AgentSpec& spec, const PlanState& plan,
                   double goal_tolerance);

/// Advances every agent by one explicit-Euler step. Human velocities are
/// evaluated against the pre-step world.
WorldState step_world(const WorldState& world, Vec2 robot_command, const Scenario& scenario,
                      const SimConfig& config);

}  // namespace crowdnav::sim
