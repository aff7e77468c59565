#pragma once

#include <numbers>
#include <span>
#include <vector>

#include "crowdnav/geometry.hpp"
#include "crowdnav/orca.hpp"
#include "crowdnav/prediction.hpp"

namespace crowdnav::mpc {

struct MpcConfig {
  double a_g = 1.0;
  double a_d = 1.5;
  double a_p = 0.5;
  double a_c = 0.3;
  std::size_t num_subgoals = 10;
  double subgoal_interval = std::numbers::pi / 5.0;
  double subgoal_distance = 10.0;
  std::size_t horizon = 10;
  double dt = 0.1;
  double preferred_speed = 0.8;
  double d_safe = 0.3;
  double sigma_p = 0.45;
  /// Appends a zero-velocity rollout after the radial ones.
  bool stop_rollout = false;

  /// Throws ValidationError.
  void validate() const;
};

/// Constant-velocity control sequence and the positions it reaches.
struct Rollout {
  Vec2 start;
  /// horizon velocity commands.
  std::vector<Vec2> controls;
  /// states[t] is the position after t + 1 commands.
  std::vector<Vec2> states;
};

struct CostBreakdown {
  double J_g = 0.0;
  double J_d = 0.0;
  double J_p = 0.0;
  double J_c = 0.0;
  double total = 0.0;
};

struct SocialCost {
  double J_d = 0.0;
  double J_p = 0.0;
};

struct Decision {
  std::size_t index = 0;
  Vec2 command;
  std::vector<CostBreakdown> costs;
};

/// Rollout j heads toward position + distance * (cos(j * interval), sin(j * interval)).
std::vector<Rollout> generate_rollouts(const sim::AgentState& robot, const MpcConfig& config);

/// Final distance to goal relative to the current distance, clamped to [0, 2].
double cost_goal(const Rollout& rollout, const Vec2& goal);

/// Squared-hinge and Gaussian clearance penalties, averaged over steps and
/// humans. Tracks are on the controller grid with the current position first.
SocialCost cost_social(const Rollout& rollout, std::span<const Trajectory> humans,
                       double robot_radius, double human_radius, const MpcConfig& config);

/// Mean distance between rollout states and the ego track (current position first).
double cost_consistency(const Rollout& rollout, std::span<const Vec2> ego);

/// The robot's own constant-velocity extrapolation on the controller grid.
Trajectory cv_ego_track(const sim::AgentState& robot, const MpcConfig& config);

/// Monte-Carlo expectation over the samples of a resampled PredictionSet.
/// When the set includes the robot as agent 0 its track feeds J_c; otherwise
/// `ego_fallback` does.
CostBreakdown expected_cost(const Rollout& rollout, const predict::PredictionSet& predictions,
                            const Vec2& goal, const MpcConfig& config, double robot_radius,
                            double human_radius, std::span<const Vec2> ego_fallback);

/// Argmin of the total cost; ties go to the lowest index.
Decision select_control(std::span<const Rollout> rollouts,
                        const predict::PredictionSet& predictions, const Vec2& goal,
                        const MpcConfig& config, double robot_radius, double human_radius,
                        std::span<const Vec2> ego_fallback);

}  // namespace crowdnav::mpc
