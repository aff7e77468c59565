#include "crowdnav/mpc.hpp"

#include <algorithm>
#include <cmath>

#include "crowdnav/error.hpp"

namespace crowdnav::mpc {

void MpcConfig::validate() const {
  if (!(a_g >= 0.0) || !(a_d >= 0.0) || !(a_p >= 0.0) || !(a_c >= 0.0)) {
    throw ValidationError("mpc: cost weights must be non-negative");
  }
  if (num_subgoals < 1 || horizon < 1) throw ValidationError("mpc: need subgoals and a horizon");
  if (std::abs(static_cast<double>(num_subgoals) * subgoal_interval - 2.0 * std::numbers::pi) > 1e-9) {
    throw ValidationError("mpc: subgoals must cover the full circle");
  }
  if (!(subgoal_distance > 0.0) || !(dt > 0.0) || !(preferred_speed > 0.0) || !(d_safe >= 0.0) ||
      !(sigma_p > 0.0)) {
    throw ValidationError("mpc: distances, dt, speed and sigma_p must be positive");
  }
}

namespace {

Rollout constant_rollout(const Vec2& start, const Vec2& velocity, const MpcConfig& config) {
  Rollout r;
  r.start = start;
  r.controls.assign(config.horizon, velocity);
  Vec2 p = start;
  for (std::size_t t = 0; t < config.horizon; ++t) {
    p += velocity * config.dt;
    r.states.push_back(p);
  }
  return r;
}

}  // namespace

std::vector<Rollout> generate_rollouts(const sim::AgentState& robot, const MpcConfig& config) {
  config.validate();
  std::vector<Rollout> out;
  for (std::size_t j = 0; j < config.num_subgoals; ++j) {
    const double angle = static_cast<double>(j) * config.subgoal_interval;
    const Vec2 subgoal =
        robot.position + Vec2{std::cos(angle), std::sin(angle)} * config.subgoal_distance;
    const Vec2 velocity = normalized(subgoal - robot.position) * config.preferred_speed;
    out.push_back(constant_rollout(robot.position, velocity, config));
  }
  if (config.stop_rollout) out.push_back(constant_rollout(robot.position, {}, config));
  return out;
}

double cost_goal(const Rollout& rollout, const Vec2& goal) {
  const Vec2 final = rollout.states.empty() ? rollout.start : rollout.states.back();
  const double ratio = distance(final, goal) / (distance(rollout.start, goal) + 1e-6);
  return std::clamp(ratio, 0.0, 2.0);
}

SocialCost cost_social(const Rollout& rollout, std::span<const Trajectory> humans,
                       double robot_radius, double human_radius, const MpcConfig& config) {
  SocialCost out;
  if (humans.empty() || rollout.states.empty()) return out;
  const double two_var = 2.0 * config.sigma_p * config.sigma_p;
  for (const Trajectory& track : humans) {
    if (track.size() < rollout.states.size() + 1) {
      throw ValidationError("mpc: human track shorter than the rollout horizon");
    }
    for (std::size_t t = 0; t < rollout.states.size(); ++t) {
      const double c = distance(rollout.states[t], track[t + 1]) - robot_radius - human_radius;
      const double hinge = std::max(0.0, config.d_safe - c);
      out.J_d += hinge * hinge;
      out.J_p += std::exp(-(c * c) / two_var);
    }
  }
  const double count = static_cast<double>(humans.size() * rollout.states.size());
  out.J_d /= count;
  out.J_p /= count;
  return out;
}

double cost_consistency(const Rollout& rollout, std::span<const Vec2> ego) {
  if (rollout.states.empty()) return 0.0;
  if (ego.size() < rollout.states.size() + 1) {
    throw ValidationError("mpc: ego track shorter than the rollout horizon");
  }
  double sum = 0.0;
  for (std::size_t t = 0; t < rollout.states.size(); ++t) {
    sum += distance(rollout.states[t], ego[t + 1]);
  }
  return sum / static_cast<double>(rollout.states.size());
}

Trajectory cv_ego_track(const sim::AgentState& robot, const MpcConfig& config) {
  Trajectory track;
  for (std::size_t t = 0; t <= config.horizon; ++t) {
    track.push_back(robot.position + robot.velocity * (config.dt * static_cast<double>(t)));
  }
  return track;
}

CostBreakdown expected_cost(const Rollout& rollout, const predict::PredictionSet& predictions,
                            const Vec2& goal, const MpcConfig& config, double robot_radius,
                            double human_radius, std::span<const Vec2> ego_fallback) {
  if (predictions.samples.empty()) throw ValidationError("mpc: empty prediction set");
  if (!predictions.anchored) throw ValidationError("mpc: predictions must be resampled first");
  CostBreakdown out;
  out.J_g = cost_goal(rollout, goal);
  const std::size_t first_human = predictions.includes_ego ? 1 : 0;
  // Running mean, so k identical samples reproduce the single-sample value exactly.
  double count = 0.0;
  for (const predict::TrajectorySample& sample : predictions.samples) {
    const std::span<const Trajectory> all(sample.futures);
    const SocialCost social = cost_social(rollout, all.subspan(std::min(first_human, all.size())),
                                          robot_radius, human_radius, config);
    const double J_c = predictions.includes_ego ? cost_consistency(rollout, sample.futures.front())
                                                : cost_consistency(rollout, ego_fallback);
    count += 1.0;
    out.J_d += (social.J_d - out.J_d) / count;
    out.J_p += (social.J_p - out.J_p) / count;
    out.J_c += (J_c - out.J_c) / count;
  }
  out.total = config.a_g * out.J_g + config.a_d * out.J_d + config.a_p * out.J_p + config.a_c * out.J_c;
  return out;
}

Decision select_control(std::span<const Rollout> rollouts,
                        const predict::PredictionSet& predictions, const Vec2& goal,
                        const MpcConfig& config, double robot_radius, double human_radius,
                        std::span<const Vec2> ego_fallback) {
  if (rollouts.empty()) throw ValidationError("mpc: no rollouts");
  Decision d;
  for (std::size_t j = 0; j < rollouts.size(); ++j) {
    d.costs.push_back(expected_cost(rollouts[j], predictions, goal, config, robot_radius,
                                    human_radius, ego_fallback));
    if (d.costs[j].total < d.costs[d.index].total) d.index = j;
  }
  d.command = rollouts[d.index].controls.empty() ? Vec2{} : rollouts[d.index].controls.front();
  return d;
}

}  // namespace crowdnav::mpc
