#include "crowdnav/trial.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "crowdnav/error.hpp"
#include "crowdnav/random.hpp"

namespace crowdnav::trial {

const char* to_string(Status status) {
  return status == Status::ReachedGoal ? "reached_goal" : "timeout";
}

std::size_t TrialConfig::prediction_stride() const {
  const double ratio = prediction_dt / sim.dt;
  const auto stride = std::llround(ratio);
  if (stride < 1 || std::abs(ratio - static_cast<double>(stride)) > 1e-9) {
    throw ValidationError("prediction dt must be a whole multiple of the simulation dt");
  }
  return static_cast<std::size_t>(stride);
}

void TrialConfig::validate() const {
  sim.validate();
  if (observed_steps < 2 || horizon < 1) throw ValidationError("need h >= 2 and T >= 1");
  prediction_stride();
}

MpcController::MpcController(mpc::MpcConfig config) : config_(config) { config_.validate(); }

ControlOutput MpcController::control(const ControlInput& input) {
  if (!input.prediction) throw ValidationError("mpc controller needs a prediction");
  const predict::PredictionSet grid = predict::resample_prediction(*input.prediction, config_.dt);
  const auto rollouts = mpc::generate_rollouts(input.world.robot, config_);
  const Trajectory ego = mpc::cv_ego_track(input.world.robot, config_);
  mpc::Decision d = mpc::select_control(rollouts, grid, input.scenario.robot_goal, config_,
                                        input.scenario.robot_radius,
                                        input.scenario.human_radius, ego);
  ControlOutput out;
  out.command = d.command;
  out.decision = std::move(d);
  return out;
}

ControlOutput OrcaController::control(const ControlInput& input) {
  const sim::WorldState& w = input.world;
  const sim::Scenario& s = input.scenario;
  const Vec2 to_goal = s.robot_goal - w.robot.position;
  const double dist = to_goal.norm();
  Vec2 preferred;
  if (dist > s.goal_tolerance) {
    preferred = normalized(to_goal) * std::min(s.robot_preferred_speed, dist / w.dt);
  }
  ControlOutput out;
  out.command =
      sim::orca_velocity(w.robot, w.humans, preferred, config_.orca_params(s.robot_preferred_speed));
  return out;
}

predict::PredictionRequest make_request(const sim::WorldState& world, const TrialConfig& config,
                                        bool include_robot, std::size_t num_samples,
                                        std::uint64_t seed) {
  predict::PredictionRequest req;
  req.dt = config.prediction_dt;
  req.horizon = config.horizon;
  req.num_samples = num_samples;
  req.seed = seed;
  const std::size_t stride = config.prediction_stride();
  for (std::size_t i = include_robot ? 0 : 1; i < world.histories.size(); ++i) {
    bool padded = false;
    req.histories.push_back(world.histories[i].sample(config.observed_steps, stride, &padded));
    req.padded = req.padded || padded;
  }
  return req;
}

namespace {

Snapshot snapshot(const sim::WorldState& w) {
  return Snapshot{w.step, w.time(), w.robot, w.humans};
}

predict::PredictionSet empty_prediction(const TrialConfig& config) {
  predict::PredictionSet set;
  set.samples.resize(1);
  set.dt = config.prediction_dt;
  set.model_id = "none";
  return set;
}

}  // namespace

TrialLog run_trial(const sim::Scenario& scenario, Controller& controller,
                   const predict::Predictor* predictor, const TrialConfig& config) {
  scenario.validate();
  config.validate();
  sim::SimConfig sim_config = config.sim;
  // Histories must reach back over the full observation window.
  sim_config.history_capacity = std::max(
      sim_config.history_capacity, config.prediction_stride() * (config.observed_steps - 1) + 1);

  TrialLog log;
  log.scenario_id = scenario.id;
  log.model_id = predictor ? predictor->id() : controller.id();
  log.seed = config.sim.seed;
  log.dt = sim_config.dt;
  log.prediction_stride = config.prediction_stride();
  log.goal_tolerance = scenario.goal_tolerance;
  log.max_duration = scenario.max_duration;
  log.robot_goal = scenario.robot_goal;
  log.robot_radius = scenario.robot_radius;
  log.human_radius = scenario.human_radius;

  Rng rng(config.sim.seed);
  sim::WorldState world = sim::initial_world(scenario, sim_config);
  log.snapshots.push_back(snapshot(world));
  const auto max_steps = static_cast<std::int64_t>(std::llround(scenario.max_duration / sim_config.dt));
  const double max_speed = sim_config.max_speed_factor * scenario.robot_preferred_speed;

  for (;;) {
    if (distance(world.robot.position, scenario.robot_goal) <= scenario.goal_tolerance) {
      log.status = Status::ReachedGoal;
      log.time_to_goal = world.time();
      break;
    }
    if (world.step >= max_steps) {
      log.status = Status::Timeout;
      log.time_to_goal = scenario.max_duration;
      break;
    }

    const predict::PredictionSet* prediction = nullptr;
    predict::PredictionSet fallback;
    if (controller.uses_prediction()) {
      const std::uint64_t call_seed = rng.fork_seed();
      const bool joint = predictor && predictor->joint_with_ego();
      if (predictor && (joint || !world.humans.empty())) {
        const auto req = make_request(world, config, joint, predictor->num_samples(), call_seed);
        PredictionRecord rec;
        rec.step = world.step;
        rec.set = predictor->predict(req);
        rec.set.includes_ego = joint;
        rec.set.padded_history = req.padded;
        log.predictions.push_back(std::move(rec));
        prediction = &log.predictions.back().set;
      } else {
        fallback = empty_prediction(config);
        prediction = &fallback;
      }
    }

    ControlOutput out = controller.control(ControlInput{world, scenario, prediction});
    if (out.decision) {
      DecisionRecord rec;
      rec.step = world.step;
      rec.chosen = out.decision->index;
      rec.cost = out.decision->costs[out.decision->index];
      rec.all = std::move(out.decision->costs);
      log.decisions.push_back(std::move(rec));
    }
    world = sim::step_world(world, clamp_norm(out.command, max_speed), scenario, sim_config);
    log.snapshots.push_back(snapshot(world));
  }
  return log;
}

void write_trajectory_csv(const TrialLog& log, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "step,time,agent_id,x,y,vx,vy\n";
  for (const Snapshot& s : log.snapshots) {
    auto row = [&](std::size_t id, const sim::AgentState& a) {
      out << fmt::format("{},{:.6f},{},{:.6f},{:.6f},{:.6f},{:.6f}\n", s.step, s.time, id,
                         a.position.x, a.position.y, a.velocity.x, a.velocity.y);
    };
    row(0, s.robot);
    for (std::size_t i = 0; i < s.humans.size(); ++i) row(i + 1, s.humans[i]);
  }
}

void write_decisions_csv(const TrialLog& log, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "step,chosen_rollout,J_g,J_d,J_p,J_c,total\n";
  for (const DecisionRecord& d : log.decisions) {
    out << fmt::format("{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n", d.step, d.chosen, d.cost.J_g,
                       d.cost.J_d, d.cost.J_p, d.cost.J_c, d.cost.total);
  }
}

}  // namespace crowdnav::trial
