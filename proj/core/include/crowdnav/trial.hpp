#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "crowdnav/mpc.hpp"
#include "crowdnav/prediction.hpp"
#include "crowdnav/sim.hpp"

namespace crowdnav::trial {

enum class Status { ReachedGoal, Timeout };

const char* to_string(Status status);

struct TrialConfig {
  sim::SimConfig sim;
  double prediction_dt = predict::kDefaultPredictionDt;
  std::size_t observed_steps = predict::kDefaultObservedSteps;
  std::size_t horizon = predict::kDefaultHorizon;

  /// Simulation steps per prediction step. Throws ValidationError if the
  /// prediction step is not a whole multiple of the simulation step.
  std::size_t prediction_stride() const;
  void validate() const;
};

struct ControlInput {
  const sim::WorldState& world;
  const sim::Scenario& scenario;
  /// Prediction on its native grid; null when the controller needs none.
  const predict::PredictionSet* prediction = nullptr;
};

struct ControlOutput {
  Vec2 command;
  std::optional<mpc::Decision> decision;
};

class Controller {
 public:
  virtual ~Controller() = default;
  virtual std::string id() const = 0;
  virtual bool uses_prediction() const { return true; }
  virtual ControlOutput control(const ControlInput& input) = 0;
};

/// Sampling-based MPC over radial rollouts.
class MpcController final : public Controller {
 public:
  explicit MpcController(mpc::MpcConfig config);
  std::string id() const override { return "mpc"; }
  ControlOutput control(const ControlInput& input) override;
  const mpc::MpcConfig& config() const { return config_; }

 private:
  mpc::MpcConfig config_;
};

/// The robot behaves like one more ORCA agent.
class OrcaController final : public Controller {
 public:
  explicit OrcaController(sim::SimConfig config) : config_(config) {}
  std::string id() const override { return "orca"; }
  bool uses_prediction() const override { return false; }
  ControlOutput control(const ControlInput& input) override;

 private:
  sim::SimConfig config_;
};

struct Snapshot {
  std::int64_t step = 0;
  double time = 0.0;
  sim::AgentState robot;
  std::vector<sim::AgentState> humans;
};

struct PredictionRecord {
  std::int64_t step = 0;
  predict::PredictionSet set;
};

struct DecisionRecord {
  std::int64_t step = 0;
  std::size_t chosen = 0;
  mpc::CostBreakdown cost;
  /// Costs of every rollout, in rollout order.
  std::vector<mpc::CostBreakdown> all;
};

struct TrialLog {
  std::string scenario_id;
  std::string model_id;
  std::uint64_t seed = 0;
  double dt = 0.1;
  std::size_t prediction_stride = 4;
  double goal_tolerance = 0.1;
  double max_duration = 0.0;
  Vec2 robot_goal;
  double robot_radius = 0.3;
  double human_radius = 0.3;
  Status status = Status::Timeout;
  double time_to_goal = 0.0;
  /// One per world state, starting with the initial one.
  std::vector<Snapshot> snapshots;
  std::vector<PredictionRecord> predictions;
  std::vector<DecisionRecord> decisions;

  std::size_t steps() const { return snapshots.empty() ? 0 : snapshots.size() - 1; }
};

/// Request built from the world histories. Joint requests put the robot first.
predict::PredictionRequest make_request(const sim::WorldState& world, const TrialConfig& config,
                                        bool include_robot, std::size_t num_samples,
                                        std::uint64_t seed);

/// Observe, predict, control and step until the robot reaches its goal or
/// the scenario duration runs out. `predictor` may be null.
TrialLog run_trial(const sim::Scenario& scenario, Controller& controller,
                   const predict::Predictor* predictor, const TrialConfig& config);

/// step,time,agent_id,x,y,vx,vy
void write_trajectory_csv(const TrialLog& log, const std::filesystem::path& path);
/// step,chosen_rollout,J_g,J_d,J_p,J_c,total
void write_decisions_csv(const TrialLog& log, const std::filesystem::path& path);

}  // namespace crowdnav::trial
