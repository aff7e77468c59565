#include <benchmark/benchmark.h>

#include "crowdnav/mpc.hpp"
#include "crowdnav/orca.hpp"
#include "crowdnav/prediction.hpp"
#include "crowdnav/random.hpp"
#include "crowdnav/scenarios.hpp"
#include "crowdnav/sgan.hpp"
#include "crowdnav/sim.hpp"
#include "crowdnav/trial.hpp"

using namespace crowdnav;

namespace {

std::vector<Trajectory> histories(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Trajectory> out(n);
  for (auto& h : out) {
    Vec2 p{rng.uniform(0, 3.6), rng.uniform(0, 4.5)};
    const Vec2 v{rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)};
    for (int m = 0; m < 8; ++m, p += v) h.push_back(p);
  }
  return out;
}

void BM_OrcaVelocity(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  std::vector<sim::AgentState> neighbors;
  for (std::size_t i = 0; i < n; ++i) {
    neighbors.push_back({{rng.uniform(-3, 3), rng.uniform(-3, 3)}, {rng.uniform(-1, 1), rng.uniform(-1, 1)}});
  }
  const sim::AgentState self{{0, 0}, {0.5, 0.5}};
  const sim::OrcaParams params;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sim::orca_velocity(self, neighbors, {0.8, 0.0}, params));
  }
}
BENCHMARK(BM_OrcaVelocity)->Arg(1)->Arg(3)->Arg(10);

void BM_StepWorld(benchmark::State& state) {
  const auto scenario = scenarios::make_scenario("cooperative", 1);
  const sim::SimConfig cfg;
  const auto world = sim::initial_world(scenario, cfg);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sim::step_world(world, {0.5, 0.5}, scenario, cfg));
  }
}
BENCHMARK(BM_StepWorld);

void BM_SelectControl(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  predict::PredictionRequest req;
  req.histories = histories(3, 2);
  req.num_samples = k;
  const auto set = predict::resample_prediction(predict::predict_cvn(req, 0.1), 0.1);
  const mpc::MpcConfig cfg;
  const sim::AgentState robot{{0, 0}, {0.5, 0.5}};
  const auto rollouts = mpc::generate_rollouts(robot, cfg);
  const auto ego = mpc::cv_ego_track(robot, cfg);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mpc::select_control(rollouts, set, {3.6, 4.5}, cfg, 0.3, 0.3, ego));
  }
}
BENCHMARK(BM_SelectControl)->Arg(1)->Arg(20);

void BM_SganPredict(benchmark::State& state) {
  const predict::SganNetwork net(predict::init_weights({}, 3));
  predict::PredictionRequest req;
  req.histories = histories(static_cast<std::size_t>(state.range(0)), 4);
  req.num_samples = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(predict::predict_sgan(req, net));
  }
}
BENCHMARK(BM_SganPredict)->Args({4, 1})->Args({4, 20});

void BM_TrialCv(benchmark::State& state) {
  const auto scenario = scenarios::make_scenario("cooperative", 1);
  const predict::CvPredictor cv;
  for (auto _ : state) {
    trial::MpcController controller{mpc::MpcConfig{}};
    benchmark::DoNotOptimize(trial::run_trial(scenario, controller, &cv, {}));
  }
}
BENCHMARK(BM_TrialCv)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
