#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "crowdnav/metrics.hpp"
#include "crowdnav/mpc.hpp"
#include "crowdnav/prediction.hpp"
#include "crowdnav/sgan.hpp"

namespace crowdnav::harness {

struct ExperimentConfig {
  std::string scenario = "cooperative";
  std::vector<std::string> models{"cv"};
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  mpc::MpcConfig mpc;
  /// manifest.json, or a directory holding one. Required by sgan models.
  std::filesystem::path weights;
  std::filesystem::path out = "out";

  /// Throws ValidationError.
  void validate() const;
};

/// JSON document with keys scenario, model (string or array), trials, seed,
/// mpc, weights, out. Unknown keys are errors. Relative paths resolve
/// against `base`.
ExperimentConfig parse_config(std::string_view json_text, const std::filesystem::path& base = {});
ExperimentConfig load_config(const std::filesystem::path& path);

const std::vector<std::string>& model_ids();

/// `network` is required for sgan-N ids.
std::unique_ptr<predict::Predictor> make_predictor(
    const std::string& id, std::shared_ptr<const predict::SganNetwork> network = nullptr);

struct TrialSummary {
  std::string model;
  std::uint64_t seed = 0;
  metrics::TrialMetrics metrics;
  metrics::OnlineErrors errors;
  std::size_t prediction_calls = 0;
  /// Samples per logged prediction set; every set in a trial has the same count.
  std::size_t samples_per_call = 0;
};

struct ModelSummary {
  std::string model;
  std::size_t trials = 0;
  metrics::Interval safety;
  metrics::Interval time_to_goal;
  metrics::Interval ade;
  metrics::Interval fde;
  /// Per future step, across per-trial error curves.
  std::vector<metrics::Interval> curve;
  double positive_safety_fraction = 0.0;
  double reached_fraction = 0.0;
};

struct PairTest {
  std::string metric;
  std::string a;
  std::string b;
  metrics::UTest test;
};

struct BenchmarkReport {
  ExperimentConfig config;
  std::vector<TrialSummary> trials;
  std::vector<ModelSummary> models;
  std::vector<PairTest> tests;

  const ModelSummary& model(const std::string& id) const;
};

/// Runs every (model, trial) pair; trial i uses seed = base seed + i. With
/// `write_outputs` the per-trial logs and aggregate files go under config.out.
BenchmarkReport run_benchmark(const ExperimentConfig& config, bool write_outputs = true);

}  // namespace crowdnav::harness
