#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "crowdnav/prediction.hpp"
#include "crowdnav/trial.hpp"

namespace crowdnav::metrics {

enum class Reduction { MinOverSamples, MeanOverSamples };

struct DisplacementErrors {
  double ade = 0.0;
  double fde = 0.0;
  /// Per-step error averaged over agents.
  std::vector<double> curve;
  /// Per-agent values after the sample reduction.
  std::vector<double> agent_ade;
  std::vector<double> agent_fde;
};

/// Errors of `predictions` (agents offset by `first_agent`) against n x T
/// ground truth, truncated to the common horizon. Best-of-k is taken per agent.
DisplacementErrors displacement_errors(std::span<const Trajectory> ground_truth,
                                       const predict::PredictionSet& predictions,
                                       Reduction reduction = Reduction::MinOverSamples,
                                       std::size_t first_agent = 0);

struct TrialMetrics {
  /// Minimum center distance minus both radii; +inf without humans.
  double safety = std::numeric_limits<double>::infinity();
  double time_to_goal = 0.0;
  trial::Status status = trial::Status::Timeout;
};

TrialMetrics trial_metrics(const trial::TrialLog& log, double robot_radius, double human_radius);

struct Interval {
  double mean = 0.0;
  double ci95 = 0.0;
  std::size_t n = 0;
};

/// Mean and 1.96 * s / sqrt(n) with the n - 1 sample deviation. Throws on empty input.
Interval aggregate_ci(std::span<const double> values);

struct DistanceError {
  std::int64_t step = 0;
  /// Robot-human center distance when the prediction was made.
  double distance = 0.0;
  /// Best-of-k ADE of that human's prediction.
  double error = 0.0;
};

struct OnlineErrors {
  /// Per future step, mean over calls with ground truth for that step.
  std::vector<double> curve;
  std::vector<std::size_t> curve_counts;
  /// Mean over calls with the full horizon available.
  double ade = std::numeric_limits<double>::quiet_NaN();
  double fde = std::numeric_limits<double>::quiet_NaN();
  std::size_t full_calls = 0;
  std::vector<DistanceError> by_distance;
};

/// Scores every logged prediction against the positions logged afterwards.
/// Only humans are scored; the robot track of joint models is skipped.
OnlineErrors online_prediction_errors(const trial::TrialLog& log);

struct UTest {
  double u = 0.0;
  double z = 0.0;
  double p = 1.0;
};

/// Two-sided Mann-Whitney U test, normal approximation with tie and
/// continuity corrections. `u` is the statistic of the first sample.
UTest mann_whitney_u(std::span<const double> a, std::span<const double> b);

}  // namespace crowdnav::metrics
