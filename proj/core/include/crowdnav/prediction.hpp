#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "crowdnav/geometry.hpp"

namespace crowdnav::predict {

/// Prediction grid defaults: 0.4 s steps, 8 observed, 12 predicted.
inline constexpr double kDefaultPredictionDt = 0.4;
inline constexpr std::size_t kDefaultObservedSteps = 8;
inline constexpr std::size_t kDefaultHorizon = 12;
inline constexpr double kDefaultCvnSigma = 0.1;

struct PredictionRequest {
  /// One history per agent, oldest first, spaced `dt` apart.
  std::vector<Trajectory> histories;
  double dt = kDefaultPredictionDt;
  std::size_t horizon = kDefaultHorizon;
  std::size_t num_samples = 1;
  std::uint64_t seed = 0;
  /// Set when some history was padded with a stationary prefix.
  bool padded = false;

  std::size_t num_agents() const { return histories.size(); }
  /// Throws InsufficientHistoryError / ValidationError.
  void validate(std::size_t min_history) const;
};

struct TrajectorySample {
  /// futures[agent][step]
  std::vector<Trajectory> futures;
};

struct PredictionSet {
  std::vector<TrajectorySample> samples;
  std::string model_id;
  /// Spacing of future points.
  double dt = kDefaultPredictionDt;
  /// Last observed position of each agent; the t = 0 point of every future.
  std::vector<Vec2> origins;
  /// True once resampled: every future then starts with its origin.
  bool anchored = false;
  bool padded_history = false;
  /// Agent 0 is the robot itself (joint models only).
  bool includes_ego = false;

  std::size_t num_samples() const { return samples.size(); }
  std::size_t num_agents() const { return origins.size(); }
  std::size_t horizon() const;
  /// Shape and finiteness check; throws ValidationError.
  void validate() const;
};

/// Constant velocity from the last two observations.
PredictionSet predict_cv(const PredictionRequest& request);

/// Constant velocity with the heading of each agent rotated by an angle drawn
/// from N(0, sigma^2), independently per agent and per sample.
PredictionSet predict_cvn(const PredictionRequest& request, double sigma_theta);

/// Velocity and acceleration by finite differences on the last three points.
PredictionSet predict_const_acc(const PredictionRequest& request);

/// Per-coordinate least-squares line over all observations.
PredictionSet predict_linreg(const PredictionRequest& request);

/// Linearly interpolates every future onto a grid of spacing `dt_ctrl`,
/// starting with the origin at t = 0.
PredictionSet resample_prediction(const PredictionSet& set, double dt_ctrl);

/// Piecewise-linear lookup on a polyline sampled every `dt` starting at t = 0.
/// Times past the end hold the final point.
Vec2 interpolate(const Trajectory& polyline, double dt, double t);

/// A seeded trajectory forecaster.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual std::string id() const = 0;
  virtual PredictionSet predict(const PredictionRequest& request) const = 0;
  /// Samples per call.
  virtual std::size_t num_samples() const { return 1; }
  /// Jointly forecasts the robot as agent 0.
  virtual bool joint_with_ego() const { return false; }
  virtual std::size_t min_history() const { return 2; }
};

class CvPredictor final : public Predictor {
 public:
  std::string id() const override { return "cv"; }
  PredictionSet predict(const PredictionRequest& request) const override;
};

class CvnPredictor final : public Predictor {
 public:
  explicit CvnPredictor(std::size_t samples = 20, double sigma_theta = kDefaultCvnSigma);
  std::string id() const override { return "cvn"; }
  PredictionSet predict(const PredictionRequest& request) const override;
  std::size_t num_samples() const override { return samples_; }

 private:
  std::size_t samples_;
  double sigma_;
};

class ConstAccPredictor final : public Predictor {
 public:
  std::string id() const override { return "constacc"; }
  PredictionSet predict(const PredictionRequest& request) const override;
  std::size_t min_history() const override { return 3; }
};

class LinRegPredictor final : public Predictor {
 public:
  std::string id() const override { return "linreg"; }
  PredictionSet predict(const PredictionRequest& request) const override;
};

}  // namespace crowdnav::predict
