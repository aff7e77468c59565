#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <vector>

#include "crowdnav/autodiff.hpp"
#include "crowdnav/prediction.hpp"
#include "crowdnav/sgan.hpp"

namespace crowdnav::train {

struct TrainSample {
  /// observed[agent][step], h positions each.
  std::vector<Trajectory> observed;
  /// future[agent][step], T positions each.
  std::vector<Trajectory> future;

  std::size_t num_agents() const { return observed.size(); }
  /// Throws ValidationError on inconsistent shapes.
  void validate() const;
};

struct TrainConfig {
  double learning_rate = 0.05;
  std::size_t batch_size = 8;
  std::size_t epochs = 200;
  std::size_t k_variety = 4;
  double adversarial_weight = 0.05;
  double variety_weight = 1.0;
  double clip_norm = 1.0;
  std::uint64_t seed = 1;
  predict::SganHyperparameters hyper;

  void validate() const;
};

struct EpochLosses {
  std::size_t epoch = 0;
  double loss_d = 0.0;
  double loss_g = 0.0;
  double variety = 0.0;
};

struct TrainResult {
  predict::GenerativeModelWeights weights;
  /// Row 0 evaluates the initialization; row e is the mean over epoch e.
  std::vector<EpochLosses> trace;
};

/// Trainable copy of a weight collection in manifest order.
class ParameterSet {
 public:
  explicit ParameterSet(const predict::GenerativeModelWeights& weights);

  Parameter& operator[](const std::string& name);
  const Parameter& operator[](const std::string& name) const;
  std::vector<Parameter*> group(const std::string& prefix);
  std::vector<Parameter*> all();
  void zero_grad();
  const predict::SganHyperparameters& hyper() const { return hyper_; }
  predict::GenerativeModelWeights to_weights() const;

 private:
  predict::SganHyperparameters hyper_;
  std::vector<std::string> order_;
  std::map<std::string, Parameter> params_;
};

/// Generator forward pass recorded on a tape.
struct GeneratorOutput {
  /// Per future step, a 2 x n matrix of predicted displacements.
  std::vector<Var> displacements;
  /// Per future step, a 2 x n matrix of absolute positions.
  std::vector<Var> positions;
};

GeneratorOutput generator_forward(Tape& tape, ParameterSet& params,
                                  std::span<const Trajectory> observed, const Eigen::VectorXd& z,
                                  std::size_t horizon);

/// Discriminator logits (1 x n) over per-step 2 x n displacement matrices.
Var discriminator_logits(Tape& tape, ParameterSet& params, std::span<const Var> displacements);

/// Min over samples of the L2 norm of the flattened position error.
double variety_loss(std::span<const Trajectory> ground_truth,
                    std::span<const predict::TrajectorySample> samples);

struct GanLosses {
  double loss_d = 0.0;
  double loss_g = 0.0;
};

/// loss_D = -mean log D(real) - mean log(1 - D(fake));
/// loss_G = -mean log D(fake) (non-saturating). One latent per scene.
GanLosses gan_losses(std::span<const TrainSample> batch, ParameterSet& params,
                     std::span<const Eigen::VectorXd> latents);

/// Records loss_D for the batch on `tape` (fake trajectories detached).
Var record_discriminator_loss(Tape& tape, ParameterSet& params, std::span<const TrainSample> batch,
                              std::span<const Eigen::VectorXd> latents);

/// Records w_adv * loss_G + w_var * variety on `tape`. `latents` holds
/// k_variety vectors per scene; the first one of each scene feeds the
/// adversarial term.
Var record_generator_loss(Tape& tape, ParameterSet& params, std::span<const TrainSample> batch,
                          std::span<const Eigen::VectorXd> latents, std::size_t k_variety,
                          double adversarial_weight, double variety_weight,
                          double* adversarial_out = nullptr, double* variety_out = nullptr);

/// Global-norm gradient clipping followed by a plain SGD step.
void sgd_step(std::span<Parameter* const> params, double learning_rate, double clip_norm);

/// Alternating discriminator / generator updates. Deterministic given the seed.
TrainResult train_toy(std::span<const TrainSample> dataset, const TrainConfig& config);

struct SyntheticConfig {
  std::uint64_t seed = 7;
  double sim_dt = 0.1;
  double prediction_dt = predict::kDefaultPredictionDt;
  std::size_t observed_steps = predict::kDefaultObservedSteps;
  std::size_t horizon = predict::kDefaultHorizon;
  std::size_t min_agents = 2;
  std::size_t max_agents = 4;
  std::size_t stride = 1;
  double max_duration = 20.0;
};

/// Number of length-(h + T) windows in a trajectory of `length` samples.
std::size_t window_count(std::size_t length, std::size_t observed, std::size_t horizon,
                         std::size_t stride);

/// Windows from all-ORCA scenes with random starts and goals in the
/// 3.6 x 4.5 m workspace, sampled at the prediction step.
std::vector<TrainSample> gen_synthetic_dataset(std::size_t num_scenes,
                                               const SyntheticConfig& config);

/// Constant-velocity walkers with random headings and speeds.
std::vector<TrainSample> straight_line_dataset(std::size_t num_samples, std::uint64_t seed,
                                               std::size_t observed_steps = 8,
                                               std::size_t horizon = 12, double dt = 0.4);

/// epoch,loss_d,loss_g,variety
void write_loss_trace(const std::vector<EpochLosses>& trace, const std::filesystem::path& path);

}  // namespace crowdnav::train
