#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "crowdnav/prediction.hpp"

namespace crowdnav::predict {

struct SganHyperparameters {
  std::size_t latent_dim = 4;
  std::size_t embed_dim = 8;
  std::size_t encoder_hidden = 16;
  std::size_t pool_hidden = 16;
  std::size_t pool_dim = 16;
  /// Decoder hidden = context_dim + latent_dim.
  std::size_t context_dim = 12;
  std::size_t discriminator_embed = 8;
  std::size_t discriminator_hidden = 16;
  double dt = kDefaultPredictionDt;
  std::size_t observed_steps = kDefaultObservedSteps;
  std::size_t horizon = kDefaultHorizon;

  std::size_t decoder_hidden() const { return context_dim + latent_dim; }
  bool operator==(const SganHyperparameters&) const = default;
};

/// Row-major dense tensor.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  std::size_t size() const;
};

struct TensorSpec {
  std::string name;
  std::vector<std::size_t> shape;
};

struct GenerativeModelWeights {
  SganHyperparameters hyper;
  std::map<std::string, Tensor> tensors;

  bool has_discriminator() const;
  const Tensor& at(const std::string& name) const;
};

/// Generator tensors, then discriminator tensors when requested, in manifest order.
std::vector<TensorSpec> expected_tensors(const SganHyperparameters& hyper,
                                         bool include_discriminator);

/// Throws MissingTensorError / ShapeMismatchError / ValidationError.
void validate_weights(const GenerativeModelWeights& weights, bool require_discriminator = false);

/// uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for every tensor.
GenerativeModelWeights init_weights(const SganHyperparameters& hyper, std::uint64_t seed,
                                    bool with_discriminator = true);

/// Reads manifest.json and the binary it names. Every tensor is validated
/// before returning.
GenerativeModelWeights load_weights(const std::filesystem::path& manifest_path);

/// Writes manifest.json and weights.bin (little-endian f32) into `directory`.
void save_weights(const GenerativeModelWeights& weights, const std::filesystem::path& directory);

/// Affine layer y = W x + b, applied column-wise.
struct Linear {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;

  Eigen::MatrixXd operator()(const Eigen::MatrixXd& x) const;
};

/// GRU cell with gate order (reset, update, new).
struct GruCell {
  Eigen::MatrixXd weight_ih;
  Eigen::MatrixXd weight_hh;
  Eigen::VectorXd bias_ih;
  Eigen::VectorXd bias_hh;

  Eigen::Index hidden() const { return weight_hh.cols(); }
  /// One step for a batch of columns.
  Eigen::MatrixXd step(const Eigen::MatrixXd& x, const Eigen::MatrixXd& h) const;
};

/// Encoder, pooling and decoder unpacked from a weight collection. Immutable
/// after construction and safe to share across threads.
class SganNetwork {
 public:
  explicit SganNetwork(const GenerativeModelWeights& weights);

  const SganHyperparameters& hyper() const { return hyper_; }

  /// Encoder hidden state per agent (columns) from its displacement sequence.
  Eigen::MatrixXd encode(std::span<const Trajectory> histories) const;

  /// Max over j != i of MLP([p_j - p_i; h_j]); zero column when n = 1.
  Eigen::MatrixXd pool(const Eigen::MatrixXd& hidden, std::span<const Vec2> positions) const;

  /// Decodes `horizon` displacements per agent and accumulates them onto the
  /// last observed position.
  std::vector<Trajectory> decode(std::span<const Trajectory> histories,
                                 const Eigen::MatrixXd& hidden, const Eigen::MatrixXd& pooled,
                                 const Eigen::VectorXd& z, std::size_t horizon) const;

  /// One joint sample for a fixed latent vector.
  std::vector<Trajectory> sample(std::span<const Trajectory> histories, const Eigen::VectorXd& z,
                                 std::size_t horizon) const;

 private:
  SganHyperparameters hyper_;
  Linear encoder_embed_;
  GruCell encoder_gru_;
  Linear pool_mlp1_;
  Linear pool_mlp2_;
  Linear decoder_context_;
  Linear decoder_embed_;
  GruCell decoder_gru_;
  Linear decoder_out_;
};

/// Pooled vectors for the given encoder hidden states and positions.
std::vector<Eigen::VectorXd> pool(std::span<const Eigen::VectorXd> hidden_states,
                                  std::span<const Vec2> positions,
                                  const GenerativeModelWeights& weights);

/// k samples, each with its own latent draw from the request seed.
PredictionSet predict_sgan(const PredictionRequest& request, const SganNetwork& network);
PredictionSet predict_sgan(const PredictionRequest& request, const GenerativeModelWeights& weights);

/// One sample per supplied latent vector.
PredictionSet predict_sgan_with_latents(const PredictionRequest& request,
                                        const SganNetwork& network,
                                        std::span<const Eigen::VectorXd> latents);

class SganPredictor final : public Predictor {
 public:
  SganPredictor(std::shared_ptr<const SganNetwork> network, std::size_t samples);

  std::string id() const override;
  PredictionSet predict(const PredictionRequest& request) const override;
  std::size_t num_samples() const override { return samples_; }
  bool joint_with_ego() const override { return true; }

 private:
  std::shared_ptr<const SganNetwork> network_;
  std::size_t samples_;
};

/// Row-major tensor view as an Eigen matrix (vectors become one column).
Eigen::MatrixXd to_matrix(const Tensor& tensor);
Tensor from_matrix(const Eigen::MatrixXd& matrix, bool as_vector);

}  // namespace crowdnav::predict
