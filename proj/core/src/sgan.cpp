#include "crowdnav/sgan.hpp"

#include <algorithm>
#include <cmath>

#include "crowdnav/error.hpp"
#include "crowdnav/random.hpp"

namespace crowdnav::predict {
namespace {

void add_linear(std::vector<TensorSpec>& out, const std::string& prefix, std::size_t out_dim,
                std::size_t in_dim) {
  out.push_back({prefix + ".weight", {out_dim, in_dim}});
  out.push_back({prefix + ".bias", {out_dim}});
}

void add_gru(std::vector<TensorSpec>& out, const std::string& prefix, std::size_t input,
             std::size_t hidden) {
  out.push_back({prefix + ".weight_ih", {3 * hidden, input}});
  out.push_back({prefix + ".weight_hh", {3 * hidden, hidden}});
  out.push_back({prefix + ".bias_ih", {3 * hidden}});
  out.push_back({prefix + ".bias_hh", {3 * hidden}});
}

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Linear linear_from(const GenerativeModelWeights& w, const std::string& prefix) {
  return Linear{to_matrix(w.at(prefix + ".weight")), to_matrix(w.at(prefix + ".bias"))};
}

GruCell gru_from(const GenerativeModelWeights& w, const std::string& prefix) {
  return GruCell{to_matrix(w.at(prefix + ".weight_ih")), to_matrix(w.at(prefix + ".weight_hh")),
                 to_matrix(w.at(prefix + ".bias_ih")), to_matrix(w.at(prefix + ".bias_hh"))};
}

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& x) {
  return (1.0 / (1.0 + (-x.array()).exp())).matrix();
}

Eigen::MatrixXd relu(const Eigen::MatrixXd& x) { return x.cwiseMax(0.0); }

Eigen::MatrixXd displacement_column(const Trajectory& h, std::size_t step) {
  Eigen::MatrixXd d(2, 1);
  const Vec2 v = h[step] - h[step - 1];
  d << v.x, v.y;
  return d;
}

}  // namespace

std::size_t Tensor::size() const {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

bool GenerativeModelWeights::has_discriminator() const {
  return tensors.count("discriminator.out.weight") > 0;
}

const Tensor& GenerativeModelWeights::at(const std::string& name) const {
  const auto it = tensors.find(name);
  if (it == tensors.end()) throw MissingTensorError(name);
  return it->second;
}

std::vector<TensorSpec> expected_tensors(const SganHyperparameters& hp,
                                         bool include_discriminator) {
  std::vector<TensorSpec> out;
  add_linear(out, "encoder.embed", hp.embed_dim, 2);
  add_gru(out, "encoder.gru", hp.embed_dim, hp.encoder_hidden);
  add_linear(out, "pool.mlp1", hp.pool_hidden, 2 + hp.encoder_hidden);
  add_linear(out, "pool.mlp2", hp.pool_dim, hp.pool_hidden);
  add_linear(out, "decoder.context", hp.context_dim, hp.encoder_hidden + hp.pool_dim);
  add_linear(out, "decoder.embed", hp.embed_dim, 2);
  add_gru(out, "decoder.gru", hp.embed_dim, hp.decoder_hidden());
  add_linear(out, "decoder.out", 2, hp.decoder_hidden());
  if (include_discriminator) {
    add_linear(out, "discriminator.embed", hp.discriminator_embed, 2);
    add_gru(out, "discriminator.gru", hp.discriminator_embed, hp.discriminator_hidden);
    add_linear(out, "discriminator.out", 1, hp.discriminator_hidden);
  }
  return out;
}

void validate_weights(const GenerativeModelWeights& weights, bool require_discriminator) {
  const SganHyperparameters& hp = weights.hyper;
  if (hp.latent_dim < 1 || hp.embed_dim < 1 || hp.encoder_hidden < 1 || hp.pool_hidden < 1 ||
      hp.pool_dim < 1 || hp.context_dim < 1 || !(hp.dt > 0.0) || hp.observed_steps < 2 ||
      hp.horizon < 1) {
    throw ValidationError("invalid generative model hyperparameters");
  }
  const bool with_disc = require_discriminator || weights.has_discriminator();
  for (const TensorSpec& spec : expected_tensors(hp, with_disc)) {
    const auto it = weights.tensors.find(spec.name);
    if (it == weights.tensors.end()) throw MissingTensorError(spec.name);
    const Tensor& t = it->second;
    if (t.shape != spec.shape) {
      throw ShapeMismatchError(spec.name, "expected " + shape_string(spec.shape) + ", got " +
                                              shape_string(t.shape));
    }
    if (t.data.size() != t.size()) {
      throw ShapeMismatchError(spec.name, "element count does not match shape");
    }
    for (double v : t.data) {
      if (!std::isfinite(v)) throw ValidationError("non-finite entry in tensor '" + spec.name + "'");
    }
  }
}

GenerativeModelWeights init_weights(const SganHyperparameters& hyper, std::uint64_t seed,
                                    bool with_discriminator) {
  GenerativeModelWeights weights;
  weights.hyper = hyper;
  Rng rng(seed);
  const auto specs = expected_tensors(hyper, with_discriminator);
  // Biases share the fan-in of the weight that precedes them.
  std::size_t fan_in = 1;
  for (const TensorSpec& spec : specs) {
    if (spec.shape.size() == 2) fan_in = spec.shape[1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Tensor t;
    t.shape = spec.shape;
    t.data.resize(t.size());
    for (double& v : t.data) v = rng.uniform(-bound, bound);
    weights.tensors.emplace(spec.name, std::move(t));
  }
  return weights;
}

Eigen::MatrixXd to_matrix(const Tensor& tensor) {
  if (tensor.shape.size() == 1) {
    return Eigen::Map<const Eigen::VectorXd>(tensor.data.data(),
                                             static_cast<Eigen::Index>(tensor.shape[0]));
  }
  if (tensor.shape.size() != 2) throw ValidationError("only rank-1 and rank-2 tensors supported");
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  return Eigen::Map<const RowMajor>(tensor.data.data(),
                                    static_cast<Eigen::Index>(tensor.shape[0]),
                                    static_cast<Eigen::Index>(tensor.shape[1]));
}

Tensor from_matrix(const Eigen::MatrixXd& matrix, bool as_vector) {
  Tensor t;
  if (as_vector) {
    t.shape = {static_cast<std::size_t>(matrix.size())};
  } else {
    t.shape = {static_cast<std::size_t>(matrix.rows()), static_cast<std::size_t>(matrix.cols())};
  }
  t.data.reserve(t.size());
  for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
    for (Eigen::Index c = 0; c < matrix.cols(); ++c) t.data.push_back(matrix(r, c));
  }
  return t;
}

Eigen::MatrixXd Linear::operator()(const Eigen::MatrixXd& x) const {
  return (weight * x).colwise() + bias;
}

Eigen::MatrixXd GruCell::step(const Eigen::MatrixXd& x, const Eigen::MatrixXd& h) const {
  const Eigen::Index H = hidden();
  const Eigen::MatrixXd gi = (weight_ih * x).colwise() + bias_ih;
  const Eigen::MatrixXd gh = (weight_hh * h).colwise() + bias_hh;
  const Eigen::MatrixXd r = sigmoid(gi.topRows(H) + gh.topRows(H));
  const Eigen::MatrixXd u = sigmoid(gi.middleRows(H, H) + gh.middleRows(H, H));
  const Eigen::MatrixXd n =
      (gi.bottomRows(H).array() + r.array() * gh.bottomRows(H).array()).tanh().matrix();
  return ((1.0 - u.array()) * n.array() + u.array() * h.array()).matrix();
}

SganNetwork::SganNetwork(const GenerativeModelWeights& weights) : hyper_(weights.hyper) {
  validate_weights(weights);
  encoder_embed_ = linear_from(weights, "encoder.embed");
  encoder_gru_ = gru_from(weights, "encoder.gru");
  pool_mlp1_ = linear_from(weights, "pool.mlp1");
  pool_mlp2_ = linear_from(weights, "pool.mlp2");
  decoder_context_ = linear_from(weights, "decoder.context");
  decoder_embed_ = linear_from(weights, "decoder.embed");
  decoder_gru_ = gru_from(weights, "decoder.gru");
  decoder_out_ = linear_from(weights, "decoder.out");
}

Eigen::MatrixXd SganNetwork::encode(std::span<const Trajectory> histories) const {
  const auto n = static_cast<Eigen::Index>(histories.size());
  const std::size_t length = histories.empty() ? 0 : histories.front().size();
  if (length < 2) throw InsufficientHistoryError("generative model needs at least 2 positions");
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(encoder_gru_.hidden(), n);
  Eigen::MatrixXd d(2, n);
  for (std::size_t step = 1; step < length; ++step) {
    for (Eigen::Index i = 0; i < n; ++i) d.col(i) = displacement_column(histories[i], step);
    h = encoder_gru_.step(encoder_embed_(d), h);
  }
  return h;
}

Eigen::MatrixXd SganNetwork::pool(const Eigen::MatrixXd& hidden,
                                  std::span<const Vec2> positions) const {
  const Eigen::Index n = hidden.cols();
  if (static_cast<std::size_t>(n) != positions.size()) {
    throw ValidationError("pool: hidden state and position counts differ");
  }
  if (hidden.rows() != encoder_gru_.hidden()) {
    throw ShapeMismatchError("pool.mlp1.weight", "hidden size does not match the encoder");
  }
  Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(pool_mlp2_.weight.rows(), n);
  if (n < 2) return pooled;
  Eigen::MatrixXd input(2 + hidden.rows(), n - 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index c = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const Vec2 rel = positions[j] - positions[i];
      input(0, c) = rel.x;
      input(1, c) = rel.y;
      input.col(c).tail(hidden.rows()) = hidden.col(j);
      ++c;
    }
    const Eigen::MatrixXd out = relu(pool_mlp2_(relu(pool_mlp1_(input))));
    pooled.col(i) = out.rowwise().maxCoeff();
  }
  return pooled;
}

std::vector<Trajectory> SganNetwork::decode(std::span<const Trajectory> histories,
                                            const Eigen::MatrixXd& hidden,
                                            const Eigen::MatrixXd& pooled,
                                            const Eigen::VectorXd& z,
                                            std::size_t horizon) const {
  const auto n = static_cast<Eigen::Index>(histories.size());
  if (z.size() != static_cast<Eigen::Index>(hyper_.latent_dim)) {
    throw ValidationError("latent vector has wrong dimension");
  }
  Eigen::MatrixXd features(hidden.rows() + pooled.rows(), n);
  features << hidden, pooled;
  const Eigen::MatrixXd context = relu(decoder_context_(features));
  Eigen::MatrixXd h(context.rows() + z.size(), n);
  h.topRows(context.rows()) = context;
  h.bottomRows(z.size()) = z.replicate(1, n);

  Eigen::MatrixXd d(2, n);
  std::vector<Vec2> position(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const Trajectory& hist = histories[i];
    d.col(i) = displacement_column(hist, hist.size() - 1);
    position[i] = hist.back();
  }

  std::vector<Trajectory> futures(static_cast<std::size_t>(n), Trajectory(horizon));
  for (std::size_t t = 0; t < horizon; ++t) {
    h = decoder_gru_.step(decoder_embed_(d), h);
    d = decoder_out_(h);
    for (Eigen::Index i = 0; i < n; ++i) {
      position[i] += Vec2{d(0, i), d(1, i)};
      futures[i][t] = position[i];
      if (!position[i].finite()) throw ModelDivergenceError("generative model produced non-finite output");
    }
  }
  return futures;
}

std::vector<Trajectory> SganNetwork::sample(std::span<const Trajectory> histories,
                                            const Eigen::VectorXd& z, std::size_t horizon) const {
  const Eigen::MatrixXd hidden = encode(histories);
  std::vector<Vec2> last;
  for (const Trajectory& h : histories) last.push_back(h.back());
  return decode(histories, hidden, pool(hidden, last), z, horizon);
}

std::vector<Eigen::VectorXd> pool(std::span<const Eigen::VectorXd> hidden_states,
                                  std::span<const Vec2> positions,
                                  const GenerativeModelWeights& weights) {
  const SganNetwork network(weights);
  if (hidden_states.empty()) throw ValidationError("pool needs at least one agent");
  Eigen::MatrixXd hidden(hidden_states.front().size(),
                         static_cast<Eigen::Index>(hidden_states.size()));
  for (std::size_t i = 0; i < hidden_states.size(); ++i) {
    if (hidden_states[i].size() != hidden.rows()) {
      throw ShapeMismatchError("pool.mlp1.weight", "inconsistent hidden state sizes");
    }
    hidden.col(static_cast<Eigen::Index>(i)) = hidden_states[i];
  }
  const Eigen::MatrixXd pooled = network.pool(hidden, positions);
  std::vector<Eigen::VectorXd> out;
  for (Eigen::Index i = 0; i < pooled.cols(); ++i) out.emplace_back(pooled.col(i));
  return out;
}

PredictionSet predict_sgan_with_latents(const PredictionRequest& request,
                                        const SganNetwork& network,
                                        std::span<const Eigen::VectorXd> latents) {
  request.validate(2);
  PredictionSet set;
  set.model_id = "sgan";
  set.dt = request.dt;
  set.padded_history = request.padded;
  for (const Trajectory& h : request.histories) set.origins.push_back(h.back());
  if (request.histories.empty()) {
    set.samples.resize(latents.size());
    return set;
  }
  const Eigen::MatrixXd hidden = network.encode(request.histories);
  const Eigen::MatrixXd pooled = network.pool(hidden, set.origins);
  for (const Eigen::VectorXd& z : latents) {
    set.samples.push_back(
        TrajectorySample{network.decode(request.histories, hidden, pooled, z, request.horizon)});
  }
  return set;
}

PredictionSet predict_sgan(const PredictionRequest& request, const SganNetwork& network) {
  Rng rng(request.seed);
  const auto dz = static_cast<Eigen::Index>(network.hyper().latent_dim);
  std::vector<Eigen::VectorXd> latents;
  for (std::size_t k = 0; k < request.num_samples; ++k) {
    Eigen::VectorXd z(dz);
    for (Eigen::Index j = 0; j < dz; ++j) z(j) = rng.normal();
    latents.push_back(std::move(z));
  }
  return predict_sgan_with_latents(request, network, latents);
}

PredictionSet predict_sgan(const PredictionRequest& request,
                           const GenerativeModelWeights& weights) {
  return predict_sgan(request, SganNetwork(weights));
}

SganPredictor::SganPredictor(std::shared_ptr<const SganNetwork> network, std::size_t samples)
    : network_(std::move(network)), samples_(samples) {
  if (!network_) throw ValidationError("generative predictor needs a network");
  if (samples_ < 1) throw ValidationError("generative predictor needs at least one sample");
}

std::string SganPredictor::id() const { return "sgan-" + std::to_string(samples_); }

PredictionSet SganPredictor::predict(const PredictionRequest& request) const {
  PredictionSet set = predict_sgan(request, *network_);
  set.model_id = id();
  return set;
}

}  // namespace crowdnav::predict
