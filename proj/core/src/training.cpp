#include "crowdnav/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "crowdnav/error.hpp"
#include "crowdnav/random.hpp"
#include "crowdnav/sim.hpp"

namespace crowdnav::train {

using predict::GenerativeModelWeights;
using predict::TrajectorySample;

void TrainSample::validate() const {
  if (observed.size() != future.size() || observed.empty()) {
    throw ValidationError("train sample: observed and future agent counts differ");
  }
  const std::size_t h = observed.front().size();
  const std::size_t t = future.front().size();
  if (h < 2 || t < 1) throw ValidationError("train sample: need h >= 2 and T >= 1");
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (observed[i].size() != h || future[i].size() != t) {
      throw ValidationError("train sample: ragged trajectories");
    }
  }
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || batch_size < 1 || k_variety < 1 || !(adversarial_weight >= 0.0) ||
      !(variety_weight >= 0.0) || !(clip_norm > 0.0)) {
    throw ValidationError("invalid training configuration");
  }
}

ParameterSet::ParameterSet(const GenerativeModelWeights& weights) : hyper_(weights.hyper) {
  predict::validate_weights(weights);
  for (const auto& spec : predict::expected_tensors(hyper_, weights.has_discriminator())) {
    Parameter p;
    p.name = spec.name;
    p.value = predict::to_matrix(weights.at(spec.name));
    p.zero_grad();
    order_.push_back(spec.name);
    params_.emplace(spec.name, std::move(p));
  }
}

Parameter& ParameterSet::operator[](const std::string& name) {
  const auto it = params_.find(name);
  if (it == params_.end()) throw MissingTensorError(name);
  return it->second;
}

const Parameter& ParameterSet::operator[](const std::string& name) const {
  const auto it = params_.find(name);
  if (it == params_.end()) throw MissingTensorError(name);
  return it->second;
}

std::vector<Parameter*> ParameterSet::group(const std::string& prefix) {
  std::vector<Parameter*> out;
  for (const auto& name : order_) {
    if (name.rfind(prefix, 0) == 0) out.push_back(&params_.at(name));
  }
  return out;
}

std::vector<Parameter*> ParameterSet::all() { return group(""); }

void ParameterSet::zero_grad() {
  for (auto& [name, p] : params_) p.zero_grad();
}

GenerativeModelWeights ParameterSet::to_weights() const {
  GenerativeModelWeights w;
  w.hyper = hyper_;
  for (const auto& spec : predict::expected_tensors(hyper_, params_.contains("discriminator.out.weight"))) {
    w.tensors.emplace(spec.name, predict::from_matrix(params_.at(spec.name).value, spec.shape.size() == 1));
  }
  return w;
}

namespace {

/// Parameter handles bound once per tape.
class Binder {
 public:
  Binder(Tape& tape, ParameterSet& params) : tape_(tape), params_(params) {}

  Var operator()(const std::string& name) {
    const auto it = cache_.find(name);
    if (it != cache_.end()) return it->second;
    const Var v = tape_.parameter(params_[name]);
    cache_.emplace(name, v);
    return v;
  }

  Var linear(const std::string& prefix, Var x) {
    return tape_.add(tape_.matmul((*this)(prefix + ".weight"), x), (*this)(prefix + ".bias"));
  }

  Var gru(const std::string& prefix, Var x, Var h) {
    Tape& t = tape_;
    const Eigen::Index H = t.value(h).rows();
    const Var gi = t.add(t.matmul((*this)(prefix + ".weight_ih"), x), (*this)(prefix + ".bias_ih"));
    const Var gh = t.add(t.matmul((*this)(prefix + ".weight_hh"), h), (*this)(prefix + ".bias_hh"));
    const Var r = t.sigmoid(t.add(t.rows(gi, 0, H), t.rows(gh, 0, H)));
    const Var u = t.sigmoid(t.add(t.rows(gi, H, H), t.rows(gh, H, H)));
    const Var n = t.tanh(t.add(t.rows(gi, 2 * H, H), t.mul(r, t.rows(gh, 2 * H, H))));
    return t.add(t.mul(t.add_scalar(t.scale(u, -1.0), 1.0), n), t.mul(u, h));
  }

 private:
  Tape& tape_;
  ParameterSet& params_;
  std::map<std::string, Var> cache_;
};

Matrix displacement_matrix(std::span<const Trajectory> tracks, std::size_t step) {
  Matrix d(2, static_cast<Eigen::Index>(tracks.size()));
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    const Vec2 v = tracks[i][step] - tracks[i][step - 1];
    d(0, static_cast<Eigen::Index>(i)) = v.x;
    d(1, static_cast<Eigen::Index>(i)) = v.y;
  }
  return d;
}

/// Full real trajectory (observed then future) per agent.
std::vector<Trajectory> real_tracks(const TrainSample& s) {
  std::vector<Trajectory> out;
  for (std::size_t i = 0; i < s.num_agents(); ++i) {
    Trajectory t = s.observed[i];
    t.insert(t.end(), s.future[i].begin(), s.future[i].end());
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<Eigen::Index> sample_columns(std::size_t sample, std::size_t n) {
  std::vector<Eigen::Index> cols(n);
  for (std::size_t i = 0; i < n; ++i) cols[i] = static_cast<Eigen::Index>(sample * n + i);
  return cols;
}

GeneratorOutput generator_forward_batched(Tape& tape, ParameterSet& params,
                                          std::span<const Trajectory> observed,
                                          std::span<const Eigen::VectorXd> latents,
                                          std::size_t horizon) {
  const predict::SganHyperparameters& hp = params.hyper();
  Binder bind(tape, params);
  const std::size_t n = observed.size();
  const std::size_t k = latents.size();
  const std::size_t h = observed.front().size();
  const auto ni = static_cast<Eigen::Index>(n);

  Var hidden = tape.constant(Matrix::Zero(static_cast<Eigen::Index>(hp.encoder_hidden), ni));
  for (std::size_t step = 1; step < h; ++step) {
    const Var d = tape.constant(displacement_matrix(observed, step));
    hidden = bind.gru("encoder.gru", bind.linear("encoder.embed", d), hidden);
  }

  Var pooled;
  if (n < 2) {
    pooled = tape.constant(Matrix::Zero(static_cast<Eigen::Index>(hp.pool_dim), ni));
  } else {
    std::vector<Eigen::Index> sources;
    std::vector<std::vector<Eigen::Index>> groups(n);
    Matrix rel(2, ni * (ni - 1));
    Eigen::Index c = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const Vec2 r = observed[j].back() - observed[i].back();
        rel(0, c) = r.x;
        rel(1, c) = r.y;
        sources.push_back(static_cast<Eigen::Index>(j));
        groups[i].push_back(c);
        ++c;
      }
    }
    const Var input = tape.concat_rows(tape.constant(std::move(rel)),
                                       tape.gather_cols(hidden, std::move(sources)));
    const Var l1 = tape.relu(bind.linear("pool.mlp1", input));
    const Var l2 = tape.relu(bind.linear("pool.mlp2", l1));
    pooled = tape.group_max(l2, std::move(groups));
  }

  const Var context =
      tape.relu(bind.linear("decoder.context", tape.concat_rows(hidden, pooled)));

  // Replicate per-agent quantities across samples: column s * n + i.
  std::vector<Eigen::Index> replicate;
  for (std::size_t s = 0; s < k; ++s) {
    for (std::size_t i = 0; i < n; ++i) replicate.push_back(static_cast<Eigen::Index>(i));
  }
  const auto cols = static_cast<Eigen::Index>(n * k);
  Matrix z(static_cast<Eigen::Index>(hp.latent_dim), cols);
  for (std::size_t s = 0; s < k; ++s) {
    if (latents[s].size() != static_cast<Eigen::Index>(hp.latent_dim)) {
      throw ValidationError("latent vector has wrong dimension");
    }
    for (std::size_t i = 0; i < n; ++i) z.col(static_cast<Eigen::Index>(s * n + i)) = latents[s];
  }
  Var dec_h = tape.concat_rows(tape.gather_cols(context, replicate), tape.constant(std::move(z)));

  Matrix last_d(2, cols);
  Matrix last_p(2, cols);
  const Matrix d_obs = displacement_matrix(observed, h - 1);
  for (Eigen::Index c2 = 0; c2 < cols; ++c2) {
    const auto i = static_cast<std::size_t>(replicate[static_cast<std::size_t>(c2)]);
    last_d.col(c2) = d_obs.col(static_cast<Eigen::Index>(i));
    last_p(0, c2) = observed[i].back().x;
    last_p(1, c2) = observed[i].back().y;
  }
  Var d = tape.constant(std::move(last_d));
  Var p = tape.constant(std::move(last_p));

  GeneratorOutput out;
  for (std::size_t t = 0; t < horizon; ++t) {
    dec_h = bind.gru("decoder.gru", bind.linear("decoder.embed", d), dec_h);
    d = bind.linear("decoder.out", dec_h);
    p = tape.add(p, d);
    out.displacements.push_back(d);
    out.positions.push_back(p);
  }
  return out;
}

double squared_error(const Tape& tape, const GeneratorOutput& g, std::size_t sample,
                     std::span<const Trajectory> truth) {
  const std::size_t n = truth.size();
  double sum = 0.0;
  for (std::size_t t = 0; t < g.positions.size(); ++t) {
    const Matrix& p = tape.value(g.positions[t]);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<Eigen::Index>(sample * n + i);
      const double dx = p(0, c) - truth[i][t].x;
      const double dy = p(1, c) - truth[i][t].y;
      sum += dx * dx + dy * dy;
    }
  }
  return sum;
}

Matrix future_matrix(std::span<const Trajectory> truth, std::size_t t) {
  Matrix m(2, static_cast<Eigen::Index>(truth.size()));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    m(0, static_cast<Eigen::Index>(i)) = truth[i][t].x;
    m(1, static_cast<Eigen::Index>(i)) = truth[i][t].y;
  }
  return m;
}

std::vector<Var> observed_displacements(Tape& tape, std::span<const Trajectory> observed) {
  std::vector<Var> out;
  for (std::size_t s = 1; s < observed.front().size(); ++s) {
    out.push_back(tape.constant(displacement_matrix(observed, s)));
  }
  return out;
}

std::vector<Var> real_displacements(Tape& tape, const TrainSample& sample) {
  const auto tracks = real_tracks(sample);
  std::vector<Var> out;
  for (std::size_t s = 1; s < tracks.front().size(); ++s) {
    out.push_back(tape.constant(displacement_matrix(tracks, s)));
  }
  return out;
}

Var mean_over_columns(Tape& tape, Var total, double count) { return tape.scale(total, 1.0 / count); }

}  // namespace

GeneratorOutput generator_forward(Tape& tape, ParameterSet& params,
                                  std::span<const Trajectory> observed, const Eigen::VectorXd& z,
                                  std::size_t horizon) {
  const Eigen::VectorXd latents[] = {z};
  return generator_forward_batched(tape, params, observed, latents, horizon);
}

Var discriminator_logits(Tape& tape, ParameterSet& params, std::span<const Var> displacements) {
  Binder bind(tape, params);
  const Eigen::Index m = tape.value(displacements.front()).cols();
  Var h = tape.constant(
      Matrix::Zero(static_cast<Eigen::Index>(params.hyper().discriminator_hidden), m));
  for (const Var d : displacements) {
    h = bind.gru("discriminator.gru", bind.linear("discriminator.embed", d), h);
  }
  return bind.linear("discriminator.out", h);
}

double variety_loss(std::span<const Trajectory> ground_truth,
                    std::span<const TrajectorySample> samples) {
  if (samples.empty()) throw ValidationError("variety loss needs at least one sample");
  double best = std::numeric_limits<double>::infinity();
  for (const TrajectorySample& s : samples) {
    if (s.futures.size() != ground_truth.size()) {
      throw ValidationError("variety loss: agent count mismatch");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < ground_truth.size(); ++i) {
      if (s.futures[i].size() != ground_truth[i].size()) {
        throw ValidationError("variety loss: horizon mismatch");
      }
      for (std::size_t t = 0; t < ground_truth[i].size(); ++t) {
        sum += (s.futures[i][t] - ground_truth[i][t]).squared_norm();
      }
    }
    best = std::min(best, std::sqrt(sum));
  }
  return best;
}

Var record_discriminator_loss(Tape& tape, ParameterSet& params, std::span<const TrainSample> batch,
                              std::span<const Eigen::VectorXd> latents) {
  if (latents.size() != batch.size()) throw ValidationError("one latent per scene expected");
  double count = 0.0;
  for (const TrainSample& s : batch) count += static_cast<double>(s.num_agents());
  Var total = tape.constant(Matrix::Zero(1, 1));
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const TrainSample& sample = batch[b];
    sample.validate();
    const std::size_t horizon = sample.future.front().size();

    const auto real = real_displacements(tape, sample);
    const Var real_logits = discriminator_logits(tape, params, real);
    total = tape.add(total, tape.sum(tape.softplus(tape.scale(real_logits, -1.0))));

    // Fake trajectories are generated on a scratch tape and enter as constants.
    Tape scratch;
    const GeneratorOutput g =
        generator_forward(scratch, params, sample.observed, latents[b], horizon);
    auto fake = observed_displacements(tape, sample.observed);
    for (const Var d : g.displacements) fake.push_back(tape.constant(scratch.value(d)));
    const Var fake_logits = discriminator_logits(tape, params, fake);
    total = tape.add(total, tape.sum(tape.softplus(fake_logits)));
  }
  return mean_over_columns(tape, total, count);
}

Var record_generator_loss(Tape& tape, ParameterSet& params, std::span<const TrainSample> batch,
                          std::span<const Eigen::VectorXd> latents, std::size_t k_variety,
                          double adversarial_weight, double variety_weight,
                          double* adversarial_out, double* variety_out) {
  if (latents.size() != batch.size() * k_variety) {
    throw ValidationError("k_variety latents per scene expected");
  }
  double count = 0.0;
  for (const TrainSample& s : batch) count += static_cast<double>(s.num_agents());
  Var adversarial = tape.constant(Matrix::Zero(1, 1));
  Var variety = tape.constant(Matrix::Zero(1, 1));
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const TrainSample& sample = batch[b];
    sample.validate();
    const std::size_t n = sample.num_agents();
    const std::size_t horizon = sample.future.front().size();
    const GeneratorOutput g = generator_forward_batched(
        tape, params, sample.observed, latents.subspan(b * k_variety, k_variety), horizon);

    // Non-saturating adversarial term on the first sample.
    auto fake = observed_displacements(tape, sample.observed);
    const auto first = sample_columns(0, n);
    for (const Var d : g.displacements) fake.push_back(tape.gather_cols(d, first));
    const Var logits = discriminator_logits(tape, params, fake);
    adversarial = tape.add(adversarial, tape.sum(tape.softplus(tape.scale(logits, -1.0))));

    // Best-of-k L2 norm; only the best sample receives gradient.
    std::size_t best = 0;
    double best_err = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < k_variety; ++s) {
      const double e = squared_error(tape, g, s, sample.future);
      if (e < best_err) {
        best_err = e;
        best = s;
      }
    }
    const auto cols = sample_columns(best, n);
    Var sq = tape.constant(Matrix::Zero(1, 1));
    for (std::size_t t = 0; t < horizon; ++t) {
      const Var diff = tape.sub(tape.gather_cols(g.positions[t], cols),
                                tape.constant(future_matrix(sample.future, t)));
      sq = tape.add(sq, tape.sum(tape.square(diff)));
    }
    variety = tape.add(variety, tape.sqrt(sq));
  }
  const Var adv_mean = mean_over_columns(tape, adversarial, count);
  const Var var_mean = tape.scale(variety, 1.0 / static_cast<double>(batch.size()));
  if (adversarial_out) *adversarial_out = tape.scalar(adv_mean);
  if (variety_out) *variety_out = tape.scalar(var_mean);
  return tape.add(tape.scale(adv_mean, adversarial_weight), tape.scale(var_mean, variety_weight));
}

GanLosses gan_losses(std::span<const TrainSample> batch, ParameterSet& params,
                     std::span<const Eigen::VectorXd> latents) {
  GanLosses out;
  Tape tape_d;
  out.loss_d = tape_d.scalar(record_discriminator_loss(tape_d, params, batch, latents));
  Tape tape_g;
  record_generator_loss(tape_g, params, batch, latents, 1, 1.0, 0.0, &out.loss_g, nullptr);
  return out;
}

void sgd_step(std::span<Parameter* const> params, double learning_rate, double clip_norm) {
  double norm_sq = 0.0;
  for (const Parameter* p : params) norm_sq += p->grad.squaredNorm();
  const double norm = std::sqrt(norm_sq);
  const double factor = norm > clip_norm ? clip_norm / norm : 1.0;
  for (Parameter* p : params) p->value -= (learning_rate * factor) * p->grad;
}

namespace {

std::vector<Eigen::VectorXd> draw_latents(Rng& rng, std::size_t count, std::size_t dim) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Eigen::VectorXd z(static_cast<Eigen::Index>(dim));
    for (Eigen::Index j = 0; j < z.size(); ++j) z(j) = rng.normal();
    out.push_back(std::move(z));
  }
  return out;
}

void check_finite(double v, const char* what, std::size_t epoch, std::size_t batch) {
  if (!std::isfinite(v)) {
    throw TrainingDivergenceError(fmt::format("non-finite {} at epoch {}, batch {}", what, epoch, batch),
                                  epoch, batch);
  }
}

}  // namespace

TrainResult train_toy(std::span<const TrainSample> dataset, const TrainConfig& config) {
  config.validate();
  if (dataset.empty()) throw ValidationError("training dataset is empty");
  for (const TrainSample& s : dataset) s.validate();

  ParameterSet params(predict::init_weights(config.hyper, config.seed, true));
  Rng rng(Rng::mix(config.seed ^ 0x5A17ULL));
  const std::size_t dz = config.hyper.latent_dim;
  const std::size_t k = config.k_variety;

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto batch_of = [&](std::size_t start) {
    std::vector<TrainSample> batch;
    for (std::size_t i = start; i < std::min(start + config.batch_size, order.size()); ++i) {
      batch.push_back(dataset[order[i]]);
    }
    return batch;
  };

  TrainResult result;
  {
    EpochLosses row;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batches) {
      const auto batch = batch_of(start);
      Tape td;
      row.loss_d += td.scalar(record_discriminator_loss(td, params, batch,
                                                        draw_latents(rng, batch.size(), dz)));
      Tape tg;
      double adv = 0.0;
      double var = 0.0;
      record_generator_loss(tg, params, batch, draw_latents(rng, batch.size() * k, dz), k,
                            config.adversarial_weight, config.variety_weight, &adv, &var);
      row.loss_g += adv;
      row.variety += var;
    }
    row.loss_d /= static_cast<double>(batches);
    row.loss_g /= static_cast<double>(batches);
    row.variety /= static_cast<double>(batches);
    check_finite(row.loss_d + row.loss_g + row.variety, "initial loss", 0, 0);
    result.trace.push_back(row);
  }

  const auto d_params = params.group("discriminator.");
  std::vector<Parameter*> g_params;
  for (Parameter* p : params.all()) {
    if (p->name.rfind("discriminator.", 0) != 0) g_params.push_back(p);
  }

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
      std::swap(order[i - 1], order[std::min(j, i - 1)]);
    }
    EpochLosses row;
    row.epoch = epoch;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batches) {
      const auto batch = batch_of(start);

      params.zero_grad();
      Tape td;
      const Var loss_d =
          record_discriminator_loss(td, params, batch, draw_latents(rng, batch.size(), dz));
      check_finite(td.scalar(loss_d), "discriminator loss", epoch, batches);
      td.backward(loss_d);
      sgd_step(d_params, config.learning_rate, config.clip_norm);
      row.loss_d += td.scalar(loss_d);

      params.zero_grad();
      Tape tg;
      double adv = 0.0;
      double var = 0.0;
      const Var loss_g =
          record_generator_loss(tg, params, batch, draw_latents(rng, batch.size() * k, dz), k,
                                config.adversarial_weight, config.variety_weight, &adv, &var);
      check_finite(tg.scalar(loss_g), "generator loss", epoch, batches);
      tg.backward(loss_g);
      sgd_step(g_params, config.learning_rate, config.clip_norm);
      row.loss_g += adv;
      row.variety += var;
    }
    row.loss_d /= static_cast<double>(batches);
    row.loss_g /= static_cast<double>(batches);
    row.variety /= static_cast<double>(batches);
    result.trace.push_back(row);
  }
  params.zero_grad();
  result.weights = params.to_weights();
  return result;
}

std::size_t window_count(std::size_t length, std::size_t observed, std::size_t horizon,
                         std::size_t stride) {
  const std::size_t span = observed + horizon;
  if (stride == 0 || length < span) return 0;
  return (length - span) / stride + 1;
}

namespace {

Vec2 random_point(Rng& rng, const sim::Workspace& ws, double margin) {
  return {rng.uniform(ws.min.x + margin, ws.max.x - margin),
          rng.uniform(ws.min.y + margin, ws.max.y - margin)};
}

// Rejection-sample points at least `separation` apart.
std::vector<Vec2> spread_points(Rng& rng, const sim::Workspace& ws, std::size_t count,
                                double separation) {
  std::vector<Vec2> out;
  for (int attempt = 0; out.size() < count && attempt < 10000; ++attempt) {
    const Vec2 p = random_point(rng, ws, 0.3);
    bool ok = true;
    for (const Vec2& q : out) ok = ok && distance(p, q) >= separation;
    if (ok) out.push_back(p);
  }
  while (out.size() < count) out.push_back(random_point(rng, ws, 0.3));
  return out;
}

}  // namespace

std::vector<TrainSample> gen_synthetic_dataset(std::size_t num_scenes,
                                               const SyntheticConfig& config) {
  std::vector<TrainSample> out;
  if (num_scenes == 0) return out;
  if (config.min_agents < 1 || config.max_agents < config.min_agents || config.stride < 1) {
    throw ValidationError("invalid synthetic dataset configuration");
  }
  const auto ratio = static_cast<std::size_t>(std::llround(config.prediction_dt / config.sim_dt));
  if (ratio < 1) throw ValidationError("prediction dt must be a multiple of the simulation dt");
  Rng rng(config.seed);

  for (std::size_t scene_index = 0; scene_index < num_scenes; ++scene_index) {
    const std::size_t span = config.max_agents - config.min_agents + 1;
    const std::size_t n = config.min_agents + static_cast<std::size_t>(rng.uniform() * static_cast<double>(span));
    sim::Scenario scenario;
    scenario.id = "synthetic";
    scenario.max_duration = config.max_duration;
    const auto starts = spread_points(rng, scenario.workspace, n, 0.8);
    std::vector<Vec2> goals;
    for (std::size_t i = 0; i < n; ++i) {
      Vec2 g = random_point(rng, scenario.workspace, 0.3);
      for (int attempt = 0; attempt < 100 && distance(g, starts[i]) < 2.0; ++attempt) {
        g = random_point(rng, scenario.workspace, 0.3);
      }
      goals.push_back(g);
    }
    // Agent 0 plays the robot and is driven by ORCA as well.
    scenario.robot_start = starts[0];
    scenario.robot_goal = goals[0];
    scenario.robot_preferred_speed = rng.uniform(0.6, 1.0);
    for (std::size_t i = 1; i < n; ++i) {
      scenario.agents.push_back(
          sim::AgentSpec{starts[i], goals[i], sim::Behavior::Orca, rng.uniform(0.6, 1.0), 0.0});
    }
    sim::SimConfig sim_config;
    sim_config.dt = config.sim_dt;
    auto world = sim::initial_world(scenario, sim_config);

    std::vector<Trajectory> tracks(n);
    auto record = [&](const sim::WorldState& w) {
      tracks[0].push_back(w.robot.position);
      for (std::size_t i = 1; i < n; ++i) tracks[i].push_back(w.humans[i - 1].position);
    };
    record(world);
    const auto max_steps = static_cast<std::int64_t>(std::llround(config.max_duration / config.sim_dt));
    const sim::OrcaParams robot_orca = sim_config.orca_params(scenario.robot_preferred_speed);
    for (std::int64_t step = 0; step < max_steps; ++step) {
      // Arrived agents pick a fresh goal so every scene runs for the full duration.
      auto retarget = [&](Vec2 position, Vec2& goal) {
        if (distance(position, goal) > scenario.goal_tolerance) return;
        Vec2 g = random_point(rng, scenario.workspace, 0.3);
        for (int attempt = 0; attempt < 100 && distance(g, position) < 2.0; ++attempt) {
          g = random_point(rng, scenario.workspace, 0.3);
        }
        goal = g;
      };
      retarget(world.robot.position, scenario.robot_goal);
      for (std::size_t i = 0; i + 1 < n; ++i) retarget(world.humans[i].position, scenario.agents[i].goal);
      const Vec2 to_goal = scenario.robot_goal - world.robot.position;
      const Vec2 preferred =
          to_goal.norm() <= scenario.goal_tolerance
              ? Vec2{}
              : normalized(to_goal) * std::min(scenario.robot_preferred_speed, to_goal.norm() / config.sim_dt);
      const Vec2 command = sim::orca_velocity(world.robot, world.humans, preferred, robot_orca);
      world = sim::step_world(world, command, scenario, sim_config);
      record(world);
    }

    std::vector<Trajectory> sampled(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t s = 0; s < tracks[i].size(); s += ratio) sampled[i].push_back(tracks[i][s]);
    }
    const std::size_t windows =
        window_count(sampled[0].size(), config.observed_steps, config.horizon, config.stride);
    for (std::size_t w = 0; w < windows; ++w) {
      const std::size_t begin = w * config.stride;
      TrainSample sample;
      for (std::size_t i = 0; i < n; ++i) {
        const auto first = sampled[i].begin() + static_cast<std::ptrdiff_t>(begin);
        const auto split = first + static_cast<std::ptrdiff_t>(config.observed_steps);
        sample.observed.emplace_back(first, split);
        sample.future.emplace_back(split, split + static_cast<std::ptrdiff_t>(config.horizon));
      }
      out.push_back(std::move(sample));
    }
  }
  return out;
}

std::vector<TrainSample> straight_line_dataset(std::size_t num_samples, std::uint64_t seed,
                                               std::size_t observed_steps, std::size_t horizon,
                                               double dt) {
  Rng rng(seed);
  std::vector<TrainSample> out;
  const sim::Workspace ws{{0.0, 0.0}, {3.6, 4.5}};
  for (std::size_t s = 0; s < num_samples; ++s) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 3.0);
    TrainSample sample;
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 start = random_point(rng, ws, 0.0);
      const double heading = rng.uniform(-M_PI, M_PI);
      const double speed = rng.uniform(0.4, 1.2);
      const Vec2 v = rotated({speed, 0.0}, heading);
      Trajectory obs(observed_steps);
      Trajectory fut(horizon);
      for (std::size_t m = 0; m < observed_steps + horizon; ++m) {
        const Vec2 p = start + v * (dt * static_cast<double>(m));
        if (m < observed_steps) {
          obs[m] = p;
        } else {
          fut[m - observed_steps] = p;
        }
      }
      sample.observed.push_back(std::move(obs));
      sample.future.push_back(std::move(fut));
    }
    out.push_back(std::move(sample));
  }
  return out;
}

void write_loss_trace(const std::vector<EpochLosses>& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "epoch,loss_d,loss_g,variety\n";
  for (const EpochLosses& row : trace) {
    out << fmt::format("{},{:.6f},{:.6f},{:.6f}\n", row.epoch, row.loss_d, row.loss_g, row.variety);
  }
}

}  // namespace crowdnav::train
