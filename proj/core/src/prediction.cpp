#include "crowdnav/prediction.hpp"

#include <cmath>

#include "crowdnav/error.hpp"
#include "crowdnav/random.hpp"

namespace crowdnav::predict {

void PredictionRequest::validate(std::size_t min_history) const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("prediction dt must be positive");
  if (horizon < 1) throw ValidationError("prediction horizon must be at least 1");
  if (num_samples < 1) throw ValidationError("number of samples must be at least 1");
  const std::size_t length = histories.empty() ? 0 : histories.front().size();
  for (const Trajectory& h : histories) {
    if (h.size() != length) throw ValidationError("histories are not time-aligned");
    for (const Vec2& p : h) {
      if (!p.finite()) throw ValidationError("non-finite history position");
    }
  }
  if (!histories.empty() && length < min_history) {
    throw InsufficientHistoryError("need at least " + std::to_string(min_history) +
                                   " observed positions, got " + std::to_string(length));
  }
}

std::size_t PredictionSet::horizon() const {
  if (samples.empty() || samples.front().futures.empty()) return 0;
  return samples.front().futures.front().size();
}

void PredictionSet::validate() const {
  const std::size_t n = origins.size();
  const std::size_t t = horizon();
  for (const TrajectorySample& s : samples) {
    if (s.futures.size() != n) throw ValidationError("prediction sample agent count mismatch");
    for (const Trajectory& f : s.futures) {
      if (f.size() != t) throw ValidationError("prediction sample horizon mismatch");
      for (const Vec2& p : f) {
        if (!p.finite()) throw ValidationError("non-finite predicted position");
      }
    }
  }
}

namespace {

PredictionSet empty_set(const PredictionRequest& request, const char* model) {
  PredictionSet set;
  set.model_id = model;
  set.dt = request.dt;
  set.padded_history = request.padded;
  set.origins.reserve(request.num_agents());
  for (const Trajectory& h : request.histories) set.origins.push_back(h.back());
  return set;
}

// Last observed displacement per step; extrapolating with it avoids dividing by dt and
// multiplying back.
Vec2 cv_step(const Trajectory& history) {
  return history[history.size() - 1] - history[history.size() - 2];
}

Trajectory extrapolate(Vec2 from, Vec2 step, std::size_t steps) {
  Trajectory out(steps);
  for (std::size_t j = 0; j < steps; ++j) {
    out[j] = from + step * static_cast<double>(j + 1);
  }
  return out;
}

}  // namespace

PredictionSet predict_cv(const PredictionRequest& request) {
  request.validate(2);
  PredictionSet set = empty_set(request, "cv");
  TrajectorySample sample;
  for (const Trajectory& h : request.histories) {
    sample.futures.push_back(extrapolate(h.back(), cv_step(h), request.horizon));
  }
  set.samples.push_back(std::move(sample));
  return set;
}

PredictionSet predict_cvn(const PredictionRequest& request, double sigma_theta) {
  request.validate(2);
  if (!(sigma_theta >= 0.0) || !std::isfinite(sigma_theta)) {
    throw ValidationError("CVN heading noise must be non-negative");
  }
  PredictionSet set = empty_set(request, "cvn");
  Rng rng(request.seed);
  for (std::size_t k = 0; k < request.num_samples; ++k) {
    TrajectorySample sample;
    for (const Trajectory& h : request.histories) {
      const double angle = sigma_theta * rng.normal();
      const Vec2 v = rotated(cv_step(h), angle);
      sample.futures.push_back(extrapolate(h.back(), v, request.horizon));
    }
    set.samples.push_back(std::move(sample));
  }
  return set;
}

PredictionSet predict_const_acc(const PredictionRequest& request) {
  request.validate(3);
  PredictionSet set = empty_set(request, "constacc");
  const double dt = request.dt;
  TrajectorySample sample;
  for (const Trajectory& h : request.histories) {
    const std::size_t m = h.size();
    Vec2 v = (h[m - 1] - h[m - 2]) / dt;
    const Vec2 a = (h[m - 1] - 2.0 * h[m - 2] + h[m - 3]) / (dt * dt);
    Vec2 s = h[m - 1];
    Trajectory future(request.horizon);
    for (std::size_t j = 0; j < request.horizon; ++j) {
      s = s + v * dt + 0.5 * a * dt * dt;
      v = v + a * dt;
      future[j] = s;
    }
    sample.futures.push_back(std::move(future));
  }
  set.samples.push_back(std::move(sample));
  return set;
}

PredictionSet predict_linreg(const PredictionRequest& request) {
  request.validate(2);
  PredictionSet set = empty_set(request, "linreg");
  TrajectorySample sample;
  for (const Trajectory& h : request.histories) {
    // Time measured in steps relative to the first observation.
    const std::size_t m = h.size();
    const double mean_t = 0.5 * static_cast<double>(m - 1);
    Vec2 mean_p;
    for (const Vec2& p : h) mean_p += p;
    mean_p = mean_p / static_cast<double>(m);
    double s_tt = 0.0;
    Vec2 s_tp;
    for (std::size_t i = 0; i < m; ++i) {
      const double dt_i = static_cast<double>(i) - mean_t;
      s_tt += dt_i * dt_i;
      s_tp += (h[i] - mean_p) * dt_i;
    }
    const Vec2 slope = s_tp / s_tt;
    Trajectory future(request.horizon);
    for (std::size_t j = 0; j < request.horizon; ++j) {
      const double t = static_cast<double>(m - 1 + j + 1) - mean_t;
      future[j] = mean_p + slope * t;
    }
    sample.futures.push_back(std::move(future));
  }
  set.samples.push_back(std::move(sample));
  return set;
}

Vec2 interpolate(const Trajectory& polyline, double dt, double t) {
  if (polyline.empty()) return {};
  if (t <= 0.0) return polyline.front();
  const double u = t / dt;
  const auto last = polyline.size() - 1;
  const double floor_u = std::floor(u + 1e-9);
  if (floor_u >= static_cast<double>(last)) return polyline.back();
  const auto i = static_cast<std::size_t>(floor_u);
  const double frac = std::max(0.0, u - floor_u);
  return polyline[i] + (polyline[i + 1] - polyline[i]) * frac;
}

PredictionSet resample_prediction(const PredictionSet& set, double dt_ctrl) {
  if (!(dt_ctrl > 0.0) || dt_ctrl > set.dt + 1e-12) {
    throw ValidationError("controller dt must be positive and not exceed the prediction dt");
  }
  if (set.anchored) throw ValidationError("prediction set is already resampled");
  PredictionSet out = set;
  out.dt = dt_ctrl;
  out.anchored = true;
  const double span = set.dt * static_cast<double>(set.horizon());
  const auto points = static_cast<std::size_t>(std::floor(span / dt_ctrl + 1e-9));
  for (std::size_t k = 0; k < set.samples.size(); ++k) {
    for (std::size_t i = 0; i < set.num_agents(); ++i) {
      Trajectory polyline;
      polyline.reserve(set.horizon() + 1);
      polyline.push_back(set.origins[i]);
      polyline.insert(polyline.end(), set.samples[k].futures[i].begin(),
                      set.samples[k].futures[i].end());
      Trajectory grid(points + 1);
      for (std::size_t m = 0; m <= points; ++m) {
        grid[m] = interpolate(polyline, set.dt, dt_ctrl * static_cast<double>(m));
      }
      out.samples[k].futures[i] = std::move(grid);
    }
  }
  return out;
}

PredictionSet CvPredictor::predict(const PredictionRequest& request) const {
  return predict_cv(request);
}

CvnPredictor::CvnPredictor(std::size_t samples, double sigma_theta)
    : samples_(samples), sigma_(sigma_theta) {
  if (samples_ < 1) throw ValidationError("CVN needs at least one sample");
}

PredictionSet CvnPredictor::predict(const PredictionRequest& request) const {
  return predict_cvn(request, sigma_);
}

PredictionSet ConstAccPredictor::predict(const PredictionRequest& request) const {
  return predict_const_acc(request);
}

PredictionSet LinRegPredictor::predict(const PredictionRequest& request) const {
  return predict_linreg(request);
}

}  // namespace crowdnav::predict
