#include "crowdnav/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "crowdnav/error.hpp"

namespace crowdnav::metrics {

DisplacementErrors displacement_errors(std::span<const Trajectory> ground_truth,
                                       const predict::PredictionSet& predictions,
                                       Reduction reduction, std::size_t first_agent) {
  if (predictions.samples.empty()) throw ValidationError("no prediction samples");
  const std::size_t n = ground_truth.size();
  for (const auto& s : predictions.samples) {
    if (s.futures.size() != n + first_agent) {
      throw ValidationError("prediction and ground truth agent counts differ");
    }
  }
  const std::size_t offset = predictions.anchored ? 1 : 0;
  std::size_t horizon = n == 0 ? 0 : std::numeric_limits<std::size_t>::max();
  for (const Trajectory& gt : ground_truth) horizon = std::min(horizon, gt.size());
  for (const auto& s : predictions.samples) {
    for (const Trajectory& f : s.futures) horizon = std::min(horizon, f.size() - offset);
  }

  DisplacementErrors out;
  out.curve.assign(horizon, 0.0);
  if (n == 0 || horizon == 0) return out;
  const double k = static_cast<double>(predictions.samples.size());
  for (std::size_t i = 0; i < n; ++i) {
    const bool use_min = reduction == Reduction::MinOverSamples;
    double ade = use_min ? std::numeric_limits<double>::infinity() : 0.0;
    double fde = ade;
    std::vector<double> step(horizon, ade);
    for (const auto& s : predictions.samples) {
      const Trajectory& f = s.futures[i + first_agent];
      double sum = 0.0;
      for (std::size_t t = 0; t < horizon; ++t) {
        const double e = distance(f[t + offset], ground_truth[i][t]);
        sum += e;
        step[t] = use_min ? std::min(step[t], e) : step[t] + e / k;
      }
      const double a = sum / static_cast<double>(horizon);
      const double last = distance(f[horizon - 1 + offset], ground_truth[i][horizon - 1]);
      ade = use_min ? std::min(ade, a) : ade + a / k;
      fde = use_min ? std::min(fde, last) : fde + last / k;
    }
    out.agent_ade.push_back(ade);
    out.agent_fde.push_back(fde);
    for (std::size_t t = 0; t < horizon; ++t) out.curve[t] += step[t];
  }
  for (double& c : out.curve) c /= static_cast<double>(n);
  out.ade = std::accumulate(out.agent_ade.begin(), out.agent_ade.end(), 0.0) / static_cast<double>(n);
  out.fde = std::accumulate(out.agent_fde.begin(), out.agent_fde.end(), 0.0) / static_cast<double>(n);
  return out;
}

TrialMetrics trial_metrics(const trial::TrialLog& log, double robot_radius, double human_radius) {
  TrialMetrics m;
  m.status = log.status;
  m.time_to_goal = log.time_to_goal;
  for (const trial::Snapshot& s : log.snapshots) {
    for (const sim::AgentState& h : s.humans) {
      m.safety = std::min(m.safety, distance(s.robot.position, h.position) - robot_radius - human_radius);
    }
  }
  return m;
}

Interval aggregate_ci(std::span<const double> values) {
  if (values.empty()) throw ValidationError("confidence interval of an empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  Interval out;
  out.n = sorted.size();
  const double n = static_cast<double>(out.n);
  out.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / n;
  if (out.n < 2) return out;
  double ss = 0.0;
  for (const double v : sorted) ss += (v - out.mean) * (v - out.mean);
  out.ci95 = 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return out;
}

OnlineErrors online_prediction_errors(const trial::TrialLog& log) {
  OnlineErrors out;
  std::vector<double> ade;
  std::vector<double> fde;
  const std::size_t stride = log.prediction_stride;
  for (const trial::PredictionRecord& rec : log.predictions) {
    const auto& set = rec.set;
    const std::size_t first = set.includes_ego ? 1 : 0;
    const std::size_t horizon = set.horizon();
    if (out.curve.size() < horizon) {
      out.curve.resize(horizon, 0.0);
      out.curve_counts.resize(horizon, 0);
    }
    const auto s = static_cast<std::size_t>(rec.step);
    std::size_t available = 0;
    while (available < horizon && s + stride * (available + 1) < log.snapshots.size()) ++available;
    if (available == 0) continue;
    const std::size_t humans = log.snapshots[s].humans.size();
    if (humans == 0) continue;

    std::vector<Trajectory> truth(humans);
    for (std::size_t j = 1; j <= available; ++j) {
      const trial::Snapshot& snap = log.snapshots[s + stride * j];
      for (std::size_t i = 0; i < humans; ++i) truth[i].push_back(snap.humans[i].position);
    }
    const DisplacementErrors e = displacement_errors(truth, set, Reduction::MinOverSamples, first);
    for (std::size_t t = 0; t < e.curve.size(); ++t) {
      out.curve[t] += e.curve[t];
      ++out.curve_counts[t];
    }
    if (available == horizon) {
      ade.push_back(e.ade);
      fde.push_back(e.fde);
      for (std::size_t i = 0; i < humans; ++i) {
        out.by_distance.push_back(DistanceError{
            rec.step,
            distance(log.snapshots[s].robot.position, log.snapshots[s].humans[i].position),
            e.agent_ade[i]});
      }
    }
  }
  for (std::size_t t = 0; t < out.curve.size(); ++t) {
    out.curve[t] = out.curve_counts[t] ? out.curve[t] / static_cast<double>(out.curve_counts[t])
                                       : std::numeric_limits<double>::quiet_NaN();
  }
  out.full_calls = ade.size();
  if (!ade.empty()) {
    out.ade = std::accumulate(ade.begin(), ade.end(), 0.0) / static_cast<double>(ade.size());
    out.fde = std::accumulate(fde.begin(), fde.end(), 0.0) / static_cast<double>(fde.size());
  }
  return out;
}

UTest mann_whitney_u(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ValidationError("U test needs two non-empty samples");
  struct Item {
    double value;
    bool first;
  };
  std::vector<Item> all;
  for (const double v : a) all.push_back({v, true});
  for (const double v : b) all.push_back({v, false});
  std::sort(all.begin(), all.end(), [](const Item& x, const Item& y) { return x.value < y.value; });

  const double n1 = static_cast<double>(a.size());
  const double n2 = static_cast<double>(b.size());
  const double n = n1 + n2;
  double rank_sum = 0.0;
  double tie_term = 0.0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j].value == all[i].value) ++j;
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t m = i; m < j; ++m) {
      if (all[m].first) rank_sum += rank;
    }
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }
  UTest out;
  out.u = rank_sum - n1 * (n1 + 1.0) / 2.0;
  const double u_max = std::max(out.u, n1 * n2 - out.u);
  const double mu = n1 * n2 / 2.0;
  const double sigma = std::sqrt(n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0))));
  if (!(sigma > 0.0)) return out;
  out.z = (u_max - mu - 0.5) / sigma;
  out.p = std::min(1.0, std::erfc(out.z / std::sqrt(2.0)));
  return out;
}

}  // namespace crowdnav::metrics
