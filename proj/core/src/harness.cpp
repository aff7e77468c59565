#include "crowdnav/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "crowdnav/csv.hpp"
#include "crowdnav/error.hpp"
#include "crowdnav/scenarios.hpp"
#include "crowdnav/trial.hpp"

namespace crowdnav::harness {

using nlohmann::json;

namespace {

bool is_sgan(const std::string& id) { return id.rfind("sgan-", 0) == 0; }

std::size_t sgan_samples(const std::string& id) {
  const std::string digits = id.substr(5);
  if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit)) {
    throw ValidationError("unknown model '" + id + "'");
  }
  const auto k = std::stoul(digits);
  if (k < 1) throw ValidationError("model '" + id + "' needs at least one sample");
  return k;
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) throw ValidationError("unknown key '" + key + "' in " + where);
  }
}

mpc::MpcConfig parse_mpc(const json& j) {
  if (!j.is_object()) throw ValidationError("mpc must be an object");
  check_keys(j,
             {"a_g", "a_d", "a_p", "a_c", "num_subgoals", "subgoal_interval", "subgoal_distance",
              "horizon", "dt", "preferred_speed", "d_safe", "sigma_p", "stop_rollout"},
             "mpc");
  mpc::MpcConfig c;
  c.a_g = j.value("a_g", c.a_g);
  c.a_d = j.value("a_d", c.a_d);
  c.a_p = j.value("a_p", c.a_p);
  c.a_c = j.value("a_c", c.a_c);
  if (j.contains("num_subgoals")) {
    c.num_subgoals = j.at("num_subgoals").get<std::size_t>();
    if (c.num_subgoals < 1) throw ValidationError("mpc.num_subgoals must be positive");
    c.subgoal_interval = 2.0 * std::numbers::pi / static_cast<double>(c.num_subgoals);
  }
  c.subgoal_interval = j.value("subgoal_interval", c.subgoal_interval);
  c.subgoal_distance = j.value("subgoal_distance", c.subgoal_distance);
  c.horizon = j.value("horizon", c.horizon);
  c.dt = j.value("dt", c.dt);
  c.preferred_speed = j.value("preferred_speed", c.preferred_speed);
  c.d_safe = j.value("d_safe", c.d_safe);
  c.sigma_p = j.value("sigma_p", c.sigma_p);
  c.stop_rollout = j.value("stop_rollout", c.stop_rollout);
  return c;
}

std::filesystem::path manifest_path(const std::filesystem::path& weights) {
  if (std::filesystem::is_directory(weights)) return weights / "manifest.json";
  return weights;
}

json interval_json(const metrics::Interval& i) {
  if (i.n == 0) return json{{"mean", nullptr}, {"ci95", nullptr}, {"n", 0}};
  return json{{"mean", i.mean}, {"ci95", i.ci95}, {"n", i.n}};
}

metrics::Interval finite_interval(const std::vector<double>& values) {
  std::vector<double> finite;
  for (const double v : values) {
    if (std::isfinite(v)) finite.push_back(v);
  }
  if (finite.empty()) return {};
  return metrics::aggregate_ci(finite);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

void ExperimentConfig::validate() const {
  const auto& ids = scenarios::scenario_ids();
  if (std::find(ids.begin(), ids.end(), scenario) == ids.end()) {
    throw ValidationError("unknown scenario '" + scenario + "'");
  }
  if (models.empty()) throw ValidationError("no models configured");
  std::set<std::string> seen;
  for (const std::string& m : models) {
    if (!seen.insert(m).second) throw ValidationError("model '" + m + "' listed twice");
    if (is_sgan(m)) {
      sgan_samples(m);
      if (weights.empty()) throw ValidationError("model '" + m + "' requires a weights path");
      if (!std::filesystem::exists(manifest_path(weights))) {
        throw ValidationError("weight file " + manifest_path(weights).string() + " not found");
      }
    } else if (std::find(model_ids().begin(), model_ids().end(), m) == model_ids().end()) {
      throw ValidationError("unknown model '" + m + "'");
    }
  }
  if (trials < 1) throw ValidationError("trials must be at least 1");
  mpc.validate();
}

ExperimentConfig parse_config(std::string_view json_text, const std::filesystem::path& base) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  check_keys(j, {"scenario", "model", "trials", "seed", "mpc", "weights", "out"}, "config");
  ExperimentConfig c;
  try {
    c.scenario = j.value("scenario", c.scenario);
    if (j.contains("model")) {
      const json& m = j.at("model");
      c.models = m.is_array() ? m.get<std::vector<std::string>>()
                              : std::vector<std::string>{m.get<std::string>()};
    }
    if (j.contains("trials")) {
      const auto t = j.at("trials").get<std::int64_t>();
      if (t < 1) throw ValidationError("trials must be at least 1");
      c.trials = static_cast<std::size_t>(t);
    }
    c.seed = j.value("seed", c.seed);
    if (j.contains("mpc")) c.mpc = parse_mpc(j.at("mpc"));
    auto resolve = [&](const std::string& p) {
      const std::filesystem::path path(p);
      return path.is_absolute() || base.empty() ? path : base / path;
    };
    if (j.contains("weights") && !j.at("weights").is_null()) {
      c.weights = resolve(j.at("weights").get<std::string>());
    }
    if (j.contains("out")) c.out = resolve(j.at("out").get<std::string>());
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.parent_path());
}

const std::vector<std::string>& model_ids() {
  static const std::vector<std::string> ids{"cv", "cvn", "constacc", "linreg", "sgan-1", "sgan-20"};
  return ids;
}

std::unique_ptr<predict::Predictor> make_predictor(
    const std::string& id, std::shared_ptr<const predict::SganNetwork> network) {
  if (id == "cv") return std::make_unique<predict::CvPredictor>();
  if (id == "cvn") return std::make_unique<predict::CvnPredictor>();
  if (id == "constacc") return std::make_unique<predict::ConstAccPredictor>();
  if (id == "linreg") return std::make_unique<predict::LinRegPredictor>();
  if (is_sgan(id)) {
    const std::size_t k = sgan_samples(id);
    if (!network) throw ValidationError("model '" + id + "' needs loaded weights");
    return std::make_unique<predict::SganPredictor>(std::move(network), k);
  }
  throw ValidationError("unknown model '" + id + "'");
}

const ModelSummary& BenchmarkReport::model(const std::string& id) const {
  for (const ModelSummary& m : models) {
    if (m.model == id) return m;
  }
  throw ValidationError("model '" + id + "' not in report");
}

BenchmarkReport run_benchmark(const ExperimentConfig& config, bool write_outputs) {
  config.validate();
  BenchmarkReport report;
  report.config = config;

  std::shared_ptr<const predict::SganNetwork> network;
  if (std::any_of(config.models.begin(), config.models.end(), is_sgan)) {
    network = std::make_shared<const predict::SganNetwork>(
        predict::load_weights(manifest_path(config.weights)));
  }
  if (write_outputs) std::filesystem::create_directories(config.out);

  std::ostringstream metrics_csv;
  metrics_csv << "scenario,model,seed,safety,time_to_goal,status,ade,fde\n";
  std::ostringstream distance_csv;
  distance_csv << "scenario,model,seed,step,distance,error\n";

  for (const std::string& model_id : config.models) {
    const auto predictor = make_predictor(model_id, network);
    for (std::size_t i = 0; i < config.trials; ++i) {
      const std::uint64_t seed = config.seed + i;
      const sim::Scenario scenario = scenarios::make_scenario(config.scenario, seed);
      trial::TrialConfig tc;
      tc.sim.seed = seed;
      trial::MpcController controller(config.mpc);
      const trial::TrialLog log = trial::run_trial(scenario, controller, predictor.get(), tc);

      TrialSummary t;
      t.model = model_id;
      t.seed = seed;
      t.metrics = metrics::trial_metrics(log, scenario.robot_radius, scenario.human_radius);
      t.errors = metrics::online_prediction_errors(log);
      t.prediction_calls = log.predictions.size();
      if (!log.predictions.empty()) t.samples_per_call = log.predictions.front().set.num_samples();
      for (const auto& rec : log.predictions) {
        if (rec.set.num_samples() != t.samples_per_call) t.samples_per_call = 0;
      }

      metrics_csv << fmt::format("{},{},{},{},{:.6f},{},{},{}\n", config.scenario, model_id, seed,
                                 csv::fixed6(t.metrics.safety), t.metrics.time_to_goal,
                                 trial::to_string(t.metrics.status), csv::fixed6(t.errors.ade),
                                 csv::fixed6(t.errors.fde));
      for (const auto& d : t.errors.by_distance) {
        distance_csv << fmt::format("{},{},{},{},{:.6f},{:.6f}\n", config.scenario, model_id, seed,
                                    d.step, d.distance, d.error);
      }
      if (write_outputs) {
        const auto dir = config.out / model_id / fmt::format("trial_{}", seed);
        std::filesystem::create_directories(dir);
        trial::write_trajectory_csv(log, dir / "trajectory.csv");
        trial::write_decisions_csv(log, dir / "decisions.csv");
        const json meta{{"scenario", config.scenario},
                        {"model", model_id},
                        {"seed", seed},
                        {"status", trial::to_string(t.metrics.status)},
                        {"time_to_goal", t.metrics.time_to_goal},
                        {"safety", number_or_null(t.metrics.safety)},
                        {"prediction_calls", t.prediction_calls},
                        {"samples_per_call", t.samples_per_call},
                        {"full_horizon_calls", t.errors.full_calls}};
        write_text(dir / "meta.json", meta.dump(2) + "\n");
      }
      report.trials.push_back(std::move(t));
    }
  }

  std::map<std::string, std::vector<double>> safety_by_model;
  std::map<std::string, std::vector<double>> time_by_model;
  for (const std::string& model_id : config.models) {
    ModelSummary s;
    s.model = model_id;
    std::vector<double> ade;
    std::vector<double> fde;
    std::vector<std::vector<double>> curve;
    std::size_t positive = 0;
    std::size_t reached = 0;
    for (const TrialSummary& t : report.trials) {
      if (t.model != model_id) continue;
      ++s.trials;
      safety_by_model[model_id].push_back(t.metrics.safety);
      time_by_model[model_id].push_back(t.metrics.time_to_goal);
      ade.push_back(t.errors.ade);
      fde.push_back(t.errors.fde);
      if (t.metrics.safety > 0.0) ++positive;
      if (t.metrics.status == trial::Status::ReachedGoal) ++reached;
      if (curve.size() < t.errors.curve.size()) curve.resize(t.errors.curve.size());
      for (std::size_t k = 0; k < t.errors.curve.size(); ++k) {
        if (std::isfinite(t.errors.curve[k])) curve[k].push_back(t.errors.curve[k]);
      }
    }
    s.safety = finite_interval(safety_by_model[model_id]);
    s.time_to_goal = finite_interval(time_by_model[model_id]);
    s.ade = finite_interval(ade);
    s.fde = finite_interval(fde);
    for (const auto& column : curve) s.curve.push_back(finite_interval(column));
    s.positive_safety_fraction = static_cast<double>(positive) / static_cast<double>(s.trials);
    s.reached_fraction = static_cast<double>(reached) / static_cast<double>(s.trials);
    report.models.push_back(std::move(s));
  }

  for (std::size_t a = 0; a < config.models.size(); ++a) {
    for (std::size_t b = a + 1; b < config.models.size(); ++b) {
      const std::string& ma = config.models[a];
      const std::string& mb = config.models[b];
      auto finite = [](const std::vector<double>& v) {
        std::vector<double> out;
        std::copy_if(v.begin(), v.end(), std::back_inserter(out),
                     [](double x) { return std::isfinite(x); });
        return out;
      };
      const auto sa = finite(safety_by_model[ma]);
      const auto sb = finite(safety_by_model[mb]);
      if (!sa.empty() && !sb.empty()) {
        report.tests.push_back({"safety", ma, mb, metrics::mann_whitney_u(sa, sb)});
      }
      report.tests.push_back(
          {"time_to_goal", ma, mb, metrics::mann_whitney_u(time_by_model[ma], time_by_model[mb])});
    }
  }

  if (!write_outputs) return report;

  std::ostringstream curve_csv;
  curve_csv << "scenario,model,step,err_min,ci95\n";
  for (const ModelSummary& s : report.models) {
    for (std::size_t k = 0; k < s.curve.size(); ++k) {
      if (s.curve[k].n == 0) continue;
      curve_csv << fmt::format("{},{},{},{:.6f},{:.6f}\n", config.scenario, s.model, k + 1,
                               s.curve[k].mean, s.curve[k].ci95);
    }
  }

  json models = json::object();
  for (const ModelSummary& s : report.models) {
    json curve = json::array();
    for (const auto& c : s.curve) curve.push_back(interval_json(c));
    models[s.model] = json{{"trials", s.trials},
                           {"safety", interval_json(s.safety)},
                           {"time_to_goal", interval_json(s.time_to_goal)},
                           {"ade", interval_json(s.ade)},
                           {"fde", interval_json(s.fde)},
                           {"positive_safety_fraction", s.positive_safety_fraction},
                           {"reached_fraction", s.reached_fraction},
                           {"curve", curve}};
  }
  json tests = json::array();
  for (const PairTest& t : report.tests) {
    tests.push_back(json{{"metric", t.metric},
                         {"a", t.a},
                         {"b", t.b},
                         {"u", t.test.u},
                         {"z", t.test.z},
                         {"p", t.test.p}});
  }
  json out{{"scenario", config.scenario},
           {"trials", config.trials},
           {"seed", config.seed},
           {"models", models},
           {"u_tests", tests}};
  // Per-step comparison of every model against the constant-velocity baseline.
  if (std::find(config.models.begin(), config.models.end(), "cv") != config.models.end()) {
    const ModelSummary& cv = report.model("cv");
    json comparison = json::object();
    for (const ModelSummary& s : report.models) {
      if (s.model == "cv") continue;
      json diff = json::array();
      bool at_least = !s.curve.empty();
      for (std::size_t k = 0; k < std::min(s.curve.size(), cv.curve.size()); ++k) {
        const double d = s.curve[k].mean - cv.curve[k].mean;
        diff.push_back(d);
        at_least = at_least && d >= 0.0;
      }
      comparison[s.model] = json{{"error_minus_cv", diff}, {"at_least_cv_every_step", at_least}};
    }
    out["curve_vs_cv"] = comparison;
  }

  write_text(config.out / "metrics.csv", metrics_csv.str());
  write_text(config.out / "curve.csv", curve_csv.str());
  write_text(config.out / "distance.csv", distance_csv.str());
  write_text(config.out / "report.json", out.dump(2) + "\n");
  return report;
}

}  // namespace crowdnav::harness
