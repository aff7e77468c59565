// crowdnav command-line entry point.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>

#include <fmt/format.h>

#include "crowdnav/datasets.hpp"
#include "crowdnav/error.hpp"
#include "crowdnav/golden.hpp"
#include "crowdnav/harness.hpp"
#include "crowdnav/plots.hpp"
#include "crowdnav/sgan.hpp"
#include "crowdnav/training.hpp"

namespace fs = std::filesystem;
using namespace crowdnav;

namespace {

struct GlobalOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int run_simulate(const GlobalOptions& g) {
  if (g.config.empty()) throw ValidationError("simulate needs --config");
  harness::ExperimentConfig config = harness::load_config(g.config);
  if (g.seed) config.seed = *g.seed;
  if (!g.out.empty()) config.out = g.out;
  const auto report = harness::run_benchmark(config);
  for (const auto& m : report.models) {
    fmt::print("{:<10} trials={} safety={:.3f}±{:.3f} time={:.2f}±{:.2f} ade={:.3f} fde={:.3f}\n",
               m.model, m.trials, m.safety.mean, m.safety.ci95, m.time_to_goal.mean,
               m.time_to_goal.ci95, m.ade.mean, m.fde.mean);
  }
  fmt::print("wrote {}\n", config.out.string());
  return 0;
}

int run_offline(const GlobalOptions& g, const std::vector<std::string>& datasets,
                const std::string& data_dir, const std::vector<std::string>& models,
                const std::string& weights, std::size_t stride) {
  std::vector<std::pair<std::string, std::vector<data::DatasetScene>>> scenes;
  for (const std::string& path : datasets) {
    auto scene = data::parse_dataset(path);
    const std::string name = scene.name;
    scenes.push_back({name, {std::move(scene)}});
  }
  if (!data_dir.empty()) {
    for (const auto& standard : data::standard_scenes()) {
      const auto files = data::find_scene_files(data_dir, standard);
      if (files.empty()) continue;
      std::vector<data::DatasetScene> parts;
      for (const auto& f : files) parts.push_back(data::parse_dataset(f));
      scenes.push_back({standard.name, std::move(parts)});
    }
  }
  if (scenes.empty()) throw ValidationError("no dataset files given (use --dataset or --data-dir)");

  std::shared_ptr<const predict::SganNetwork> network;
  if (!weights.empty()) {
    const fs::path manifest = fs::is_directory(weights) ? fs::path(weights) / "manifest.json" : fs::path(weights);
    network = std::make_shared<const predict::SganNetwork>(predict::load_weights(manifest));
  }
  std::vector<data::OfflineResult> results;
  for (const auto& [name, parts] : scenes) {
    for (const std::string& id : models) {
      const auto model = harness::make_predictor(id, network);
      results.push_back(data::evaluate_offline(parts, name, *model, g.seed.value_or(0), 8, 12, stride));
      const auto& r = results.back();
      fmt::print("{:<8} {:<10} k={:<3} windows={:<6} ade={:.3f} fde={:.3f}{}\n", r.scene, r.model,
                 r.k, r.windows, r.ade, r.fde,
                 r.failures ? fmt::format(" failures={}", r.failures) : std::string());
    }
  }
  const fs::path out = g.out.empty() ? fs::path("offline") : fs::path(g.out);
  fs::create_directories(out);
  data::write_offline_report(results, out / "offline_report.csv");
  data::write_offline_curve(results, out / "offline_curve.csv");
  fmt::print("wrote {}\n", out.string());
  return 0;
}

int run_train(const GlobalOptions& g, const std::string& corpus, std::size_t size,
              std::size_t epochs) {
  train::TrainConfig config;
  config.epochs = epochs;
  if (g.seed) config.seed = *g.seed;
  std::vector<train::TrainSample> data;
  if (corpus == "straight") {
    data = train::straight_line_dataset(size, config.seed);
  } else if (corpus == "synthetic") {
    train::SyntheticConfig sc;
    sc.seed = config.seed;
    data = train::gen_synthetic_dataset(size, sc);
  } else {
    throw ValidationError("unknown corpus '" + corpus + "' (use straight or synthetic)");
  }
  const auto result = train::train_toy(data, config);
  const fs::path out = g.out.empty() ? fs::path("weights") : fs::path(g.out);
  fs::create_directories(out);
  predict::save_weights(result.weights, out);
  train::write_loss_trace(result.trace, out / "loss_trace.csv");
  fmt::print("samples={} variety {:.4f} -> {:.4f}\n", data.size(), result.trace.front().variety,
             result.trace.back().variety);
  fmt::print("wrote {}\n", out.string());
  return 0;
}

int run_plot(const GlobalOptions& g, const std::string& input) {
  const fs::path dir = !input.empty() ? fs::path(input) : fs::path(g.out);
  if (dir.empty()) throw ValidationError("plot needs --in or --out pointing at a report directory");
  for (const auto& p : plots::emit_plots(dir)) fmt::print("wrote {}\n", p.string());
  return 0;
}

int run_golden(const std::string& weights, const std::string& golden) {
  const fs::path manifest = fs::is_directory(weights) ? fs::path(weights) / "manifest.json" : fs::path(weights);
  const predict::SganNetwork network(predict::load_weights(manifest));
  const auto cases = predict::load_golden(golden);
  bool ok = !cases.empty();
  for (const auto& r : predict::golden_check(network, cases)) {
    fmt::print("{:<24} max_abs={:.3e} {}\n", r.name, r.max_abs_error, r.pass ? "PASS" : "FAIL");
    ok = ok && r.pass;
  }
  if (!ok) {
    std::fprintf(stderr, "golden check failed\n");
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Crowd navigation benchmark"};
  app.require_subcommand(1);
  GlobalOptions g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config, "Experiment config (JSON)");
  auto* seed_opt = app.add_option("--seed", seed, "Base seed");
  app.add_option("--out", g.out, "Output directory");

  auto* simulate = app.add_subcommand("simulate", "Run closed-loop navigation trials");
  simulate->fallthrough();

  auto* offline = app.add_subcommand("evaluate-offline", "Score predictors on ETH/UCY-format files");
  offline->fallthrough();
  std::vector<std::string> datasets;
  std::string data_dir;
  std::vector<std::string> models{"cv", "linreg", "constacc"};
  std::string offline_weights;
  std::size_t stride = 1;
  offline->add_option("--dataset", datasets, "Dataset text file (repeatable)");
  offline->add_option("--data-dir", data_dir, "Directory holding the standard scene files");
  offline->add_option("--model", models, "Model ids")->delimiter(',');
  offline->add_option("--weights", offline_weights, "Generative model weights");
  offline->add_option("--stride", stride, "Window stride")->check(CLI::PositiveNumber);

  auto* train = app.add_subcommand("train-toy", "Train the toy generative model");
  train->fallthrough();
  std::string corpus = "straight";
  std::size_t size = 64;
  std::size_t epochs = 200;
  train->add_option("--corpus", corpus, "straight or synthetic");
  train->add_option("--size", size, "Samples (straight) or scenes (synthetic)");
  train->add_option("--epochs", epochs, "Training epochs");

  auto* plot = app.add_subcommand("plot", "Render SVG figures from a report directory");
  plot->fallthrough();
  std::string plot_in;
  plot->add_option("--in", plot_in, "Report directory");

  auto* golden = app.add_subcommand("golden-check", "Compare inference with golden vectors");
  golden->fallthrough();
  std::string golden_weights;
  std::string golden_file;
  golden->add_option("--weights", golden_weights, "Weights manifest or directory")->required();
  golden->add_option("--golden", golden_file, "Golden vector file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  if (seed_opt->count() > 0) g.seed = seed;

  try {
    if (*simulate) return run_simulate(g);
    if (*offline) return run_offline(g, datasets, data_dir, models, offline_weights, stride);
    if (*train) return run_train(g, corpus, size, epochs);
    if (*plot) return run_plot(g, plot_in);
    if (*golden) return run_golden(golden_weights, golden_file);
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
