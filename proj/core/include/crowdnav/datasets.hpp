#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crowdnav/geometry.hpp"
#include "crowdnav/metrics.hpp"
#include "crowdnav/prediction.hpp"

namespace crowdnav::data {

struct Observation {
  std::int64_t frame = 0;
  std::int64_t ped = 0;
  Vec2 position;
};

struct DatasetScene {
  std::string name;
  std::vector<Observation> observations;
  /// Smallest positive gap between frame ids; 10 when undetermined.
  std::int64_t frame_stride = 10;
  /// Time between consecutive sampled frames.
  double dt = predict::kDefaultPredictionDt;
};

/// Whitespace-separated `frame ped x y` lines. Throws ParseError naming the
/// line for malformed input or a duplicate (frame, ped).
DatasetScene parse_dataset_text(std::string_view text, const std::string& name);
DatasetScene parse_dataset(const std::filesystem::path& path);

/// Text that parses back to the same scene bit for bit.
std::string serialize_scene(const DatasetScene& scene);

struct ObservationWindow {
  std::int64_t start_frame = 0;
  std::vector<std::int64_t> agent_ids;
  /// observed[agent] has h positions, future[agent] has T.
  std::vector<Trajectory> observed;
  std::vector<Trajectory> future;
};

/// Sliding windows of h + T frames on the scene's frame grid. Only agents
/// present in every frame of a window are kept; empty windows are dropped.
std::vector<ObservationWindow> make_windows(const DatasetScene& scene, std::size_t observed = 8,
                                            std::size_t horizon = 12, std::size_t stride = 1);

struct OfflineResult {
  std::string scene;
  std::string model;
  std::size_t k = 1;
  std::size_t windows = 0;
  std::size_t agents = 0;
  /// Windows whose prediction raised an error.
  std::size_t failures = 0;
  double ade = 0.0;
  double fde = 0.0;
  /// Per-step best-of-k error over all (window, agent) pairs.
  std::vector<metrics::Interval> curve;
};

/// Predicts every window as one joint scene and averages best-of-k errors
/// over all scored agents.
OfflineResult evaluate_offline(const DatasetScene& scene, const predict::Predictor& model,
                               std::uint64_t seed, std::size_t observed = 8,
                               std::size_t horizon = 12, std::size_t stride = 1);

/// Pools the windows of several recordings under one scene name.
OfflineResult evaluate_offline(std::span<const DatasetScene> parts, const std::string& name,
                               const predict::Predictor& model, std::uint64_t seed,
                               std::size_t observed = 8, std::size_t horizon = 12,
                               std::size_t stride = 1);

/// scene,model,k,ade,fde
void write_offline_report(const std::vector<OfflineResult>& results,
                          const std::filesystem::path& path);
/// scene,model,step,err_min,ci95
void write_offline_curve(const std::vector<OfflineResult>& results,
                         const std::filesystem::path& path);

struct StandardScene {
  std::string name;
  /// Alternative file sets, tried in order; a set is used when all its files exist.
  std::vector<std::vector<std::string>> alternatives;
};

/// The five ETH/UCY evaluation scenes.
const std::vector<StandardScene>& standard_scenes();

/// Files of the first complete alternative under `directory` (also looking in
/// `<directory>/<name>` and `<directory>/<name>/test`); empty when none is.
std::vector<std::filesystem::path> find_scene_files(const std::filesystem::path& directory,
                                                    const StandardScene& scene);

}  // namespace crowdnav::data
