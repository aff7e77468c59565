#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

#include "crowdnav/sgan.hpp"

namespace crowdnav::predict {

/// One reference inference: histories, latent vector and expected futures.
struct GoldenCase {
  std::string name;
  std::vector<Trajectory> history;
  Eigen::VectorXd z;
  std::vector<Trajectory> expected;
};

struct GoldenResult {
  std::string name;
  double max_abs_error = 0.0;
  bool pass = false;
};

inline constexpr double kGoldenTolerance = 1e-4;

/// JSON of the form {"cases": [{"name", "history", "z", "expected"}]} with
/// positions as [x, y] pairs. Throws ValidationError on malformed files.
std::vector<GoldenCase> load_golden(const std::filesystem::path& path);
void save_golden(const std::vector<GoldenCase>& cases, const std::filesystem::path& path);

/// Runs the network on every case and compares positions by max-abs error.
std::vector<GoldenResult> golden_check(const SganNetwork& network,
                                       const std::vector<GoldenCase>& cases,
                                       double tolerance = kGoldenTolerance);

}  // namespace crowdnav::predict
