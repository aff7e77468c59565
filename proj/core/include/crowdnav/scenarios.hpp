#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "crowdnav/sim.hpp"

namespace crowdnav::scenarios {

/// Built-in scenario ids accepted by make_scenario.
const std::vector<std::string>& scenario_ids();

/// Builds a scenario. Human placement and speeds are jittered from `seed`;
/// the robot start and goal are fixed. Throws ValidationError for unknown ids.
sim::Scenario make_scenario(const std::string& id, std::uint64_t seed);

/// Robot alone in the workspace.
sim::Scenario empty_scenario();

}  // namespace crowdnav::scenarios
