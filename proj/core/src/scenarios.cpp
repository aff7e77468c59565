#include "crowdnav/scenarios.hpp"

#include <algorithm>
#include <array>

#include "crowdnav/error.hpp"
#include "crowdnav/random.hpp"

namespace crowdnav::scenarios {

namespace {

constexpr double kJitter = 0.15;

Vec2 jitter(Rng& rng, const sim::Workspace& ws, Vec2 p) {
  p.x = std::clamp(p.x + rng.uniform(-kJitter, kJitter), ws.min.x, ws.max.x);
  p.y = std::clamp(p.y + rng.uniform(-kJitter, kJitter), ws.min.y, ws.max.y);
  return p;
}

sim::AgentSpec human(Rng& rng, const sim::Workspace& ws, Vec2 start, Vec2 goal,
                     sim::Behavior behavior) {
  sim::AgentSpec a;
  a.start = jitter(rng, ws, start);
  a.goal = jitter(rng, ws, goal);
  a.behavior = behavior;
  a.preferred_speed = rng.uniform(0.7, 0.9);
  a.start_time = rng.uniform(0.0, 0.5);
  return a;
}

}  // namespace

const std::vector<std::string>& scenario_ids() {
  static const std::vector<std::string> ids{"cooperative", "aggressive", "distracted",
                                            "diagonal-swap-sim"};
  return ids;
}

sim::Scenario empty_scenario() {
  sim::Scenario s;
  s.id = "empty";
  return s;
}

sim::Scenario make_scenario(const std::string& id, std::uint64_t seed) {
  sim::Scenario s = empty_scenario();
  s.id = id;
  Rng rng(Rng::mix(seed ^ 0xC0FFEEULL));
  const auto& ws = s.workspace;
  const Vec2 origin = ws.min;
  const Vec2 right{ws.max.x, ws.min.y};
  const Vec2 top{ws.min.x, ws.max.y};
  const Vec2 far = ws.max;

  if (id == "cooperative") {
    // Humans start on the three other corners and each takes a corner other
    // than its own, leaving the robot goal free.
    static constexpr std::array<std::array<int, 3>, 3> kAssignments{{
        {0, 1, 2},  // right -> origin, top -> right, far -> top
        {2, 0, 1},  // right -> top, top -> origin, far -> right
        {2, 1, 0},  // right -> top, top -> right, far -> origin
    }};
    const std::array<Vec2, 3> goals{origin, right, top};
    const auto& pick = kAssignments[std::min<std::size_t>(
        2, static_cast<std::size_t>(rng.uniform() * 3.0))];
    const std::array<Vec2, 3> starts{right, top, far};
    for (std::size_t i = 0; i < 3; ++i) {
      s.agents.push_back(human(rng, ws, starts[i], goals[static_cast<std::size_t>(pick[i])],
                               sim::Behavior::Orca));
    }
  } else if (id == "diagonal-swap-sim") {
    s.agents.push_back(human(rng, ws, right, top, sim::Behavior::Orca));
    s.agents.push_back(human(rng, ws, top, right, sim::Behavior::Orca));
    s.agents.push_back(human(rng, ws, far, origin, sim::Behavior::Orca));
  } else if (id == "aggressive") {
    s.agents.push_back(human(rng, ws, far, origin, sim::Behavior::NonReactiveStraight));
  } else if (id == "distracted") {
    s.agents.push_back(
        human(rng, ws, {0.0, 2.6}, {2.2, 2.6}, sim::Behavior::DistractedWaypoints));
    s.agents.back().preferred_speed = rng.uniform(1.0, 1.2);
  } else if (id != "empty") {
    throw ValidationError("unknown scenario '" + id + "'");
  }
  s.validate();
  return s;
}

}  // namespace crowdnav::scenarios
