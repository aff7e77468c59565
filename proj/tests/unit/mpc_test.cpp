#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "crowdnav/error.hpp"
#include "crowdnav/mpc.hpp"
#include "crowdnav/random.hpp"

using crowdnav::Trajectory;
using crowdnav::Vec2;
using namespace crowdnav::mpc;
using crowdnav::predict::PredictionSet;
using crowdnav::predict::TrajectorySample;
using crowdnav::sim::AgentState;

namespace {

constexpr double kPi = std::numbers::pi;

Trajectory constant_track(const Vec2& p, std::size_t points) { return Trajectory(points, p); }

PredictionSet anchored_set(std::vector<std::vector<Trajectory>> samples, bool includes_ego = false) {
  PredictionSet set;
  set.dt = 0.1;
  set.anchored = true;
  set.includes_ego = includes_ego;
  for (auto& futures : samples) {
    TrajectorySample s;
    s.futures = std::move(futures);
    set.samples.push_back(std::move(s));
  }
  for (const auto& f : set.samples.front().futures) set.origins.push_back(f.front());
  return set;
}

Rollout straight(const Vec2& start, const Vec2& velocity, std::size_t steps = 10, double dt = 0.1) {
  Rollout r{start, {}, {}};
  Vec2 p = start;
  for (std::size_t t = 0; t < steps; ++t) {
    r.controls.push_back(velocity);
    p += velocity * dt;
    r.states.push_back(p);
  }
  return r;
}

}  // namespace

TEST(Rollouts, CountAndFinalState) {
  const MpcConfig cfg;
  const auto rollouts = generate_rollouts(AgentState{{0, 0}, {0, 0}}, cfg);
  ASSERT_EQ(rollouts.size(), 10u);
  ASSERT_EQ(rollouts[0].states.size(), 10u);
  EXPECT_NEAR(rollouts[0].states.back().x, 0.8, 1e-12);
  EXPECT_NEAR(rollouts[0].states.back().y, 0.0, 1e-12);
}

TEST(Rollouts, SingleIntegratorConsistency) {
  const MpcConfig cfg;
  for (const auto& r : generate_rollouts(AgentState{{1, 2}, {0.3, 0}}, cfg)) {
    Vec2 prev = r.start;
    for (std::size_t t = 0; t < r.states.size(); ++t) {
      EXPECT_NEAR((r.states[t] - (prev + r.controls[t] * cfg.dt)).norm(), 0.0, 1e-12);
      EXPECT_NEAR(r.controls[t].norm(), cfg.preferred_speed, 1e-12);
      prev = r.states[t];
    }
  }
}

TEST(Rollouts, RotationalSymmetry) {
  const MpcConfig cfg;
  const auto rollouts = generate_rollouts(AgentState{{0, 0}, {0, 0}}, cfg);
  for (std::size_t j = 0; j < 10; ++j) {
    const auto& next = rollouts[(j + 1) % 10];
    for (std::size_t t = 0; t < 10; ++t) {
      const Vec2 rotated = crowdnav::rotated(rollouts[j].states[t], kPi / 5.0);
      EXPECT_NEAR(rotated.x, next.states[t].x, 1e-12);
      EXPECT_NEAR(rotated.y, next.states[t].y, 1e-12);
    }
  }
}

TEST(Rollouts, StopRolloutToggle) {
  MpcConfig cfg;
  cfg.stop_rollout = true;
  const auto rollouts = generate_rollouts(AgentState{{1, 1}, {0, 0}}, cfg);
  ASSERT_EQ(rollouts.size(), 11u);
  for (const Vec2& p : rollouts[10].states) EXPECT_EQ(p, Vec2(1, 1));
}

TEST(Config, Validation) {
  MpcConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.num_subgoals = 8;
  EXPECT_THROW(cfg.validate(), crowdnav::ValidationError);
  cfg = MpcConfig{};
  cfg.a_d = -1.0;
  EXPECT_THROW(cfg.validate(), crowdnav::ValidationError);
}

TEST(CostGoal, Examples) {
  const Vec2 goal{5, 0};
  EXPECT_NEAR(cost_goal(straight({0, 0}, {5, 0}, 10, 0.1), goal), 0.0, 1e-12);
  EXPECT_NEAR(cost_goal(straight({0, 0}, {0, 0}), goal), 5.0 / (5.0 + 1e-6), 1e-15);
  EXPECT_NEAR(cost_goal(straight({0, 0}, {0, 0}), goal), 1.0, 1e-6);
  EXPECT_NEAR(cost_goal(straight({0, 0}, {-0.8, 0}), goal), 1.16, 1e-6);
  // Clamped when the robot starts at the goal and moves off it.
  EXPECT_EQ(cost_goal(straight({5, 0}, {0.8, 0}), goal), 2.0);
}

TEST(CostSocial, FarHumanIsFree) {
  const MpcConfig cfg;
  const std::vector<Trajectory> humans{constant_track({1e4, 1e4}, 11)};
  const auto c = cost_social(straight({0, 0}, {0.8, 0}), humans, 0.3, 0.3, cfg);
  EXPECT_EQ(c.J_d, 0.0);
  EXPECT_EQ(c.J_p, 0.0);
}

TEST(CostSocial, ContactAtOneStep) {
  const MpcConfig cfg;
  const Rollout r = straight({0, 0}, {0, 0});
  Trajectory human = constant_track({100, 0}, 11);
  human[4] = {0.6, 0};  // rollout state 3 touches the human
  const std::vector<Trajectory> humans{human};
  const auto c = cost_social(r, humans, 0.3, 0.3, cfg);
  EXPECT_NEAR(c.J_d, 0.009, 1e-15);
  EXPECT_NEAR(c.J_p, 0.1, 1e-15);
}

TEST(CostSocial, WiderPersonalSpaceNeverCheaper) {
  crowdnav::Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    MpcConfig narrow;
    narrow.sigma_p = rng.uniform(0.05, 1.0);
    MpcConfig wide = narrow;
    wide.sigma_p *= 2.0;
    std::vector<Trajectory> humans(2);
    for (auto& h : humans) {
      for (int t = 0; t < 11; ++t) h.push_back({rng.uniform(2, 4), rng.uniform(-2, 2)});
    }
    const Rollout r = straight({0, 0}, {0.8, 0});
    EXPECT_GE(cost_social(r, humans, 0.3, 0.3, wide).J_p,
              cost_social(r, humans, 0.3, 0.3, narrow).J_p);
  }
}

TEST(CostConsistency, Examples) {
  const Rollout r = straight({0, 0}, {0.8, 0});
  Trajectory ego{r.start};
  ego.insert(ego.end(), r.states.begin(), r.states.end());
  EXPECT_EQ(cost_consistency(r, ego), 0.0);
  Trajectory offset = ego;
  for (auto& p : offset) p.y += 0.2;
  EXPECT_NEAR(cost_consistency(r, offset), 0.2, 1e-12);
  // Swapping the roles of the two trajectories gives the same value.
  const Rollout other = straight({0, 0}, {0.3, 0.5});
  Trajectory other_track{other.start};
  other_track.insert(other_track.end(), other.states.begin(), other.states.end());
  EXPECT_DOUBLE_EQ(cost_consistency(r, other_track), cost_consistency(other, ego));
  EXPECT_GT(cost_consistency(r, other_track), 0.0);
}

TEST(CostConsistency, CvEgoMatchesStraightAhead) {
  const MpcConfig cfg;
  const AgentState robot{{0, 0}, {0.8, 0}};
  const auto ego = cv_ego_track(robot, cfg);
  ASSERT_EQ(ego.size(), 11u);
  EXPECT_NEAR(cost_consistency(generate_rollouts(robot, cfg)[0], ego), 0.0, 1e-12);
}

TEST(ExpectedCost, SingleSampleEqualsDirectCosts) {
  const MpcConfig cfg;
  const Rollout r = straight({0, 0}, {0.8, 0});
  Trajectory human;
  for (int t = 0; t <= 10; ++t) human.push_back({1.2 - 0.05 * t, 0.2});
  const auto set = anchored_set({{human}});
  const auto ego = cv_ego_track(AgentState{{0, 0}, {0.5, 0.2}}, cfg);
  const auto c = expected_cost(r, set, {5, 0}, cfg, 0.3, 0.3, ego);
  const std::vector<Trajectory> humans{human};
  const auto s = cost_social(r, humans, 0.3, 0.3, cfg);
  EXPECT_EQ(c.J_g, cost_goal(r, {5, 0}));
  EXPECT_EQ(c.J_d, s.J_d);
  EXPECT_EQ(c.J_p, s.J_p);
  EXPECT_EQ(c.J_c, cost_consistency(r, ego));
}

TEST(ExpectedCost, MeanOverSamples) {
  MpcConfig cfg;
  cfg.d_safe = 2.0;
  const Rollout r = straight({0, 0}, {0, 0});
  // Clearances 1 and 2 - sqrt(3) at every step give J_d of 1 and 3.
  const auto a = constant_track({1.6, 0}, 11);
  const auto b = constant_track({0.6 + 2.0 - std::sqrt(3.0), 0}, 11);
  const auto set = anchored_set({{a}, {b}});
  const auto ego = cv_ego_track(AgentState{{0, 0}, {0, 0}}, cfg);
  const auto c = expected_cost(r, set, {5, 0}, cfg, 0.3, 0.3, ego);
  EXPECT_NEAR(c.J_d, 2.0, 1e-12);
}

TEST(ExpectedCost, DuplicatedSamplesAreBitwiseEqual) {
  const MpcConfig cfg;
  crowdnav::Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Trajectory> humans(3);
    for (auto& h : humans) {
      for (int t = 0; t <= 10; ++t) h.push_back({rng.uniform(-1, 2), rng.uniform(-1, 2)});
    }
    const Rollout r = straight({0, 0}, {rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8)});
    const auto ego = cv_ego_track(AgentState{{0, 0}, {0.4, 0.1}}, cfg);
    const auto one = expected_cost(r, anchored_set({humans}), {2, 3}, cfg, 0.3, 0.3, ego);
    for (const std::size_t k : {2u, 7u, 20u}) {
      const auto many = expected_cost(r, anchored_set(std::vector(k, humans)), {2, 3}, cfg, 0.3,
                                      0.3, ego);
      EXPECT_EQ(many.J_d, one.J_d);
      EXPECT_EQ(many.J_p, one.J_p);
      EXPECT_EQ(many.J_c, one.J_c);
      EXPECT_EQ(many.total, one.total);
    }
  }
}

TEST(ExpectedCost, JointSetUsesEgoTrack) {
  const MpcConfig cfg;
  const Rollout r = straight({0, 0}, {0.8, 0});
  Trajectory ego{r.start};
  for (const Vec2& p : r.states) ego.push_back(p + Vec2{0, 0.2});
  const auto human = constant_track({50, 50}, 11);
  const auto joint = anchored_set({{ego, human}}, true);
  const auto fallback = cv_ego_track(AgentState{{0, 0}, {0.8, 0}}, cfg);
  const auto c = expected_cost(r, joint, {5, 0}, cfg, 0.3, 0.3, fallback);
  EXPECT_NEAR(c.J_c, 0.2, 1e-12);
  EXPECT_EQ(c.J_d, 0.0);
  const auto plain = anchored_set({{human}});
  EXPECT_NEAR(expected_cost(r, plain, {5, 0}, cfg, 0.3, 0.3, fallback).J_c, 0.0, 1e-12);
}

TEST(ExpectedCost, RequiresResampledSet) {
  const MpcConfig cfg;
  auto set = anchored_set({{constant_track({3, 3}, 11)}});
  set.anchored = false;
  const auto ego = cv_ego_track(AgentState{}, cfg);
  EXPECT_THROW(expected_cost(straight({0, 0}, {0, 0}), set, {1, 1}, cfg, 0.3, 0.3, ego),
               crowdnav::ValidationError);
}

TEST(SelectControl, GoalOnlyPicksAlignedSubgoal) {
  MpcConfig cfg;
  cfg.a_d = cfg.a_p = cfg.a_c = 0.0;
  crowdnav::Rng rng(5);
  const auto empty = anchored_set({{}});
  for (int trial = 0; trial < 100; ++trial) {
    const double angle = rng.uniform(0, 2 * kPi);
    const Vec2 goal = Vec2{5 * std::cos(angle), 5 * std::sin(angle)};
    const AgentState robot{{0, 0}, {0, 0}};
    const auto rollouts = generate_rollouts(robot, cfg);
    const auto d = select_control(rollouts, empty, goal, cfg, 0.3, 0.3, cv_ego_track(robot, cfg));
    const auto expected = static_cast<std::size_t>(std::llround(angle / (kPi / 5))) % 10;
    EXPECT_EQ(d.index, expected) << angle;
    EXPECT_EQ(d.command, rollouts[d.index].controls.front());
  }
}

TEST(SelectControl, ScalingWeightsKeepsArgmin) {
  crowdnav::Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    MpcConfig cfg;
    std::vector<Trajectory> humans(2);
    for (auto& h : humans) {
      const Vec2 p{rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)};
      const Vec2 v{rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1)};
      for (int t = 0; t <= 10; ++t) h.push_back(p + v * double(t));
    }
    const auto set = anchored_set({humans});
    const AgentState robot{{0, 0}, {0.5, 0.3}};
    const auto rollouts = generate_rollouts(robot, cfg);
    const auto ego = cv_ego_track(robot, cfg);
    const Vec2 goal{rng.uniform(-5, 5), rng.uniform(-5, 5)};
    const auto base = select_control(rollouts, set, goal, cfg, 0.3, 0.3, ego);
    for (const double c : {0.5, 4.0}) {
      MpcConfig scaled = cfg;
      scaled.a_g *= c;
      scaled.a_d *= c;
      scaled.a_p *= c;
      scaled.a_c *= c;
      EXPECT_EQ(select_control(rollouts, set, goal, scaled, 0.3, 0.3, ego).index, base.index);
    }
  }
}

TEST(SelectControl, TiesGoToLowestIndex) {
  const MpcConfig cfg;
  const Rollout good = straight({0, 0}, {0.8, 0});
  const Rollout bad = straight({0, 0}, {-0.8, 0});
  const auto empty = anchored_set({{}});
  const auto ego = cv_ego_track(AgentState{{0, 0}, {0.8, 0}}, cfg);
  const std::vector<Rollout> twins{good, good};
  EXPECT_EQ(select_control(twins, empty, {5, 0}, cfg, 0.3, 0.3, ego).index, 0u);
  const std::vector<Rollout> later{bad, good, good};
  EXPECT_EQ(select_control(later, empty, {5, 0}, cfg, 0.3, 0.3, ego).index, 1u);
  EXPECT_THROW(select_control({}, empty, {5, 0}, cfg, 0.3, 0.3, ego), crowdnav::ValidationError);
}

TEST(SelectControl, TotalsReconstructAndStayNonNegative) {
  crowdnav::Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    MpcConfig cfg;
    cfg.a_g = rng.uniform(0, 3);
    cfg.a_d = rng.uniform(0, 3);
    cfg.a_p = rng.uniform(0, 3);
    cfg.a_c = rng.uniform(0, 3);
    std::vector<std::vector<Trajectory>> samples(3, std::vector<Trajectory>(2));
    for (auto& s : samples) {
      for (auto& h : s) {
        for (int t = 0; t <= 10; ++t) h.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1)});
      }
    }
    const auto set = anchored_set(samples, trial % 2 == 0);
    const AgentState robot{{0, 0}, {rng.uniform(-1, 1), rng.uniform(-1, 1)}};
    const auto d = select_control(generate_rollouts(robot, cfg), set, {3, 2}, cfg, 0.3, 0.3,
                                  cv_ego_track(robot, cfg));
    ASSERT_EQ(d.costs.size(), 10u);
    for (const auto& c : d.costs) {
      const double sum = cfg.a_g * c.J_g + cfg.a_d * c.J_d + cfg.a_p * c.J_p + cfg.a_c * c.J_c;
      EXPECT_NEAR(c.total, sum, 1e-12);
      for (const double v : {c.J_g, c.J_d, c.J_p, c.J_c, c.total}) {
        EXPECT_TRUE(std::isfinite(v));
        EXPECT_GE(v, 0.0);
      }
      EXPECT_LE(d.costs[d.index].total, c.total);
    }
  }
}
