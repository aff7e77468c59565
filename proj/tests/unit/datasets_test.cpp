#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "crowdnav/datasets.hpp"
#include "crowdnav/error.hpp"
#include "crowdnav/random.hpp"

namespace fs = std::filesystem;
using namespace crowdnav;
using namespace crowdnav::data;

namespace {

// Agent `ped` walks a straight line over frames [first, first + count) at stride 10.
std::string walker(std::int64_t ped, std::int64_t first, std::int64_t count, Vec2 start, Vec2 step,
                   std::int64_t skip = -1) {
  std::string out;
  for (std::int64_t f = 0; f < count; ++f) {
    if (f == skip) continue;
    const Vec2 p = start + step * double(f);
    out += std::to_string((first + f) * 10) + " " + std::to_string(ped) + " " +
           std::to_string(p.x) + " " + std::to_string(p.y) + "\n";
  }
  return out;
}

}  // namespace

TEST(Parse, SingleLine) {
  const auto scene = parse_dataset_text("10 3 1.5 2.0\n", "s");
  ASSERT_EQ(scene.observations.size(), 1u);
  EXPECT_EQ(scene.observations[0].frame, 10);
  EXPECT_EQ(scene.observations[0].ped, 3);
  EXPECT_EQ(scene.observations[0].position, Vec2(1.5, 2.0));
}

TEST(Parse, FloatIdsAndBlankLines) {
  const auto scene = parse_dataset_text("\n10.0\t3.0  1.5 2.0\n\n20.0 3.0 1.9 2.0\n", "s");
  ASSERT_EQ(scene.observations.size(), 2u);
  EXPECT_EQ(scene.observations[1].frame, 20);
  EXPECT_EQ(scene.frame_stride, 10);
}

TEST(Parse, EmptyFileGivesNoWindows) {
  const auto dir = fs::temp_directory_path() / "crowdnav_data_empty";
  fs::create_directories(dir);
  std::ofstream(dir / "empty.txt").close();
  const auto scene = parse_dataset(dir / "empty.txt");
  EXPECT_EQ(scene.name, "empty");
  EXPECT_TRUE(scene.observations.empty());
  EXPECT_TRUE(make_windows(scene).empty());
}

TEST(Parse, ThreeFieldsNamesLine) {
  try {
    parse_dataset_text("10 3 1.5 2.0\n20 3 1.5\n", "scene");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("scene:2"), std::string::npos);
  }
  EXPECT_THROW(parse_dataset_text("10 3 abc 2.0\n", "s"), ParseError);
  EXPECT_THROW(parse_dataset_text("10 3 1 2\n10 3 1 2\n", "s"), ParseError);
}

TEST(Parse, MissingFile) {
  EXPECT_THROW(parse_dataset("/nonexistent/crowdnav.txt"), Error);
}

TEST(Parse, SerializeRoundTripsBitExactly) {
  crowdnav::Rng rng(5);
  DatasetScene scene;
  scene.name = "r";
  for (int f = 0; f < 50; ++f) {
    for (int p = 0; p < 3; ++p) {
      scene.observations.push_back({f * 10, p, {rng.uniform(-20, 20), rng.normal() * 1e-3}});
    }
  }
  const auto back = parse_dataset_text(serialize_scene(scene), "r");
  ASSERT_EQ(back.observations.size(), scene.observations.size());
  for (std::size_t i = 0; i < scene.observations.size(); ++i) {
    EXPECT_EQ(back.observations[i].frame, scene.observations[i].frame);
    EXPECT_EQ(back.observations[i].ped, scene.observations[i].ped);
    EXPECT_EQ(back.observations[i].position, scene.observations[i].position);
  }
  EXPECT_EQ(serialize_scene(back), serialize_scene(scene));
}

TEST(Windows, ExactSpan) {
  const auto scene = parse_dataset_text(walker(1, 0, 20, {0, 0}, {0.4, 0}), "w");
  const auto windows = make_windows(scene, 8, 12, 1);
  ASSERT_EQ(windows.size(), 1u);
  EXPECT_EQ(windows[0].agent_ids, std::vector<std::int64_t>{1});
  EXPECT_EQ(windows[0].observed[0].size(), 8u);
  EXPECT_EQ(windows[0].future[0].size(), 12u);
  EXPECT_EQ(windows[0].future[0].back(), scene.observations.back().position);
}

TEST(Windows, StrideTwenty) {
  const auto scene = parse_dataset_text(walker(1, 0, 40, {0, 0}, {0.4, 0}), "w");
  EXPECT_EQ(make_windows(scene, 8, 12, 20).size(), 2u);
  EXPECT_EQ(make_windows(scene, 8, 12, 1).size(), 21u);
}

TEST(Windows, GapExcludesAgent) {
  const std::string text =
      walker(1, 0, 40, {0, 0}, {0.4, 0}, 5) + walker(2, 0, 40, {0, 3}, {0.3, 0});
  const auto windows = make_windows(parse_dataset_text(text, "g"), 8, 12, 1);
  ASSERT_EQ(windows.size(), 21u);
  for (const auto& w : windows) {
    const bool covers_gap = w.start_frame <= 50 && 50 < w.start_frame + 200;
    const bool has_one =
        std::find(w.agent_ids.begin(), w.agent_ids.end(), 1) != w.agent_ids.end();
    EXPECT_EQ(has_one, !covers_gap) << w.start_frame;
  }
}

TEST(Windows, EachAgentStartPairOnce) {
  std::string text;
  for (int p = 0; p < 5; ++p) text += walker(p, p * 3, 25 + p, {double(p), 0}, {0.1, 0.2});
  const auto windows = make_windows(parse_dataset_text(text, "u"), 8, 12, 1);
  std::set<std::pair<std::int64_t, std::int64_t>> seen;
  for (const auto& w : windows) {
    EXPECT_FALSE(w.agent_ids.empty());
    for (const auto id : w.agent_ids) EXPECT_TRUE(seen.insert({id, w.start_frame}).second);
  }
}

TEST(Offline, LinearWalkersScoreZeroForCv) {
  std::string text;
  for (int p = 0; p < 4; ++p) {
    text += walker(p, p, 30, {double(p), 1.0}, {0.25 * (p + 1), -0.5 + 0.125 * p});
  }
  // Dyadic values keep the extrapolation exact in floating point.
  const auto scene = parse_dataset_text(text, "lin");
  const predict::CvPredictor cv;
  const auto r = evaluate_offline(scene, cv, 1);
  EXPECT_GT(r.windows, 0u);
  EXPECT_EQ(r.ade, 0.0);
  EXPECT_EQ(r.fde, 0.0);
  ASSERT_EQ(r.curve.size(), 12u);
  EXPECT_EQ(r.failures, 0u);
}

TEST(Offline, DeterministicModelsIgnoreKAndSeed) {
  crowdnav::Rng rng(3);
  std::string text;
  for (int p = 0; p < 6; ++p) {
    Vec2 pos{rng.uniform(0, 10), rng.uniform(0, 10)};
    for (int f = 0; f < 30; ++f) {
      pos += Vec2{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
      text += std::to_string((p + f) * 10) + " " + std::to_string(p) + " " +
              std::to_string(pos.x) + " " + std::to_string(pos.y) + "\n";
    }
  }
  const auto scene = parse_dataset_text(text, "rand");
  const predict::CvPredictor cv;
  const predict::LinRegPredictor lr;
  const predict::ConstAccPredictor ca;
  for (const predict::Predictor* m : std::initializer_list<const predict::Predictor*>{&cv, &lr, &ca}) {
    const auto a = evaluate_offline(scene, *m, 1);
    const auto b = evaluate_offline(scene, *m, 999);
    EXPECT_EQ(a.ade, b.ade);
    EXPECT_EQ(a.fde, b.fde);
    EXPECT_GT(a.ade, 0.0);
  }
  const predict::CvnPredictor cvn20(20, 0.0);
  const predict::CvnPredictor cvn1(1, 0.0);
  EXPECT_EQ(evaluate_offline(scene, cvn20, 4).ade, evaluate_offline(scene, cv, 4).ade);
  EXPECT_EQ(evaluate_offline(scene, cvn1, 4).ade, evaluate_offline(scene, cv, 4).ade);
}

TEST(Offline, ReportFiles) {
  const auto scene = parse_dataset_text(walker(1, 0, 25, {0, 0}, {0.5, 0}), "one");
  const predict::CvPredictor cv;
  const std::vector<OfflineResult> results{evaluate_offline(scene, cv, 1)};
  const auto dir = fs::temp_directory_path() / "crowdnav_offline_report";
  fs::create_directories(dir);
  write_offline_report(results, dir / "r.csv");
  write_offline_curve(results, dir / "c.csv");
  std::ifstream r(dir / "r.csv");
  std::string line;
  std::getline(r, line);
  EXPECT_EQ(line, "scene,model,k,ade,fde");
  std::getline(r, line);
  EXPECT_EQ(line.rfind("one,cv,1,", 0), 0u);
  std::ifstream c(dir / "c.csv");
  std::getline(c, line);
  EXPECT_EQ(line, "scene,model,step,err_min,ci95");
}

TEST(Offline, StandardSceneLookup) {
  const auto dir = fs::temp_directory_path() / "crowdnav_std_scenes";
  fs::remove_all(dir);
  fs::create_directories(dir / "hotel" / "test");
  std::ofstream(dir / "hotel" / "test" / "biwi_hotel.txt") << "0 1 0 0\n";
  const auto& scenes = standard_scenes();
  ASSERT_EQ(scenes.size(), 5u);
  const auto hotel = std::find_if(scenes.begin(), scenes.end(), [](auto& s) { return s.name == "hotel"; });
  ASSERT_NE(hotel, scenes.end());
  const auto files = find_scene_files(dir, *hotel);
  ASSERT_EQ(files.size(), 1u);
  EXPECT_EQ(files[0].filename(), "biwi_hotel.txt");
  EXPECT_TRUE(find_scene_files(dir, scenes.front()).empty());
}
