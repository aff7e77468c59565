#include "crowdnav/golden.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>

#include "crowdnav/error.hpp"

namespace crowdnav::predict {

using nlohmann::json;

namespace {

std::vector<Trajectory> tracks_from_json(const json& j) {
  std::vector<Trajectory> out;
  for (const json& agent : j) {
    Trajectory t;
    for (const json& p : agent) {
      if (p.size() != 2) throw ValidationError("golden positions must be [x, y] pairs");
      t.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    out.push_back(std::move(t));
  }
  return out;
}

json tracks_to_json(const std::vector<Trajectory>& tracks) {
  json out = json::array();
  for (const Trajectory& t : tracks) {
    json agent = json::array();
    for (const Vec2& p : t) agent.push_back(json::array({p.x, p.y}));
    out.push_back(std::move(agent));
  }
  return out;
}

}  // namespace

std::vector<GoldenCase> load_golden(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read golden file " + path.string());
  std::vector<GoldenCase> cases;
  try {
    const json doc = json::parse(in);
    for (const json& c : doc.at("cases")) {
      GoldenCase g;
      g.name = c.value("name", std::string("case") + std::to_string(cases.size()));
      g.history = tracks_from_json(c.at("history"));
      const auto z = c.at("z").get<std::vector<double>>();
      g.z = Eigen::Map<const Eigen::VectorXd>(z.data(), static_cast<Eigen::Index>(z.size()));
      g.expected = tracks_from_json(c.at("expected"));
      if (g.history.empty() || g.history.size() != g.expected.size() || g.expected.front().empty()) {
        throw ValidationError("golden case '" + g.name + "' has inconsistent shapes");
      }
      cases.push_back(std::move(g));
    }
  } catch (const json::exception& e) {
    throw ValidationError("golden file " + path.string() + ": " + e.what());
  }
  return cases;
}

void save_golden(const std::vector<GoldenCase>& cases, const std::filesystem::path& path) {
  json list = json::array();
  for (const GoldenCase& c : cases) {
    list.push_back(json{{"name", c.name},
                        {"history", tracks_to_json(c.history)},
                        {"z", std::vector<double>(c.z.data(), c.z.data() + c.z.size())},
                        {"expected", tracks_to_json(c.expected)}});
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << json{{"cases", list}}.dump(1) << '\n';
}

std::vector<GoldenResult> golden_check(const SganNetwork& network,
                                       const std::vector<GoldenCase>& cases, double tolerance) {
  std::vector<GoldenResult> out;
  for (const GoldenCase& c : cases) {
    if (c.z.size() != static_cast<Eigen::Index>(network.hyper().latent_dim)) {
      throw ValidationError("golden case '" + c.name + "': latent size differs from the model");
    }
    const auto got = network.sample(c.history, c.z, c.expected.front().size());
    GoldenResult r;
    r.name = c.name;
    for (std::size_t i = 0; i < got.size(); ++i) {
      if (got[i].size() != c.expected[i].size()) {
        throw ValidationError("golden case '" + c.name + "' has ragged expected output");
      }
      for (std::size_t t = 0; t < got[i].size(); ++t) {
        r.max_abs_error = std::max({r.max_abs_error, std::abs(got[i][t].x - c.expected[i][t].x),
                                    std::abs(got[i][t].y - c.expected[i][t].y)});
      }
    }
    r.pass = r.max_abs_error <= tolerance;
    out.push_back(r);
  }
  return out;
}

}  // namespace crowdnav::predict
