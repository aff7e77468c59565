#include "crowdnav/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "crowdnav/error.hpp"
#include "crowdnav/random.hpp"

namespace crowdnav::data {

namespace {

template <typename T>
bool parse_field(std::string_view field, T& out) {
  const char* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

// Frame ids are sometimes written as floats ("10.0").
bool parse_frame(std::string_view field, std::int64_t& out) {
  if (parse_field(field, out)) return true;
  double v = 0.0;
  if (!parse_field(field, v) || v != std::floor(v) || std::abs(v) > 9e15) return false;
  out = static_cast<std::int64_t>(v);
  return true;
}

std::vector<std::string_view> fields_of(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

}  // namespace

DatasetScene parse_dataset_text(std::string_view text, const std::string& name) {
  DatasetScene scene;
  scene.name = name;
  std::set<std::pair<std::int64_t, std::int64_t>> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    const auto f = fields_of(line);
    if (f.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (f.size() != 4) {
      throw ParseError(name, line_no, fmt::format("expected 4 fields, got {}", f.size()));
    }
    Observation o;
    if (!parse_frame(f[0], o.frame) || !parse_frame(f[1], o.ped) ||
        !parse_field(f[2], o.position.x) || !parse_field(f[3], o.position.y)) {
      throw ParseError(name, line_no, "malformed number");
    }
    if (!o.position.finite()) throw ParseError(name, line_no, "non-finite position");
    if (!seen.emplace(o.frame, o.ped).second) {
      throw ParseError(name, line_no, "duplicate (frame, pedestrian) pair");
    }
    scene.observations.push_back(o);
    if (end == text.size()) break;
  }
  std::set<std::int64_t> frames;
  for (const Observation& o : scene.observations) frames.insert(o.frame);
  std::int64_t stride = 0;
  for (auto it = frames.begin(); it != frames.end() && std::next(it) != frames.end(); ++it) {
    const std::int64_t gap = *std::next(it) - *it;
    if (stride == 0 || gap < stride) stride = gap;
  }
  if (stride > 0) scene.frame_stride = stride;
  return scene;
}

DatasetScene parse_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read dataset " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  DatasetScene scene = parse_dataset_text(buffer.str(), path.stem().string());
  return scene;
}

std::string serialize_scene(const DatasetScene& scene) {
  std::string out;
  for (const Observation& o : scene.observations) {
    out += fmt::format("{}\t{}\t{}\t{}\n", o.frame, o.ped, o.position.x, o.position.y);
  }
  return out;
}

std::vector<ObservationWindow> make_windows(const DatasetScene& scene, std::size_t observed,
                                            std::size_t horizon, std::size_t stride) {
  if (observed < 1 || horizon < 1 || stride < 1) {
    throw ValidationError("windows need h, T and stride of at least 1");
  }
  std::vector<ObservationWindow> out;
  if (scene.observations.empty()) return out;
  const std::int64_t step = scene.frame_stride;
  std::int64_t first = scene.observations.front().frame;
  std::int64_t last = first;
  for (const Observation& o : scene.observations) {
    first = std::min(first, o.frame);
    last = std::max(last, o.frame);
  }
  // Grid index -> ped -> position. Off-grid frames are ignored.
  std::map<std::int64_t, std::map<std::int64_t, Vec2>> grid;
  for (const Observation& o : scene.observations) {
    if ((o.frame - first) % step != 0) continue;
    grid[(o.frame - first) / step][o.ped] = o.position;
  }
  const auto cells = static_cast<std::size_t>((last - first) / step + 1);
  const std::size_t span = observed + horizon;
  if (cells < span) return out;
  for (std::size_t start = 0; start + span <= cells; start += stride) {
    const auto s = static_cast<std::int64_t>(start);
    const auto head = grid.find(s);
    if (head == grid.end()) continue;
    ObservationWindow w;
    w.start_frame = first + s * step;
    for (const auto& [ped, p0] : head->second) {
      Trajectory track;
      for (std::size_t m = 0; m < span; ++m) {
        const auto cell = grid.find(s + static_cast<std::int64_t>(m));
        if (cell == grid.end()) break;
        const auto hit = cell->second.find(ped);
        if (hit == cell->second.end()) break;
        track.push_back(hit->second);
      }
      if (track.size() != span) continue;
      w.agent_ids.push_back(ped);
      w.observed.emplace_back(track.begin(), track.begin() + static_cast<std::ptrdiff_t>(observed));
      w.future.emplace_back(track.begin() + static_cast<std::ptrdiff_t>(observed), track.end());
    }
    if (!w.agent_ids.empty()) out.push_back(std::move(w));
  }
  return out;
}

OfflineResult evaluate_offline(const DatasetScene& scene, const predict::Predictor& model,
                               std::uint64_t seed, std::size_t observed, std::size_t horizon,
                               std::size_t stride) {
  return evaluate_offline(std::span<const DatasetScene>(&scene, 1), scene.name, model, seed,
                          observed, horizon, stride);
}

OfflineResult evaluate_offline(std::span<const DatasetScene> parts, const std::string& name,
                               const predict::Predictor& model, std::uint64_t seed,
                               std::size_t observed, std::size_t horizon, std::size_t stride) {
  OfflineResult r;
  r.scene = name;
  r.model = model.id();
  r.k = model.num_samples();
  std::vector<double> ade;
  std::vector<double> fde;
  std::vector<std::vector<double>> steps(horizon);
  std::uint64_t index = 0;
  for (const DatasetScene& scene : parts) {
    const auto windows = make_windows(scene, observed, horizon, stride);
    r.windows += windows.size();
    for (const ObservationWindow& window : windows) {
      predict::PredictionRequest req;
      req.histories = window.observed;
      req.dt = scene.dt;
      req.horizon = horizon;
      req.num_samples = model.num_samples();
      req.seed = Rng::mix(seed ^ Rng::mix(index++));
      try {
        const auto set = model.predict(req);
        const auto e = metrics::displacement_errors(window.future, set);
        ade.insert(ade.end(), e.agent_ade.begin(), e.agent_ade.end());
        fde.insert(fde.end(), e.agent_fde.begin(), e.agent_fde.end());
        for (std::size_t i = 0; i < window.future.size(); ++i) {
          for (std::size_t t = 0; t < horizon; ++t) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& s : set.samples) {
              best = std::min(best, distance(s.futures[i][t], window.future[i][t]));
            }
            steps[t].push_back(best);
          }
        }
      } catch (const Error&) {
        ++r.failures;
      }
    }
  }
  r.agents = ade.size();
  if (!ade.empty()) {
    r.ade = metrics::aggregate_ci(ade).mean;
    r.fde = metrics::aggregate_ci(fde).mean;
    for (const auto& column : steps) r.curve.push_back(metrics::aggregate_ci(column));
  }
  return r;
}

void write_offline_report(const std::vector<OfflineResult>& results,
                          const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "scene,model,k,ade,fde\n";
  for (const OfflineResult& r : results) {
    out << fmt::format("{},{},{},{:.6f},{:.6f}\n", r.scene, r.model, r.k, r.ade, r.fde);
  }
}

void write_offline_curve(const std::vector<OfflineResult>& results,
                         const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "scene,model,step,err_min,ci95\n";
  for (const OfflineResult& r : results) {
    for (std::size_t t = 0; t < r.curve.size(); ++t) {
      out << fmt::format("{},{},{},{:.6f},{:.6f}\n", r.scene, r.model, t + 1, r.curve[t].mean,
                         r.curve[t].ci95);
    }
  }
}

const std::vector<StandardScene>& standard_scenes() {
  static const std::vector<StandardScene> scenes{
      {"eth", {{"eth.txt"}, {"biwi_eth.txt"}}},
      {"hotel", {{"hotel.txt"}, {"biwi_hotel.txt"}}},
      {"zara1", {{"zara1.txt"}, {"crowds_zara01.txt"}}},
      {"zara2", {{"zara2.txt"}, {"crowds_zara02.txt"}}},
      {"univ", {{"univ.txt"}, {"students001.txt", "students003.txt"}, {"students001.txt"}}},
  };
  return scenes;
}

std::vector<std::filesystem::path> find_scene_files(const std::filesystem::path& directory,
                                                    const StandardScene& scene) {
  const std::filesystem::path roots[] = {directory, directory / scene.name,
                                         directory / scene.name / "test"};
  for (const auto& root : roots) {
    for (const auto& files : scene.alternatives) {
      std::vector<std::filesystem::path> found;
      for (const std::string& f : files) {
        if (std::filesystem::is_regular_file(root / f)) found.push_back(root / f);
      }
      if (found.size() == files.size()) return found;
    }
  }
  return {};
}

}  // namespace crowdnav::data
