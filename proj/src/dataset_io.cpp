// Copyright 2026 The trajprop Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "trajprop/dataset_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <utility>

#include <json.hpp>

namespace trajprop::io
{
namespace
{

using nlohmann::json;

constexpr const char * kCsvHeader = "scene_id,agent_id,agent_type,frame_index,t_seconds,x_m,y_m";

[[noreturn]] void line_error(const std::string & path, std::size_t line, const std::string & what)
{
  throw Error(path + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string> split_fields(const std::string & line)
{
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_double(
  const std::string & s, const std::string & path, std::size_t line, const char * what)
{
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception &) {
    line_error(path, line, std::string("invalid ") + what + " '" + s + "'");
  }
  if (used != s.size() || !std::isfinite(v)) {
    line_error(path, line, std::string("invalid ") + what + " '" + s + "'");
  }
  return v;
}

long parse_frame(const std::string & s, const std::string & path, std::size_t line)
{
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(s, &used);
  } catch (const std::exception &) {
    line_error(path, line, "invalid frame_index '" + s + "'");
  }
  if (used != s.size() || v < 0) {
    line_error(path, line, "invalid frame_index '" + s + "'");
  }
  return v;
}

void check_id(const std::string & id, const char * what)
{
  if (id.empty() || id.find(',') != std::string::npos || id.find('\n') != std::string::npos) {
    throw Error(std::string(what) + " '" + id + "' must be non-empty and free of commas");
  }
}

struct AgentRows
{
  AgentType type = AgentType::vehicle;
  bool type_known = false;
  long last_frame = -1;
  std::vector<TimedPoint> points;
};

json area_to_json(const geo::MovableArea & area)
{
  json polys = json::array();
  for (const auto & poly : area.polygons) {
    json jp = json::array();
    for (const Vec2 & v : poly) {
      jp.push_back(json::array({v.x, v.y}));
    }
    polys.push_back(std::move(jp));
  }
  return polys;
}

geo::MovableArea area_from_json(const json & j, const std::string & path)
{
  geo::MovableArea area;
  if (!j.is_array()) {
    throw Error(path + ": area must be an array of polygons");
  }
  for (const auto & jp : j) {
    geo::Polygon poly;
    for (const auto & jv : jp) {
      if (!jv.is_array() || jv.size() != 2) {
        throw Error(path + ": polygon vertex must be [x, y]");
      }
      poly.push_back({jv.at(0).get<double>(), jv.at(1).get<double>()});
    }
    area.polygons.push_back(std::move(poly));
  }
  geo::validate_area(area);
  return area;
}

json map_to_json(const geo::MapContext & map)
{
  json j;
  json lines = json::array();
  for (const auto & line : map.reference_lines) {
    json jl;
    jl["id"] = line.id;
    json pts = json::array();
    for (const Vec2 & v : line.polyline) {
      pts.push_back(json::array({v.x, v.y}));
    }
    jl["points"] = std::move(pts);
    lines.push_back(std::move(jl));
  }
  j["reference_lines"] = std::move(lines);
  if (map.movable_area) {
    j["movable_area"] = area_to_json(*map.movable_area);
  }
  if (map.drivable_area) {
    j["drivable_area"] = area_to_json(*map.drivable_area);
  }
  return j;
}

geo::MapContext map_from_json(const json & j, const std::string & path)
{
  geo::MapContext map;
  if (j.contains("reference_lines")) {
    for (const auto & jl : j.at("reference_lines")) {
      const std::string id = jl.at("id").get<std::string>();
      std::vector<Vec2> pts;
      for (const auto & jv : jl.at("points")) {
        if (!jv.is_array() || jv.size() != 2) {
          throw Error(path + ": reference-line point must be [x, y]");
        }
        pts.push_back({jv.at(0).get<double>(), jv.at(1).get<double>()});
      }
      for (const auto & existing : map.reference_lines) {
        if (existing.id == id) {
          throw Error(path + ": duplicate reference-line id '" + id + "'");
        }
      }
      map.reference_lines.push_back(proposal::make_reference_line(id, std::move(pts)));
    }
  }
  if (j.contains("movable_area")) {
    map.movable_area = area_from_json(j.at("movable_area"), path);
  }
  if (j.contains("drivable_area")) {
    map.drivable_area = area_from_json(j.at("drivable_area"), path);
  }
  return map;
}

}  // namespace

std::string format_double(double v)
{
  char buf[40];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) {
      break;
    }
  }
  return buf;
}

std::vector<Scene> load_trajectories(const std::string & path, const Horizon & horizon)
{
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    throw Error("cannot open trajectory file '" + path + "'");
  }
  const long n_obs = horizon.history_points();
  const long n_pre = horizon.future_points();

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(is, line) || line != kCsvHeader) {
    line_error(path, 1, std::string("first line must be the header '") + kCsvHeader + "'");
  }
  ++line_no;

  std::map<std::string, std::map<std::string, AgentRows>> accum;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    const auto fields = split_fields(line);
    if (fields.size() != 7) {
      line_error(path, line_no,
        "expected 7 fields, got " + std::to_string(fields.size()));
    }
    AgentRows & agent = accum[fields[0]][fields[1]];
    AgentType type;
    try {
      type = agent_type_from_string(fields[2]);
    } catch (const Error & e) {
      line_error(path, line_no, e.what());
    }
    if (agent.type_known && type != agent.type) {
      line_error(path, line_no, "agent '" + fields[1] + "' changes type mid-file");
    }
    agent.type = type;
    agent.type_known = true;

    const long frame = parse_frame(fields[3], path, line_no);
    if (frame == agent.last_frame) {
      line_error(path, line_no, "duplicate frame for agent '" + fields[1] + "'");
    }
    if (frame < agent.last_frame) {
      line_error(path, line_no, "out-of-order frame for agent '" + fields[1] + "'");
    }
    agent.last_frame = frame;

    TimedPoint tp;
    tp.t = parse_double(fields[4], path, line_no, "t_seconds");
    tp.x = parse_double(fields[5], path, line_no, "x_m");
    tp.y = parse_double(fields[6], path, line_no, "y_m");
    agent.points.push_back(tp);
  }

  std::vector<Scene> scenes;
  scenes.reserve(accum.size());
  for (auto & [scene_id, agents] : accum) {
    Scene scene;
    scene.id = scene_id;
    for (auto & [agent_id, rows] : agents) {
      const long n = static_cast<long>(rows.points.size());
      if (n != n_obs && n != n_obs + n_pre) {
        throw Error(
          path + ": agent '" + agent_id + "' in scene '" + scene_id + "' has " +
          std::to_string(n) + " rows; horizon needs " + std::to_string(n_obs) + " or " +
          std::to_string(n_obs + n_pre));
      }
      for (long i = 1; i < n; ++i) {
        const double step = rows.points[i].t - rows.points[i - 1].t;
        if (std::abs(step - horizon.dt) > 1e-9) {
          throw Error(
            path + ": agent '" + agent_id + "' in scene '" + scene_id +
            "' has non-uniform dt (got " + format_double(step) + ", horizon dt " +
            format_double(horizon.dt) + ")");
        }
      }

      Agent agent;
      agent.id = agent_id;
      agent.type = rows.type;
      agent.history.horizon = horizon;
      agent.future.horizon = horizon;
      agent.history.points.assign(rows.points.begin(), rows.points.begin() + n_obs);
      agent.future.points.assign(rows.points.begin() + n_obs, rows.points.end());
      validate_trajectory(agent.history);
      if (agent.future.points.size() > 1) {
        validate_trajectory(agent.future);
      }
      scene.agents.push_back(std::move(agent));
    }
    scenes.push_back(std::move(scene));
  }
  return scenes;
}

void save_trajectories(const std::string & path, std::span<const Scene> scenes)
{
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw Error("cannot write trajectory file '" + path + "'");
  }
  os << kCsvHeader << '\n';
  for (const Scene & scene : scenes) {
    check_id(scene.id, "scene id");
    for (const Agent & agent : scene.agents) {
      check_id(agent.id, "agent id");
      long frame = 0;
      const auto emit = [&](const TimedPoint & tp) {
        os << scene.id << ',' << agent.id << ',' << to_string(agent.type) << ',' << frame++ << ','
           << format_double(tp.t) << ',' << format_double(tp.x) << ',' << format_double(tp.y)
           << '\n';
      };
      for (const auto & tp : agent.history.points) {
        emit(tp);
      }
      for (const auto & tp : agent.future.points) {
        emit(tp);
      }
    }
  }
  if (!os) {
    throw Error("failed while writing '" + path + "'");
  }
}

geo::MapContext load_map(const std::string & path)
{
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    throw Error("cannot open map file '" + path + "'");
  }
  try {
    return map_from_json(json::parse(is), path);
  } catch (const json::exception & e) {
    throw Error(path + ": malformed map JSON: " + e.what());
  }
}

void save_map(const std::string & path, const geo::MapContext & map)
{
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw Error("cannot write map file '" + path + "'");
  }
  os << map_to_json(map).dump(2) << '\n';
  if (!os) {
    throw Error("failed while writing '" + path + "'");
  }
}

std::vector<Scene> load_dataset(const std::string & dir, const Horizon & horizon)
{
  namespace fs = std::filesystem;
  const fs::path base(dir);
  const fs::path traj = base / "trajectories.csv";
  if (!fs::exists(traj)) {
    throw Error("dataset directory '" + dir + "' has no trajectories.csv");
  }
  std::vector<Scene> scenes = load_trajectories(traj.string(), horizon);

  const fs::path maps = base / "maps.json";
  if (fs::exists(maps)) {
    std::ifstream is(maps, std::ios::binary);
    if (!is) {
      throw Error("cannot open map file '" + maps.string() + "'");
    }
    try {
      const json j = json::parse(is);
      if (!j.is_object()) {
        throw Error(maps.string() + ": top level must map scene_id to map objects");
      }
      for (Scene & scene : scenes) {
        const auto it = j.find(scene.id);
        if (it != j.end()) {
          scene.map = map_from_json(*it, maps.string());
        }
      }
    } catch (const json::exception & e) {
      throw Error(maps.string() + ": malformed map JSON: " + e.what());
    }
  }
  return scenes;
}

void save_dataset(const std::string & dir, std::span<const Scene> scenes)
{
  namespace fs = std::filesystem;
  const fs::path base(dir);
  std::error_code ec;
  fs::create_directories(base, ec);
  if (ec) {
    throw Error("cannot create dataset directory '" + dir + "': " + ec.message());
  }
  save_trajectories((base / "trajectories.csv").string(), scenes);

  json maps = json::object();
  for (const Scene & scene : scenes) {
    if (scene.map) {
      maps[scene.id] = map_to_json(*scene.map);
    }
  }
  if (!maps.empty()) {
    const fs::path path = base / "maps.json";
    std::ofstream os(path, std::ios::binary);
    if (!os) {
      throw Error("cannot write map file '" + path.string() + "'");
    }
    os << maps.dump(2) << '\n';
    if (!os) {
      throw Error("failed while writing '" + path.string() + "'");
    }
  }
}

}  // namespace trajprop::io
