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

#include "trajprop/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

namespace trajprop::svg
{
namespace
{

const char * kPredictionColors[] = {"#d62728", "#ff7f0e", "#bcbd22",
                                    "#17becf", "#9467bd", "#8c564b"};
constexpr std::size_t kPredictionColorCount = 6;

struct Box
{
  double min_x = std::numeric_limits<double>::infinity();
  double min_y = std::numeric_limits<double>::infinity();
  double max_x = -std::numeric_limits<double>::infinity();
  double max_y = -std::numeric_limits<double>::infinity();

  void add(const Vec2 & p)
  {
    min_x = std::min(min_x, p.x);
    min_y = std::min(min_y, p.y);
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  }
  bool valid() const { return min_x <= max_x; }
};

std::string num(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

// World y points up; SVG y points down.
std::string point_list(const std::vector<Vec2> & pts)
{
  std::string out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i > 0) {
      out += ' ';
    }
    out += num(pts[i].x) + ',' + num(-pts[i].y);
  }
  return out;
}

std::vector<Vec2> positions(const std::vector<TimedPoint> & pts)
{
  std::vector<Vec2> out;
  out.reserve(pts.size());
  for (const auto & tp : pts) {
    out.push_back(tp.pos());
  }
  return out;
}

void write_polyline(
  std::ostringstream & os, const std::vector<Vec2> & pts, const std::string & stroke,
  double width, const char * dash = nullptr)
{
  os << "  <polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << num(width)
     << "\"";
  if (dash != nullptr) {
    os << " stroke-dasharray=\"" << dash << "\"";
  }
  os << " points=\"" << point_list(pts) << "\"/>\n";
}

void write_polygon(
  std::ostringstream & os, const geo::Polygon & poly, const std::string & fill,
  const std::string & stroke)
{
  os << "  <polygon fill=\"" << fill << "\" fill-opacity=\"0.5\" stroke=\"" << stroke
     << "\" stroke-width=\"0.1\" points=\"" << point_list(poly) << "\"/>\n";
}

}  // namespace

std::string render_svg(const Scene & scene, const predict::PredictionSet & predictions)
{
  const Agent * target = nullptr;
  for (const Agent & agent : scene.agents) {
    if (agent.id == predictions.agent_id) {
      target = &agent;
    }
  }

  Box box;
  if (scene.map) {
    for (const auto * area : {&scene.map->movable_area, &scene.map->drivable_area}) {
      if (*area) {
        for (const auto & poly : (*area)->polygons) {
          for (const Vec2 & v : poly) {
            box.add(v);
          }
        }
      }
    }
    for (const auto & line : scene.map->reference_lines) {
      for (const Vec2 & v : line.polyline) {
        box.add(v);
      }
    }
  }
  for (const Agent & agent : scene.agents) {
    for (const auto & tp : agent.history.points) {
      box.add(tp.pos());
    }
    for (const auto & tp : agent.future.points) {
      box.add(tp.pos());
    }
  }
  for (const auto & pred : predictions.predictions) {
    for (const auto & tp : pred.points) {
      box.add(tp.pos());
    }
  }
  if (!box.valid()) {
    throw Error("render_svg: nothing to draw");
  }

  const double margin = 5.0;
  const double x0 = box.min_x - margin;
  const double y0 = -(box.max_y + margin);  // flipped
  const double w = box.max_x - box.min_x + 2.0 * margin;
  const double h = box.max_y - box.min_y + 2.0 * margin;
  const double fs = std::max(w, h) * 0.03;  // legend font size

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << num(x0) << ' ' << num(y0) << ' '
     << num(w) << ' ' << num(h) << "\" width=\"800\" height=\""
     << num(800.0 * h / w) << "\">\n";

  if (scene.map) {
    if (scene.map->drivable_area) {
      for (const auto & poly : scene.map->drivable_area->polygons) {
        write_polygon(os, poly, "#e6eef7", "#9bb3cc");
      }
    }
    if (scene.map->movable_area) {
      for (const auto & poly : scene.map->movable_area->polygons) {
        write_polygon(os, poly, "#dcefdc", "#88aa88");
      }
    }
    for (const auto & line : scene.map->reference_lines) {
      write_polyline(os, line.polyline, "#888888", 0.12, "1.2 0.8");
    }
  }

  for (const Agent & agent : scene.agents) {
    write_polyline(os, positions(agent.history.points), "#1f77b4", 0.25);
    if (!agent.history.points.empty()) {
      const Vec2 last = agent.history.points.back().pos();
      os << "  <circle cx=\"" << num(last.x) << "\" cy=\"" << num(-last.y)
         << "\" r=\"0.35\" fill=\"#1f77b4\"/>\n";
    }
  }
  if (target != nullptr && !target->future.points.empty()) {
    write_polyline(os, positions(target->future.points), "#2ca02c", 0.25, "0.8 0.5");
  }
  for (std::size_t i = 0; i < predictions.predictions.size(); ++i) {
    write_polyline(
      os, positions(predictions.predictions[i].points),
      kPredictionColors[i % kPredictionColorCount], 0.2);
  }

  // Legend.
  const double lx = x0 + fs;
  double ly = y0 + 2.0 * fs;
  os << "  <text x=\"" << num(lx) << "\" y=\"" << num(ly) << "\" font-size=\"" << num(fs)
     << "\" font-family=\"sans-serif\">scene " << scene.id << " / agent " << predictions.agent_id
     << "</text>\n";
  const auto legend_entry = [&](const std::string & color, const std::string & label,
                                const char * dash) {
    ly += 1.5 * fs;
    os << "  <line x1=\"" << num(lx) << "\" y1=\"" << num(ly - 0.3 * fs) << "\" x2=\""
       << num(lx + 3.0 * fs) << "\" y2=\"" << num(ly - 0.3 * fs) << "\" stroke=\"" << color
       << "\" stroke-width=\"" << num(0.25 * fs) << "\"";
    if (dash != nullptr) {
      os << " stroke-dasharray=\"" << dash << "\"";
    }
    os << "/>\n";
    os << "  <text x=\"" << num(lx + 4.0 * fs) << "\" y=\"" << num(ly) << "\" font-size=\""
       << num(fs) << "\" font-family=\"sans-serif\">" << label << "</text>\n";
  };
  legend_entry("#1f77b4", "history", nullptr);
  if (target != nullptr && !target->future.points.empty()) {
    legend_entry("#2ca02c", "ground truth", "0.8 0.5");
  }
  for (std::size_t i = 0; i < predictions.predictions.size(); ++i) {
    legend_entry(
      kPredictionColors[i % kPredictionColorCount],
      "prediction " + std::to_string(i + 1) + " (score " +
        num(predictions.predictions[i].score) + ")",
      nullptr);
  }

  os << "</svg>\n";
  return os.str();
}

void emit_svg(
  const Scene & scene, const predict::PredictionSet & predictions, const std::string & path)
{
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw Error("cannot write SVG file '" + path + "'");
  }
  os << render_svg(scene, predictions);
  if (!os) {
    throw Error("failed while writing '" + path + "'");
  }
}

}  // namespace trajprop::svg
