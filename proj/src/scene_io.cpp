#include "nav/scene_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nav {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

std::string scene_to_text(const SceneSpec& scene) {
  std::ostringstream out;
  out << "scene v1\n";
  out << "arena_half_extent " << fmt(scene.arena_half_extent) << "\n";
  out << "start " << fmt(scene.start_pose.x) << " " << fmt(scene.start_pose.y) << " "
      << fmt(scene.start_pose.theta) << "\n";
  out << "goal " << fmt(scene.goal_position.x) << " " << fmt(scene.goal_position.y) << "\n";
  for (const auto& ob : scene.obstacles) {
    out << "obstacle " << obstacle_kind_name(ob.kind) << " ";
    if (ob.footprint.shape == Footprint::Shape::circle) {
      out << "circle " << fmt(ob.footprint.center.x) << " " << fmt(ob.footprint.center.y) << " "
          << fmt(ob.footprint.radius);
    } else {
      out << "box " << fmt(ob.footprint.center.x) << " " << fmt(ob.footprint.center.y) << " "
          << fmt(ob.footprint.half.x) << " " << fmt(ob.footprint.half.y) << " "
          << fmt(ob.footprint.yaw);
    }
    out << " " << fmt(ob.z_lo) << " " << fmt(ob.z_hi) << "\n";
  }
  return out.str();
}

SceneSpec scene_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  SceneSpec scene;
  scene.obstacles.clear();
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    auto fail = [&](const std::string& why) {
      throw std::runtime_error("scene line " + std::to_string(lineno) + ": " + why);
    };
    if (!header_seen) {
      std::string ver;
      ls >> ver;
      if (tok != "scene" || ver != "v1") fail("expected 'scene v1' header");
      header_seen = true;
    } else if (tok == "arena_half_extent") {
      if (!(ls >> scene.arena_half_extent)) fail("bad arena_half_extent");
    } else if (tok == "start") {
      if (!(ls >> scene.start_pose.x >> scene.start_pose.y >> scene.start_pose.theta)) {
        fail("bad start pose");
      }
    } else if (tok == "goal") {
      if (!(ls >> scene.goal_position.x >> scene.goal_position.y)) fail("bad goal");
    } else if (tok == "obstacle") {
      std::string kind, shape;
      if (!(ls >> kind >> shape)) fail("bad obstacle record");
      ObstacleSpec ob;
      ob.kind = obstacle_kind_from_name(kind);
      if (shape == "circle") {
        Vec2 c;
        double r;
        if (!(ls >> c.x >> c.y >> r >> ob.z_lo >> ob.z_hi)) fail("bad circle obstacle");
        ob.footprint = make_circle(c, r);
      } else if (shape == "box") {
        Vec2 c, half;
        double yaw;
        if (!(ls >> c.x >> c.y >> half.x >> half.y >> yaw >> ob.z_lo >> ob.z_hi)) {
          fail("bad box obstacle");
        }
        ob.footprint = make_box(c, half, yaw);
      } else {
        fail("unknown footprint shape '" + shape + "'");
      }
      scene.obstacles.push_back(ob);
    } else {
      fail("unknown record '" + tok + "'");
    }
  }
  if (!header_seen) throw std::runtime_error("scene file missing 'scene v1' header");
  return scene;
}

void save_scene(const std::string& path, const SceneSpec& scene) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write scene file " + path);
  f << scene_to_text(scene);
}

SceneSpec load_scene(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open scene file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return scene_from_text(ss.str());
}

uint64_t scene_hash(const SceneSpec& scene) {
  std::string text = scene_to_text(scene);
  return fnv1a(text.data(), text.size());
}

}  // namespace nav
