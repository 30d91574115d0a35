#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "nav/eval.hpp"

namespace nav {

namespace {

const char* kind_color(ObstacleKind k) {
  switch (k) {
    case ObstacleKind::full_height: return "#4a6fa5";
    case ObstacleKind::low_profile: return "#d9822b";
    case ObstacleKind::overhang: return "#9651a8";
    case ObstacleKind::shelf_leg: return "#5a7d5a";
    case ObstacleKind::shelf_slab: return "#b5484d";
  }
  return "#000000";
}

struct Mapper {
  double scale, cx, cy;
  double x(double wx) const { return cx + wx * scale; }
  double y(double wy) const { return cy - wy * scale; }  // y up in world, down in svg
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

void render_scene_svg(const SceneSpec& scene, const std::vector<TrajectoryPoint>* trajectory,
                      const std::string& path) {
  const double E = scene.arena_half_extent;
  const double margin = 70.0;
  const double scale = 640.0 / (2.0 * E);
  const double size = 640.0 + 2.0 * margin;
  Mapper m{scale, size / 2.0, size / 2.0};

  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write svg " + path);
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << int(size + 180) << "\" height=\""
    << int(size) << "\" viewBox=\"0 0 " << int(size + 180) << " " << int(size) << "\">\n";
  f << "<defs><pattern id=\"hatch\" width=\"6\" height=\"6\" patternTransform=\"rotate(45)\" "
       "patternUnits=\"userSpaceOnUse\"><line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"6\" "
       "stroke=\"white\" stroke-width=\"2\"/></pattern></defs>\n";
  f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // Arena walls.
  f << "<rect x=\"" << fmt(m.x(-E)) << "\" y=\"" << fmt(m.y(E)) << "\" width=\""
    << fmt(2 * E * scale) << "\" height=\"" << fmt(2 * E * scale)
    << "\" fill=\"#f7f7f7\" stroke=\"#222\" stroke-width=\"3\"/>\n";

  // Axes ticks in meters along the bottom and left edges.
  for (int t = int(std::ceil(-E)); t <= int(std::floor(E)); ++t) {
    f << "<line x1=\"" << fmt(m.x(t)) << "\" y1=\"" << fmt(m.y(-E)) << "\" x2=\"" << fmt(m.x(t))
      << "\" y2=\"" << fmt(m.y(-E) + 6) << "\" stroke=\"#222\"/>\n";
    f << "<text x=\"" << fmt(m.x(t)) << "\" y=\"" << fmt(m.y(-E) + 22)
      << "\" font-size=\"12\" text-anchor=\"middle\">" << t << "</text>\n";
    f << "<line x1=\"" << fmt(m.x(-E)) << "\" y1=\"" << fmt(m.y(t)) << "\" x2=\""
      << fmt(m.x(-E) - 6) << "\" y2=\"" << fmt(m.y(t)) << "\" stroke=\"#222\"/>\n";
    f << "<text x=\"" << fmt(m.x(-E) - 12) << "\" y=\"" << fmt(m.y(t) + 4)
      << "\" font-size=\"12\" text-anchor=\"end\">" << t << "</text>\n";
  }
  f << "<text x=\"" << fmt(m.x(0)) << "\" y=\"" << fmt(m.y(-E) + 42)
    << "\" font-size=\"13\" text-anchor=\"middle\">x [m]</text>\n";
  f << "<text x=\"" << fmt(m.x(-E) - 44) << "\" y=\"" << fmt(m.y(0))
    << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 "
    << fmt(m.x(-E) - 44) << " " << fmt(m.y(0)) << ")\">y [m]</text>\n";

  // Obstacles, out-of-plane kinds hatched.
  for (const auto& ob : scene.obstacles) {
    bool oop = kind_is_out_of_plane(ob.kind);
    std::string fill = kind_color(ob.kind);
    std::string shape;
    if (ob.footprint.shape == Footprint::Shape::circle) {
      shape = "<circle cx=\"" + fmt(m.x(ob.footprint.center.x)) + "\" cy=\"" +
              fmt(m.y(ob.footprint.center.y)) + "\" r=\"" + fmt(ob.footprint.radius * scale) +
              "\"";
    } else {
      double w = 2 * ob.footprint.half.x * scale, h = 2 * ob.footprint.half.y * scale;
      shape = "<rect x=\"" + fmt(-w / 2) + "\" y=\"" + fmt(-h / 2) + "\" width=\"" + fmt(w) +
              "\" height=\"" + fmt(h) + "\" transform=\"translate(" +
              fmt(m.x(ob.footprint.center.x)) + " " + fmt(m.y(ob.footprint.center.y)) +
              ") rotate(" + fmt(-ob.footprint.yaw * 180.0 / M_PI) + ")\"";
    }
    f << shape << " fill=\"" << fill << "\" stroke=\"#222\"/>\n";
    if (oop) f << shape << " fill=\"url(#hatch)\" stroke=\"none\"/>\n";
  }

  // Trajectory polyline.
  if (trajectory && !trajectory->empty()) {
    f << "<polyline fill=\"none\" stroke=\"#e03131\" stroke-width=\"2\" points=\"";
    for (const auto& p : *trajectory) f << fmt(m.x(p.pose.x)) << "," << fmt(m.y(p.pose.y)) << " ";
    f << "\"/>\n";
  }

  // Start (circle with heading tick) and goal (cross).
  double sx = m.x(scene.start_pose.x), sy = m.y(scene.start_pose.y);
  f << "<circle cx=\"" << fmt(sx) << "\" cy=\"" << fmt(sy)
    << "\" r=\"8\" fill=\"none\" stroke=\"#2b8a3e\" stroke-width=\"3\"/>\n";
  f << "<line x1=\"" << fmt(sx) << "\" y1=\"" << fmt(sy) << "\" x2=\""
    << fmt(sx + 14 * std::cos(scene.start_pose.theta)) << "\" y2=\""
    << fmt(sy - 14 * std::sin(scene.start_pose.theta))
    << "\" stroke=\"#2b8a3e\" stroke-width=\"3\"/>\n";
  double gx = m.x(scene.goal_position.x), gy = m.y(scene.goal_position.y);
  f << "<path d=\"M " << fmt(gx - 8) << " " << fmt(gy - 8) << " L " << fmt(gx + 8) << " "
    << fmt(gy + 8) << " M " << fmt(gx - 8) << " " << fmt(gy + 8) << " L " << fmt(gx + 8) << " "
    << fmt(gy - 8) << "\" stroke=\"#e8590c\" stroke-width=\"3\"/>\n";

  // Legend.
  double lx = size + 10, ly = 30;
  f << "<text x=\"" << fmt(lx) << "\" y=\"" << fmt(ly)
    << "\" font-size=\"14\" font-weight=\"bold\">legend</text>\n";
  const ObstacleKind kinds[] = {ObstacleKind::full_height, ObstacleKind::low_profile,
                                ObstacleKind::overhang, ObstacleKind::shelf_leg,
                                ObstacleKind::shelf_slab};
  for (ObstacleKind k : kinds) {
    ly += 24;
    f << "<rect x=\"" << fmt(lx) << "\" y=\"" << fmt(ly - 12)
      << "\" width=\"16\" height=\"16\" fill=\"" << kind_color(k) << "\" stroke=\"#222\"/>\n";
    if (kind_is_out_of_plane(k)) {
      f << "<rect x=\"" << fmt(lx) << "\" y=\"" << fmt(ly - 12)
        << "\" width=\"16\" height=\"16\" fill=\"url(#hatch)\"/>\n";
    }
    f << "<text x=\"" << fmt(lx + 22) << "\" y=\"" << fmt(ly) << "\" font-size=\"12\">"
      << obstacle_kind_name(k) << (kind_is_out_of_plane(k) ? " (out of scan plane)" : "")
      << "</text>\n";
  }
  ly += 24;
  f << "<circle cx=\"" << fmt(lx + 8) << "\" cy=\"" << fmt(ly - 5)
    << "\" r=\"6\" fill=\"none\" stroke=\"#2b8a3e\" stroke-width=\"2\"/>\n";
  f << "<text x=\"" << fmt(lx + 22) << "\" y=\"" << fmt(ly) << "\" font-size=\"12\">start</text>\n";
  ly += 24;
  f << "<text x=\"" << fmt(lx + 2) << "\" y=\"" << fmt(ly)
    << "\" font-size=\"14\" fill=\"#e8590c\">x</text>\n";
  f << "<text x=\"" << fmt(lx + 22) << "\" y=\"" << fmt(ly) << "\" font-size=\"12\">goal</text>\n";
  if (trajectory && !trajectory->empty()) {
    ly += 24;
    f << "<line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly - 5) << "\" x2=\"" << fmt(lx + 16)
      << "\" y2=\"" << fmt(ly - 5) << "\" stroke=\"#e03131\" stroke-width=\"2\"/>\n";
    f << "<text x=\"" << fmt(lx + 22) << "\" y=\"" << fmt(ly)
      << "\" font-size=\"12\">path</text>\n";
  }
  f << "</svg>\n";
}

}  // namespace nav
