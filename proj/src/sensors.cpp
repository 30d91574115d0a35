#include "nav/sensors.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace nav {

LidarScan raycast_lidar(const RobotState& state, const SceneSpec& scene, const RobotSpec& spec,
                        LidarMode mode, int n_scan, double max_range) {
  if (n_scan < 4) throw std::runtime_error("raycast_lidar: n_scan must be >= 4");
  auto solids = scene_solids(scene);
  LidarScan scan;
  scan.max_range = max_range;
  scan.ranges.resize(n_scan);
  Vec2 origin{state.pose.x, state.pose.y};
  double h = spec.lidar_height;
  for (int i = 0; i < n_scan; ++i) {
    double ang = state.pose.theta + 2.0 * M_PI * i / n_scan;
    Vec2 dir{std::cos(ang), std::sin(ang)};
    double best = max_range;
    for (const auto& s : solids) {
      if (mode == LidarMode::standard) {
        if (s.z_lo > h || s.z_hi < h) continue;
        if (auto iv = ray_footprint(origin, dir, s.footprint)) {
          best = std::min(best, iv->t_in);
        }
      } else {
        if (auto t = ray_inflated_entry(origin, dir, s.footprint, spec.footprint_radius)) {
          best = std::min(best, *t);
        }
      }
    }
    scan.ranges[i] = float(std::max(best, 1e-3));
  }
  return scan;
}

double min_range(const LidarScan& scan) {
  double m = scan.max_range;
  for (float r : scan.ranges) m = std::min(m, double(r));
  return m;
}

DepthPanorama render_depth(const RobotState& state, const SceneSpec& scene,
                           const CameraRig& rig) {
  auto solids = scene_solids(scene);
  const int W = rig.width, H = rig.height;
  DepthPanorama pano;
  pano.width = W;
  pano.height = H;
  pano.depth.assign(size_t(4) * H * W, float(rig.max_depth));

  double tan_h = std::tan(rig.hfov_deg * M_PI / 360.0);
  double tan_v = std::tan(rig.vfov_deg * M_PI / 360.0);
  Vec2 origin{state.pose.x, state.pose.y};

  // Per-column ground-projection intervals are shared by all rows.
  struct Hit {
    double z0, z1;  // planar-depth interval inside the footprint
    double z_lo, z_hi;
  };
  std::vector<Hit> hits;
  hits.reserve(solids.size());

  for (int cam = 0; cam < 4; ++cam) {
    double phi = state.pose.theta + cam * M_PI / 2.0;
    Vec2 fwd{std::cos(phi), std::sin(phi)};
    Vec2 right{std::sin(phi), -std::cos(phi)};
    for (int u = 0; u < W; ++u) {
      double tx = (2.0 * (u + 0.5) / W - 1.0) * tan_h;
      double inv_len = 1.0 / std::sqrt(1.0 + tx * tx);
      Vec2 g{(fwd.x + tx * right.x) * inv_len, (fwd.y + tx * right.y) * inv_len};
      double cosaz = inv_len;  // planar depth per unit ground distance

      hits.clear();
      for (const auto& s : solids) {
        if (auto iv = ray_footprint(origin, g, s.footprint)) {
          hits.push_back({iv->t_in * cosaz, iv->t_out * cosaz, s.z_lo, s.z_hi});
        }
      }
      if (hits.empty()) continue;

      for (int v = 0; v < H; ++v) {
        double ty = (2.0 * (v + 0.5) / H - 1.0) * tan_v;  // positive looks down
        double best = rig.max_depth;
        for (const auto& hit : hits) {
          double lo = hit.z0, hi = hit.z1;
          if (std::abs(ty) < 1e-12) {
            if (rig.mount_height < hit.z_lo || rig.mount_height > hit.z_hi) continue;
          } else {
            double a = (rig.mount_height - hit.z_hi) / ty;
            double b = (rig.mount_height - hit.z_lo) / ty;
            if (a > b) std::swap(a, b);
            lo = std::max(lo, a);
            hi = std::min(hi, b);
          }
          if (lo <= hi && lo < best) best = std::max(lo, 0.0);
        }
        pano.at(cam, v, u) = float(std::clamp(best, rig.min_depth, rig.max_depth));
      }
    }
  }
  return pano;
}

void write_depth_bin(const DepthPanorama& pano, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  uint32_t header[3] = {4u, uint32_t(pano.height), uint32_t(pano.width)};
  f.write(reinterpret_cast<const char*>(header), sizeof(header));
  f.write(reinterpret_cast<const char*>(pano.depth.data()),
          std::streamsize(pano.depth.size() * sizeof(float)));
}

void write_scan_csv(const LidarScan& scan, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "index,range_m\n";
  for (size_t i = 0; i < scan.ranges.size(); ++i) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%zu,%.6f\n", i, double(scan.ranges[i]));
    f << buf;
  }
}

}  // namespace nav
