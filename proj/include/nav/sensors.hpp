#pragma once

#include <string>
#include <vector>

#include "nav/world.hpp"

namespace nav {

struct LidarScan {
  std::vector<float> ranges;  // meters, (0, max_range]
  double max_range = 10.0;
};

enum class LidarMode { standard, privileged };

// Casts n_scan rays from the robot center at the lidar height. Ray 0 points
// along the robot heading, counter-clockwise ordering. Standard mode sees
// only solids whose z interval contains the lidar height. Privileged mode
// sees every solid, inflated by the robot footprint radius, so ranges report
// traversable free space.
LidarScan raycast_lidar(const RobotState& state, const SceneSpec& scene, const RobotSpec& spec,
                        LidarMode mode, int n_scan, double max_range = 10.0);

double min_range(const LidarScan& scan);

struct CameraRig {
  int width = 96;
  int height = 60;
  double hfov_deg = 93.97;
  double vfov_deg = 67.64;
  double mount_height = 0.25;
  double max_depth = 5.0;
  double min_depth = 0.05;
};

// 4 x H x W planar z-depth panorama, cameras at yaw offsets 0/90/180/270 deg
// relative to the robot heading. Depth is clipped to [min_depth, max_depth];
// rays that hit nothing read max_depth.
struct DepthPanorama {
  int height = 0;
  int width = 0;
  std::vector<float> depth;  // [cam][row][col], 4*H*W
  float& at(int cam, int r, int c) { return depth[(size_t(cam) * height + r) * width + c]; }
  float at(int cam, int r, int c) const { return depth[(size_t(cam) * height + r) * width + c]; }
};

DepthPanorama render_depth(const RobotState& state, const SceneSpec& scene, const CameraRig& rig);

// Exports per External Interfaces: flat little-endian binary grid with a
// (4, H, W) header, and scan CSV.
void write_depth_bin(const DepthPanorama& pano, const std::string& path);
void write_scan_csv(const LidarScan& scan, const std::string& path);

}  // namespace nav
