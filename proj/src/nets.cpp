#include "nav/nets.hpp"

#include <cmath>

namespace nav {

ProprioObs encode_proprio(const EpisodeState& ep, const SceneSpec& scene, const RobotSpec& spec,
                          double distance_normalizer) {
  ProprioObs obs;
  int k = 0;
  for (int i = 0; i < kOdomHistory; ++i) {
    obs.values[k++] = ep.odom_history[i].vx / spec.v_max_xy;
    obs.values[k++] = ep.odom_history[i].vy / spec.v_max_xy;
    obs.values[k++] = ep.odom_history[i].wz / spec.omega_max;
  }
  Vec2 to_goal = scene.goal_position - Vec2{ep.robot.pose.x, ep.robot.pose.y};
  double d = to_goal.norm();
  Vec2 in_robot = rotate(to_goal, -ep.robot.pose.theta);
  if (d > 1e-9) {
    obs.values[k++] = in_robot.x / d;
    obs.values[k++] = in_robot.y / d;
  } else {
    obs.values[k++] = 1.0;
    obs.values[k++] = 0.0;
  }
  obs.values[k++] = std::min(d / distance_normalizer, 1.0);
  for (int i = 0; i < 3; ++i) obs.values[k++] = ep.prev_action[i];
  return obs;
}

double log_prob_of(const ActionDistribution& dist, const std::array<double, 3>& raw) {
  constexpr double kLog2Pi = 1.8378770664093453;
  double lp = 0.0;
  for (int i = 0; i < 3; ++i) {
    double sigma = std::exp(dist.log_std[i]);
    double z = (raw[i] - dist.mean[i]) / sigma;
    lp += -0.5 * z * z - dist.log_std[i] - 0.5 * kLog2Pi;
  }
  return lp;
}

SampledAction sample_action(const ActionDistribution& dist, Rng& rng) {
  SampledAction s;
  for (int i = 0; i < 3; ++i) {
    double sigma = std::exp(dist.log_std[i]);
    s.raw[i] = dist.mean[i] + sigma * rng.normal();
    s.clipped[i] = std::clamp(s.raw[i], -1.0, 1.0);
  }
  s.log_prob = log_prob_of(dist, s.raw);
  return s;
}

}  // namespace nav
