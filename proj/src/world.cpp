#include "nav/world.hpp"

#include <cmath>

namespace nav {

const char* obstacle_kind_name(ObstacleKind k) {
  switch (k) {
    case ObstacleKind::full_height: return "full-height";
    case ObstacleKind::low_profile: return "low-profile";
    case ObstacleKind::overhang: return "overhang";
    case ObstacleKind::shelf_leg: return "shelf-leg";
    case ObstacleKind::shelf_slab: return "shelf-slab";
  }
  return "?";
}

ObstacleKind obstacle_kind_from_name(const std::string& name) {
  for (int i = 0; i < kNumObstacleKinds; ++i) {
    auto k = static_cast<ObstacleKind>(i);
    if (name == obstacle_kind_name(k)) return k;
  }
  throw std::runtime_error("unknown obstacle kind: " + name);
}

bool kind_is_out_of_plane(ObstacleKind k) {
  return k == ObstacleKind::low_profile || k == ObstacleKind::overhang ||
         k == ObstacleKind::shelf_slab;
}

KindMix kind_mix_from_out_of_plane_fraction(double f) {
  if (f < 0.0 || f > 1.0) throw std::runtime_error("out_of_plane_fraction must be in [0,1]");
  KindMix mix{};
  mix[size_t(ObstacleKind::full_height)] = 0.75 * (1.0 - f);
  mix[size_t(ObstacleKind::shelf_leg)] = 0.25 * (1.0 - f);
  mix[size_t(ObstacleKind::low_profile)] = f / 3.0;
  mix[size_t(ObstacleKind::overhang)] = f / 3.0;
  mix[size_t(ObstacleKind::shelf_slab)] = f / 3.0;
  return mix;
}

namespace {

ObstacleKind sample_kind(Rng& rng, const KindMix& mix) {
  double u = rng.uniform();
  double acc = 0.0;
  for (int i = 0; i < kNumObstacleKinds; ++i) {
    acc += mix[i];
    if (u < acc) return static_cast<ObstacleKind>(i);
  }
  return static_cast<ObstacleKind>(kNumObstacleKinds - 1);
}

// Sample the footprint(s) for one obstacle draw. A shelf-slab draw emits the
// slab plus four legs at its corners.
std::vector<ObstacleSpec> sample_obstacle_parts(Rng& rng, ObstacleKind kind, Vec2 center) {
  std::vector<ObstacleSpec> parts;
  switch (kind) {
    case ObstacleKind::full_height: {
      ObstacleSpec o;
      o.kind = kind;
      o.z_lo = 0.0;
      o.z_hi = 1.5;
      if (rng.bernoulli(0.5)) {
        o.footprint = make_circle(center, rng.uniform(0.15, 0.45));
      } else {
        o.footprint = make_box(center, {rng.uniform(0.15, 0.45), rng.uniform(0.15, 0.45)},
                               rng.uniform(0.0, M_PI));
      }
      parts.push_back(o);
      break;
    }
    case ObstacleKind::low_profile: {
      ObstacleSpec o;
      o.kind = kind;
      o.z_lo = 0.0;
      o.z_hi = 0.12;
      if (rng.bernoulli(0.5)) {
        o.footprint = make_circle(center, rng.uniform(0.12, 0.30));
      } else {
        o.footprint = make_box(center, {rng.uniform(0.15, 0.50), rng.uniform(0.10, 0.30)},
                               rng.uniform(0.0, M_PI));
      }
      parts.push_back(o);
      break;
    }
    case ObstacleKind::overhang: {
      ObstacleSpec o;
      o.kind = kind;
      o.z_lo = 0.40;
      o.z_hi = 0.80;
      o.footprint = make_box(center, {rng.uniform(0.25, 0.60), rng.uniform(0.25, 0.60)},
                             rng.uniform(0.0, M_PI));
      parts.push_back(o);
      break;
    }
    case ObstacleKind::shelf_leg: {
      ObstacleSpec o;
      o.kind = kind;
      o.z_lo = 0.0;
      o.z_hi = 1.5;
      o.footprint = make_box(center, {0.05, 0.05}, rng.uniform(0.0, M_PI));
      parts.push_back(o);
      break;
    }
    case ObstacleKind::shelf_slab: {
      double yaw = rng.uniform(0.0, M_PI);
      Vec2 half{rng.uniform(0.40, 0.60), rng.uniform(0.25, 0.40)};
      ObstacleSpec slab;
      slab.kind = ObstacleKind::shelf_slab;
      slab.z_lo = 0.5;
      slab.z_hi = 0.7;
      slab.footprint = make_box(center, half, yaw);
      parts.push_back(slab);
      double inset = 0.07;
      for (int sx = -1; sx <= 1; sx += 2) {
        for (int sy = -1; sy <= 1; sy += 2) {
          Vec2 off = rotate({sx * (half.x - inset), sy * (half.y - inset)}, yaw);
          ObstacleSpec leg;
          leg.kind = ObstacleKind::shelf_leg;
          leg.z_lo = 0.0;
          leg.z_hi = 1.5;
          leg.footprint = make_box(center + off, {0.05, 0.05}, yaw);
          parts.push_back(leg);
        }
      }
      break;
    }
  }
  return parts;
}

}  // namespace

SceneSpec sample_scene(Rng& rng, double arena_half_extent, int obstacle_count,
                       const KindMix& kind_mix, const RobotSpec& spec) {
  double sum = 0.0;
  for (double m : kind_mix) {
    if (m < 0.0) throw std::runtime_error("kind_mix entries must be non-negative");
    sum += m;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::runtime_error("kind_mix must sum to 1");
  if (obstacle_count < 0) throw std::runtime_error("obstacle_count must be >= 0");

  SceneSpec scene;
  scene.arena_half_extent = arena_half_extent;

  double clear_r = spec.footprint_radius + 0.3;
  double margin = spec.footprint_radius + 0.35;
  double lim = arena_half_extent - margin;
  // Start/goal: uniform with >= 2 m separation.
  for (int attempt = 0;; ++attempt) {
    Vec2 s{rng.uniform(-lim, lim), rng.uniform(-lim, lim)};
    Vec2 g{rng.uniform(-lim, lim), rng.uniform(-lim, lim)};
    if ((g - s).norm() >= 2.0) {
      scene.start_pose = {s.x, s.y, rng.uniform(-M_PI, M_PI)};
      scene.goal_position = g;
      break;
    }
    if (attempt > 100000) throw std::runtime_error("arena too small for 2 m start/goal split");
  }

  Vec2 start{scene.start_pose.x, scene.start_pose.y};
  for (int i = 0; i < obstacle_count; ++i) {
    ObstacleKind kind = sample_kind(rng, kind_mix);
    bool placed = false;
    for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
      Vec2 c{rng.uniform(-arena_half_extent + 0.05, arena_half_extent - 0.05),
             rng.uniform(-arena_half_extent + 0.05, arena_half_extent - 0.05)};
      auto parts = sample_obstacle_parts(rng, kind, c);
      bool ok = true;
      for (const auto& p : parts) {
        if (point_footprint_distance(start, p.footprint) < clear_r ||
            point_footprint_distance(scene.goal_position, p.footprint) < clear_r) {
          ok = false;
          break;
        }
      }
      if (ok) {
        scene.obstacles.insert(scene.obstacles.end(), parts.begin(), parts.end());
        placed = true;
      }
    }
    // Rejection cap hit: skip this obstacle.
  }
  return scene;
}

RobotState step_dynamics(const RobotState& state, const Action& command, const RobotSpec& spec,
                         double dt_control) {
  auto clamp1 = [](double v) { return std::clamp(v, -1.0, 1.0); };
  double tx = clamp1(command[0]) * spec.v_max_xy;
  double ty = clamp1(command[1]) * spec.v_max_xy;
  double tw = clamp1(command[2]) * spec.omega_max;
  if (std::abs(tx) < spec.deadzone_v) tx = 0.0;
  if (std::abs(ty) < spec.deadzone_v) ty = 0.0;
  if (std::abs(tw) < spec.deadzone_w) tw = 0.0;

  constexpr int kSubsteps = 36;
  double dt = dt_control / kSubsteps;
  double decay = std::exp(-dt / spec.vel_time_constant);

  RobotState s = state;
  for (int k = 0; k < kSubsteps; ++k) {
    s.vel.vx = tx + (s.vel.vx - tx) * decay;
    s.vel.vy = ty + (s.vel.vy - ty) * decay;
    s.vel.wz = tw + (s.vel.wz - tw) * decay;
    s.vel.vx = std::clamp(s.vel.vx, -spec.v_max_xy, spec.v_max_xy);
    s.vel.vy = std::clamp(s.vel.vy, -spec.v_max_xy, spec.v_max_xy);
    s.vel.wz = std::clamp(s.vel.wz, -spec.omega_max, spec.omega_max);
    double c = std::cos(s.pose.theta), sn = std::sin(s.pose.theta);
    s.pose.x += dt * (c * s.vel.vx - sn * s.vel.vy);
    s.pose.y += dt * (sn * s.vel.vx + c * s.vel.vy);
    s.pose.theta = wrap_angle(s.pose.theta + dt * s.vel.wz);
  }
  return s;
}

std::vector<Solid> scene_solids(const SceneSpec& scene) {
  std::vector<Solid> solids;
  solids.reserve(scene.obstacles.size() + 4);
  for (const auto& o : scene.obstacles) {
    solids.push_back({o.footprint, o.z_lo, o.z_hi, o.kind, false});
  }
  double e = scene.arena_half_extent;
  double t = kWallThickness / 2.0;
  double span = e + kWallThickness;
  solids.push_back({make_box({e + t, 0.0}, {t, span}), 0.0, kWallHeight,
                    ObstacleKind::full_height, true});
  solids.push_back({make_box({-e - t, 0.0}, {t, span}), 0.0, kWallHeight,
                    ObstacleKind::full_height, true});
  solids.push_back({make_box({0.0, e + t}, {span, t}), 0.0, kWallHeight,
                    ObstacleKind::full_height, true});
  solids.push_back({make_box({0.0, -e - t}, {span, t}), 0.0, kWallHeight,
                    ObstacleKind::full_height, true});
  return solids;
}

bool check_collision(const RobotState& state, const SceneSpec& scene, const RobotSpec& spec) {
  Vec2 p{state.pose.x, state.pose.y};
  double e = scene.arena_half_extent;
  if (std::abs(p.x) + spec.footprint_radius > e || std::abs(p.y) + spec.footprint_radius > e) {
    return true;
  }
  for (const auto& o : scene.obstacles) {
    if (o.z_lo >= spec.body_height || o.z_hi <= 0.0) continue;  // vertically disjoint
    if (point_footprint_distance(p, o.footprint) <= spec.footprint_radius) return true;
  }
  return false;
}

GoalStatus goal_status(const RobotState& state, const SceneSpec& scene, const RobotSpec& spec,
                       const RewardWeights& weights) {
  (void)spec;
  Vec2 p{state.pose.x, state.pose.y};
  double d = (p - scene.goal_position).norm();
  double speed = std::sqrt(state.vel.vx * state.vel.vx + state.vel.vy * state.vel.vy);
  return {d, d < weights.d_goal_thresh && speed < 0.1};
}

double compute_reward(double d_prev, double d_curr, double min_scan, const Action& action,
                      const Action& prev_action, const RewardWeights& w, StepEvent event) {
  switch (event) {
    case StepEvent::finished: return w.r_finished;
    case StepEvent::collision: return w.r_collision;
    case StepEvent::timeout: return 0.0;
    default: break;
  }
  double a_sq = 0.0, da_sq = 0.0;
  for (int i = 0; i < 3; ++i) {
    a_sq += action[i] * action[i];
    double da = action[i] - prev_action[i];
    da_sq += da * da;
  }
  double r = w.w_delta_d * (d_prev - d_curr) + w.w_lidar * std::max(0.0, w.d_min - min_scan) +
             w.w_a * a_sq + w.w_delta_a * da_sq;
  if (event == StepEvent::at_goal_first_entry) r += w.r_at_goal;
  return r;
}

}  // namespace nav
