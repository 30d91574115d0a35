#include "nav/eval.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nav/augment.hpp"
#include "nav/checkpoint.hpp"
#include "nav/distill.hpp"
#include "nav/nets.hpp"
#include "nav/ppo.hpp"
#include "nav/scene_io.hpp"

namespace nav {

void save_trajectory_csv(const TrajectoryLog& log, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write trajectory " + path);
  f << "t,x,y,theta,ax,ay,aw,min_scan\n";
  for (const auto& p : log.points) {
    char row[192];
    std::snprintf(row, sizeof(row), "%.1f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", p.t, p.pose.x,
                  p.pose.y, p.pose.theta, p.action[0], p.action[1], p.action[2], p.min_scan);
    f << row;
  }
}

std::vector<TrajectoryPoint> load_trajectory_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open trajectory " + path);
  std::string line;
  std::getline(f, line);  // header
  std::vector<TrajectoryPoint> out;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    TrajectoryPoint p;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf", &p.t, &p.pose.x, &p.pose.y,
                    &p.pose.theta, &p.action[0], &p.action[1], &p.action[2], &p.min_scan) != 8) {
      throw std::runtime_error("bad trajectory row: " + line);
    }
    out.push_back(p);
  }
  return out;
}

namespace {

class TeacherPolicy : public Policy {
 public:
  TeacherPolicy(const std::string& path, const AppConfig& cfg, LidarMode mode)
      : mode_(mode), n_scan_(cfg.world.n_scan) {
    LoadedCheckpoint ck = load_checkpoint(path);
    if (ck.meta.kind != "teacher") {
      throw std::runtime_error("checkpoint " + path + " is not a teacher checkpoint");
    }
    if (ck.meta.n_scan != cfg.world.n_scan) {
      throw std::runtime_error("geometry mismatch: checkpoint n_scan=" +
                               std::to_string(ck.meta.n_scan) + " but config n_scan=" +
                               std::to_string(cfg.world.n_scan));
    }
    Rng rng(0);
    net_.init(store_, cfg.world.n_scan, rng);
    restore_into(ck, store_);
    normalizer_ = ck.meta.distance_normalizer;
    ws_.resize(kGradChunks);
    for (auto& w : ws_) net_.make_ws(w);
    name_ = mode == LidarMode::privileged ? "teacher-privileged" : "teacher-standard";
  }

  Action act(const Env& env, int chunk, Rng&) override {
    std::vector<float>& obs = obs_[chunk];
    obs.resize(size_t(n_scan_) + kProprioDim);
    double inv = 1.0 / env.config().max_range;
    const auto& scan = env.scan();
    for (int i = 0; i < n_scan_; ++i) obs[i] = float(scan.ranges[i] * inv);
    ProprioObs p = env.proprio();
    for (int i = 0; i < kProprioDim; ++i) obs[n_scan_ + i] = float(p.values[i]);
    ActionDistribution dist = net_.actor_fwd(store_, obs.data(), obs.data() + n_scan_, ws_[chunk]);
    return {dist.mean[0], dist.mean[1], dist.mean[2]};
  }

  LidarMode lidar_mode() const override { return mode_; }
  double distance_normalizer() const override { return normalizer_; }
  std::string name() const override { return name_; }

 private:
  LidarMode mode_;
  int n_scan_;
  double normalizer_ = 0.0;
  std::string name_;
  TeacherNet<float> net_;
  ParamStore<float> store_;
  std::vector<TeacherNet<float>::Ws> ws_;
  std::vector<float> obs_[kGradChunks];
};

class StudentPolicy : public Policy {
 public:
  StudentPolicy(const std::string& path, const AppConfig& cfg, bool clean_depth)
      : rig_(cfg.rig), aug_(cfg.augment), clean_(clean_depth) {
    LoadedCheckpoint ck = load_checkpoint(path);
    if (ck.meta.kind != "student") {
      throw std::runtime_error("checkpoint " + path + " is not a student checkpoint");
    }
    if (ck.meta.height != rig_.height || ck.meta.width != rig_.width) {
      throw std::runtime_error(
          "geometry mismatch: checkpoint depth " + std::to_string(ck.meta.height) + "x" +
          std::to_string(ck.meta.width) + " but config " + std::to_string(rig_.height) + "x" +
          std::to_string(rig_.width));
    }
    Rng rng(0);
    net_.init(store_, rig_.height, rig_.width, rng);
    restore_into(ck, store_);
    normalizer_ = ck.meta.distance_normalizer;
    ws_.resize(kGradChunks);
    for (auto& w : ws_) net_.make_ws(w);
  }

  Action act(const Env& env, int chunk, Rng& aug_rng) override {
    DepthPanorama pano = render_depth(env.episode().robot, env.scene(), rig_);
    if (!clean_) apply_pipeline(pano, aug_, aug_rng);
    size_t n = pano.depth.size();
    std::vector<float>& depth = depth_[chunk];
    depth.resize(n);
    float inv = float(1.0 / rig_.max_depth);
    for (size_t i = 0; i < n; ++i) depth[i] = pano.depth[i] * inv;
    ProprioObs p = env.proprio();
    float prop[kProprioDim];
    for (int i = 0; i < kProprioDim; ++i) prop[i] = float(p.values[i]);
    net_.fwd(store_, depth.data(), prop, ws_[chunk]);
    return {double(ws_[chunk].action[0]), double(ws_[chunk].action[1]),
            double(ws_[chunk].action[2])};
  }

  // Student navigates on depth; scans are still needed for min_scan logging,
  // standard mode matches what a deployed scanner would see.
  LidarMode lidar_mode() const override { return LidarMode::standard; }
  double distance_normalizer() const override { return normalizer_; }
  std::string name() const override { return clean_ ? "student-clean-depth" : "student"; }

 private:
  CameraRig rig_;
  AugmentConfig aug_;
  bool clean_;
  double normalizer_ = 0.0;
  StudentNet<float> net_;
  ParamStore<float> store_;
  std::vector<StudentNet<float>::Ws> ws_;
  std::vector<float> depth_[kGradChunks];
};

}  // namespace

std::unique_ptr<Policy> make_teacher_policy(const std::string& checkpoint_path,
                                            const AppConfig& cfg, LidarMode mode) {
  return std::make_unique<TeacherPolicy>(checkpoint_path, cfg, mode);
}

std::unique_ptr<Policy> make_student_policy(const std::string& checkpoint_path,
                                            const AppConfig& cfg, bool clean_depth) {
  return std::make_unique<StudentPolicy>(checkpoint_path, cfg, clean_depth);
}

CellResult evaluate_cell(Policy& policy, const AppConfig& cfg, int obstacle_count, int episodes,
                         uint64_t seed, TrajectoryLog* first_trajectory) {
  EnvConfig ec = cfg.world;
  ec.obstacle_count = obstacle_count;
  ec.lidar_mode = policy.lidar_mode();
  ec.distance_normalizer = policy.distance_normalizer();
  ec.kind_mix = kind_mix_from_out_of_plane_fraction(cfg.eval.out_of_plane_fraction);

  std::vector<uint8_t> outcomes(episodes, 0);
  std::vector<int> steps(episodes, 0);
  std::vector<double> paths(episodes, 0.0);
  std::vector<uint64_t> hashes(episodes, 0);

  int chunk_len = (episodes + kGradChunks - 1) / kGradChunks;
#pragma omp parallel for schedule(static)
  for (int c = 0; c < kGradChunks; ++c) {
    Env env(ec, seed, uint64_t(c) + 0x45564100ull);
    int lo = c * chunk_len, hi = std::min(episodes, lo + chunk_len);
    for (int e = lo; e < hi; ++e) {
      // Scene depends only on (seed, obstacle_count, episode): paired across
      // policies by construction.
      Rng scene_rng = Rng::derive(seed, 0x5343454eull, uint64_t(obstacle_count), uint64_t(e));
      SceneSpec scene = sample_scene(scene_rng, ec.arena_half_extent, obstacle_count, ec.kind_mix,
                                     ec.robot);
      hashes[e] = scene_hash(scene);
      env.reset_with_scene(scene);
      Rng aug_rng = Rng::derive(seed, 0x45415547ull, uint64_t(obstacle_count), uint64_t(e));
      TrajectoryLog* traj = (e == 0 && first_trajectory) ? first_trajectory : nullptr;
      if (traj) {
        traj->scene = scene;
        traj->points.clear();
        traj->points.push_back({0.0, env.episode().robot.pose, {0, 0, 0}, env.min_scan()});
      }
      while (true) {
        Action a = policy.act(env, c, aug_rng);
        StepResult r = env.step(a);
        if (traj) {
          traj->points.push_back({0.1 * env.episode().steps_elapsed, env.episode().robot.pose, a,
                                  env.min_scan()});
        }
        if (r.terminated) break;
      }
      outcomes[e] = uint8_t(env.episode().outcome);
      steps[e] = env.episode().steps_elapsed;
      paths[e] = env.path_length();
    }
  }

  CellResult cell;
  cell.obstacle_count = obstacle_count;
  cell.episodes = episodes;
  uint64_t combined = 0xcbf29ce484222325ull;
  for (int e = 0; e < episodes; ++e) {
    combined = fnv1a(&hashes[e], 8, combined);
    switch (Outcome(outcomes[e])) {
      case Outcome::success: cell.success += 1; break;
      case Outcome::collision: cell.collision += 1; break;
      default: cell.timeout += 1; break;
    }
    cell.mean_episode_len += steps[e];
    cell.mean_path_len += paths[e];
  }
  cell.scenes_hash = combined;
  cell.mean_episode_len /= episodes;
  cell.mean_path_len /= episodes;
  cell.success_rate = double(cell.success) / episodes;
  cell.collision_rate = double(cell.collision) / episodes;
  cell.timeout_rate = double(cell.timeout) / episodes;
  cell.ci_halfwidth =
      1.96 * std::sqrt(cell.success_rate * (1.0 - cell.success_rate) / episodes);
  return cell;
}

EvalReport evaluate_policy(Policy& policy, const AppConfig& cfg, uint64_t seed) {
  EvalReport report;
  report.policy = policy.name();
  report.seed = seed;
  for (int count : cfg.eval.obstacle_counts) {
    report.cells.push_back(evaluate_cell(policy, cfg, count, cfg.eval.episodes, seed));
  }
  return report;
}

void write_report_csv(const EvalReport& report, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write report " + path);
  f << "policy,obstacle_count,episodes,success_rate,collision_rate,timeout_rate,"
       "ci95_halfwidth,mean_episode_len,mean_path_len\n";
  for (const auto& c : report.cells) {
    char row[256];
    std::snprintf(row, sizeof(row), "%s,%d,%d,%.6f,%.6f,%.6f,%.6f,%.4f,%.4f\n",
                  report.policy.c_str(), c.obstacle_count, c.episodes, c.success_rate,
                  c.collision_rate, c.timeout_rate, c.ci_halfwidth, c.mean_episode_len,
                  c.mean_path_len);
    f << row;
  }
}

CompareTable compare_table(const std::string& teacher_checkpoint,
                           const std::string& student_checkpoint, const AppConfig& cfg,
                           uint64_t seed, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  auto teacher_std = make_teacher_policy(teacher_checkpoint, cfg, LidarMode::standard);
  auto teacher_priv = make_teacher_policy(teacher_checkpoint, cfg, LidarMode::privileged);
  auto student = make_student_policy(student_checkpoint, cfg, cfg.eval.clean_depth);

  CompareTable table;
  std::map<std::string, std::string> manifest;
  manifest["seed"] = std::to_string(seed);
  manifest["episodes_per_cell"] = std::to_string(cfg.eval.episodes);
  manifest["out_of_plane_fraction"] = std::to_string(cfg.eval.out_of_plane_fraction);
  for (int count : cfg.eval.obstacle_counts) {
    CompareRow row;
    row.obstacle_count = count;
    row.teacher_std = evaluate_cell(*teacher_std, cfg, count, cfg.eval.episodes, seed);
    row.teacher_priv = evaluate_cell(*teacher_priv, cfg, count, cfg.eval.episodes, seed);
    row.student = evaluate_cell(*student, cfg, count, cfg.eval.episodes, seed);
    if (row.teacher_std.scenes_hash != row.teacher_priv.scenes_hash ||
        row.teacher_std.scenes_hash != row.student.scenes_hash) {
      throw std::runtime_error("compare_table: scene streams diverged between columns");
    }
    char key[64], val[32];
    std::snprintf(key, sizeof(key), "scenes_hash_%d", count);
    std::snprintf(val, sizeof(val), "%016llx", (unsigned long long)row.teacher_std.scenes_hash);
    manifest[key] = val;
    table.rows.push_back(row);
  }

  std::ofstream f(out_dir + "/compare.csv");
  if (!f) throw std::runtime_error("cannot write " + out_dir + "/compare.csv");
  f << "obstacle_count,teacher_standard,teacher_privileged,student\n";
  for (const auto& r : table.rows) {
    char row[128];
    std::snprintf(row, sizeof(row), "%d,%.6f,%.6f,%.6f\n", r.obstacle_count,
                  r.teacher_std.success_rate, r.teacher_priv.success_rate,
                  r.student.success_rate);
    f << row;
  }
  write_manifest(out_dir + "/compare_manifest.txt", manifest);
  return table;
}

}  // namespace nav
