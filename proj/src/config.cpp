#include "nav/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nav {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

ConfigFile ConfigFile::parse_string(const std::string& text) {
  ConfigFile cf;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw std::runtime_error("config line " + std::to_string(lineno) + ": bad section");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    cf.kv_[section.empty() ? key : section + "." + key] = value;
  }
  return cf;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_string(ss.str());
}

std::string ConfigFile::get_string(const std::string& key, const std::string& dflt) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? dflt : it->second;
}

double ConfigFile::get_double(const std::string& key, double dflt) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return dflt;
  return std::stod(it->second);
}

int ConfigFile::get_int(const std::string& key, int dflt) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return dflt;
  return std::stoi(it->second);
}

bool ConfigFile::get_bool(const std::string& key, bool dflt) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return dflt;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::runtime_error("config key " + key + ": expected boolean, got '" + v + "'");
}

std::vector<int> ConfigFile::get_int_list(const std::string& key, std::vector<int> dflt) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return dflt;
  std::vector<int> out;
  std::istringstream ss(it->second);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(std::stoi(tok));
  }
  return out;
}

std::string ConfigFile::canonical() const {
  std::string out;
  for (const auto& [k, v] : kv_) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

AppConfig app_config_from(const ConfigFile& cf) {
  AppConfig a;

  a.world.robot.footprint_radius = cf.get_double("world.footprint_radius", 0.25);
  a.world.robot.body_height = cf.get_double("world.body_height", 0.30);
  a.world.robot.v_max_xy = cf.get_double("world.v_max_xy", 0.5);
  a.world.robot.omega_max = cf.get_double("world.omega_max", 1.0);
  a.world.robot.deadzone_v = cf.get_double("world.deadzone_v", 0.03);
  a.world.robot.deadzone_w = cf.get_double("world.deadzone_w", 0.06);
  a.world.robot.vel_time_constant = cf.get_double("world.vel_time_constant", 0.15);
  a.world.robot.lidar_height = cf.get_double("world.lidar_height", 0.25);
  a.world.arena_half_extent = cf.get_double("world.arena_half_extent", 4.0);
  a.world.obstacle_count = cf.get_int("world.obstacle_count", 10);
  a.world.n_scan = cf.get_int("world.n_scan", 360);
  a.world.max_range = cf.get_double("world.max_range", 10.0);
  a.world.max_steps = cf.get_int("world.max_steps", 600);
  a.world.distance_normalizer =
      cf.get_double("world.distance_normalizer", 2.0 * a.world.arena_half_extent * M_SQRT2);
  a.out_of_plane_fraction = cf.get_double("world.out_of_plane_fraction", 0.4);
  a.world.kind_mix = kind_mix_from_out_of_plane_fraction(a.out_of_plane_fraction);

  a.world.rewards.w_delta_d = cf.get_double("world.w_delta_d", 0.5);
  a.world.rewards.w_lidar = cf.get_double("world.w_lidar", -0.1);
  a.world.rewards.w_a = cf.get_double("world.w_a", -0.05);
  a.world.rewards.w_delta_a = cf.get_double("world.w_delta_a", -0.1);
  a.world.rewards.r_at_goal = cf.get_double("world.r_at_goal", 10.0);
  a.world.rewards.r_collision = cf.get_double("world.r_collision", -50.0);
  a.world.rewards.r_finished = cf.get_double("world.r_finished", 50.0);
  a.world.rewards.d_min = cf.get_double("world.d_min", 0.7);
  a.world.rewards.d_goal_thresh = cf.get_double("world.d_goal_thresh", 0.5);

  a.rig.width = cf.get_int("student.width", 96);
  a.rig.height = cf.get_int("student.height", 60);
  a.rig.hfov_deg = cf.get_double("student.hfov_deg", 93.97);
  a.rig.vfov_deg = cf.get_double("student.vfov_deg", 67.64);
  a.rig.mount_height = cf.get_double("student.mount_height", 0.25);
  a.rig.max_depth = cf.get_double("student.max_depth", 5.0);

  a.ppo.lr0 = cf.get_double("teacher.lr0", 1e-3);
  a.ppo.gamma = cf.get_double("teacher.gamma", 0.99);
  a.ppo.horizon = cf.get_int("teacher.horizon", 96);
  a.ppo.clip = cf.get_double("teacher.clip", 0.2);
  a.ppo.mini_epochs = cf.get_int("teacher.mini_epochs", 5);
  a.ppo.n_env = cf.get_int("teacher.n_env", 64);
  a.ppo.minibatch_div = cf.get_int("teacher.minibatch_div", 4);
  a.ppo.gae_lambda = cf.get_double("teacher.gae_lambda", 0.95);
  a.ppo.kl_target = cf.get_double("teacher.kl_target", 0.008);
  a.ppo.value_coef = cf.get_double("teacher.value_coef", 1.0);
  a.ppo.entropy_coef = cf.get_double("teacher.entropy_coef", 0.0);
  a.ppo.max_epochs = cf.get_int("teacher.max_epochs", 300);

  a.bc.lr = cf.get_double("student.lr", 5e-4);
  a.bc.batch = cf.get_int("student.batch", 8);
  a.bc.epochs = cf.get_int("student.epochs", 100);
  a.bc.val_fraction = cf.get_double("student.val_fraction", 0.1);
  a.bc.episode_target = cf.get_int("student.episode_target", 2000);
  a.bc.freeze_augmentation = cf.get_bool("student.freeze_augmentation", false);

  a.augment.enable[1] = cf.get_bool("augment.enable_gaussian", true);
  a.augment.enable[2] = cf.get_bool("augment.enable_motion", true);
  a.augment.enable[3] = cf.get_bool("augment.enable_smudge", true);
  a.augment.enable[4] = cf.get_bool("augment.enable_elastic", true);
  a.augment.enable[5] = cf.get_bool("augment.enable_scale_shift", true);
  a.augment.enable[6] = cf.get_bool("augment.enable_lowfreq", true);
  a.augment.enable[7] = cf.get_bool("augment.enable_quantize", true);
  a.augment.p_gaussian = cf.get_double("augment.p_gaussian", 0.9);
  a.augment.p_motion = cf.get_double("augment.p_motion", 0.3);
  a.augment.p_smudge = cf.get_double("augment.p_smudge", 0.5);
  a.augment.p_elastic = cf.get_double("augment.p_elastic", 0.3);
  a.augment.per_camera_scale_shift = cf.get_bool("augment.per_camera_scale_shift", false);
  a.augment.max_depth = a.rig.max_depth;
  a.augment.min_depth = a.rig.min_depth;

  a.eval.obstacle_counts = cf.get_int_list("eval.obstacle_counts", {10, 15, 20, 25});
  a.eval.episodes = cf.get_int("eval.episodes", 200);
  a.eval.out_of_plane_fraction =
      cf.get_double("eval.out_of_plane_fraction", a.out_of_plane_fraction);
  a.eval.clean_depth = cf.get_bool("eval.clean_depth", false);

  a.worker_threads = cf.get_int("worker_threads", 0);

  std::string canon = cf.canonical();
  a.config_hash = fnv1a(canon.data(), canon.size());
  return a;
}

AppConfig load_app_config(const std::string& path) {
  return app_config_from(ConfigFile::parse_file(path));
}

AppConfig default_app_config() { return app_config_from(ConfigFile::parse_string("")); }

void write_manifest(const std::string& path,
                    const std::map<std::string, std::string>& entries) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write manifest " + path);
  for (const auto& [k, v] : entries) f << k << "=" << v << "\n";
}

std::string run_id(const AppConfig& cfg, uint64_t seed, const std::string& command) {
  uint64_t h = cfg.config_hash;
  h = fnv1a(&seed, sizeof(seed), h);
  h = fnv1a(command.data(), command.size(), h);
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf, 16);
}

}  // namespace nav
