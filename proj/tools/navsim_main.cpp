#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "nav/distill.hpp"
#include "nav/eval.hpp"
#include "nav/ppo.hpp"
#include "nav/scene_io.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fs = std::filesystem;
using namespace nav;

namespace {

struct CommonArgs {
  std::string config_path;
  uint64_t seed = 0;
  std::string out_dir = "out";
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "config file (flat key=value with sections)");
  cmd->add_option("--seed", args.seed, "random seed");
  cmd->add_option("--out-dir", args.out_dir, "output directory");
}

AppConfig load_config(const CommonArgs& args) {
  if (args.config_path.empty()) return default_app_config();
  if (!fs::exists(args.config_path)) {
    // Missing config is a usage error (exit 1), not a runtime failure.
    std::cerr << "error: config file not found: " << args.config_path << "\n";
    std::exit(1);
  }
  return load_app_config(args.config_path);
}

void apply_threads(const AppConfig& cfg) {
#ifdef _OPENMP
  if (cfg.worker_threads > 0) omp_set_num_threads(cfg.worker_threads);
#else
  (void)cfg;
#endif
}

std::string run_dir(const CommonArgs& args, const AppConfig& cfg, const std::string& command) {
  std::string dir = args.out_dir + "/" + command + "-" + run_id(cfg, args.seed, command);
  fs::create_directories(dir);
  return dir;
}

void summary(const std::string& command, const AppConfig& cfg, const CommonArgs& args,
             const std::string& extra) {
  std::printf("ok command=%s run_id=%s seed=%llu%s%s\n", command.c_str(),
              run_id(cfg, args.seed, command).c_str(), (unsigned long long)args.seed,
              extra.empty() ? "" : " ", extra.c_str());
}

void describe_store(const ParamStore<float>& store, const std::string& title) {
  std::printf("%s\n", title.c_str());
  size_t total = 0;
  for (int i = 0; i < store.count(); ++i) {
    const auto& p = store.at(i);
    std::string shape = "(";
    for (size_t d = 0; d < p.shape.size(); ++d) {
      shape += std::to_string(p.shape[d]);
      if (d + 1 < p.shape.size()) shape += ",";
    }
    shape += ")";
    std::printf("  %-28s %-16s %zu\n", p.name.c_str(), shape.c_str(), p.value.size());
    total += p.value.size();
  }
  std::printf("  total parameters: %zu\n", total);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"teacher-student navigation: simulation, training, evaluation"};
  app.require_subcommand(1);

  CommonArgs args;

  auto* cmd_train_teacher = app.add_subcommand("train-teacher", "PPO training of the teacher");
  add_common(cmd_train_teacher, args);
  std::string init_ckpt;
  cmd_train_teacher->add_option("--init-checkpoint", init_ckpt,
                                "warm-start weights from an earlier teacher checkpoint");

  auto* cmd_collect = app.add_subcommand("collect-demos", "collect teacher demonstrations");
  add_common(cmd_collect, args);
  std::string teacher_ckpt, dataset_out;
  cmd_collect->add_option("--teacher", teacher_ckpt, "teacher checkpoint")->required();
  cmd_collect->add_option("--dataset", dataset_out, "dataset output path");

  auto* cmd_train_student = app.add_subcommand("train-student", "behavior-clone the student");
  add_common(cmd_train_student, args);
  std::string dataset_in;
  bool allow_mismatch = false;
  cmd_train_student->add_option("--dataset", dataset_in, "demo dataset")->required();
  cmd_train_student->add_flag("--allow-config-mismatch", allow_mismatch,
                              "train even if the dataset was collected under another config");

  auto* cmd_eval = app.add_subcommand("evaluate", "evaluate one policy");
  add_common(cmd_eval, args);
  std::string eval_ckpt, eval_policy = "teacher", eval_mode = "privileged";
  bool clean_depth = false, log_traj = false;
  cmd_eval->add_option("--checkpoint", eval_ckpt, "policy checkpoint")->required();
  cmd_eval->add_option("--policy", eval_policy, "teacher|student");
  cmd_eval->add_option("--mode", eval_mode, "teacher scan mode: standard|privileged");
  cmd_eval->add_flag("--clean-depth", clean_depth, "student: skip depth augmentation");
  cmd_eval->add_flag("--log-trajectory", log_traj, "save first-episode trajectory per cell");

  auto* cmd_compare = app.add_subcommand("compare", "three-column paired comparison");
  add_common(cmd_compare, args);
  std::string cmp_teacher, cmp_student;
  cmd_compare->add_option("--teacher", cmp_teacher, "teacher checkpoint")->required();
  cmd_compare->add_option("--student", cmp_student, "student checkpoint")->required();

  auto* cmd_render = app.add_subcommand("render", "draw a scene (plus trajectory) as SVG");
  add_common(cmd_render, args);
  std::string scene_path, traj_path, svg_out = "scene.svg";
  cmd_render->add_option("--scene", scene_path, "scene file");
  cmd_render->add_option("--trajectory", traj_path, "trajectory CSV");
  cmd_render->add_option("--out", svg_out, "output SVG filename (under --out-dir)");

  auto* cmd_augment = app.add_subcommand("augment-preview", "write clean and augmented depth");
  add_common(cmd_augment, args);

  auto* cmd_stats = app.add_subcommand("dataset-stats", "print dataset counts and histograms");
  add_common(cmd_stats, args);
  std::string stats_dataset;
  cmd_stats->add_option("--dataset", stats_dataset, "demo dataset")->required();

  auto* cmd_describe = app.add_subcommand("describe", "print network shapes and param counts");
  add_common(cmd_describe, args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // usage errors exit 1
  }

  try {
    AppConfig cfg = load_config(args);
    apply_threads(cfg);

    if (cmd_train_teacher->parsed()) {
      std::string dir = run_dir(args, cfg, "train-teacher");
      std::string best = train_teacher<float>(cfg, args.seed, dir, 1, init_ckpt);
      summary("train-teacher", cfg, args, "checkpoint=" + best);
    } else if (cmd_collect->parsed()) {
      std::string dir = run_dir(args, cfg, "collect-demos");
      if (dataset_out.empty()) dataset_out = dir + "/demos.bin";
      LoadedCheckpoint ck = load_checkpoint(teacher_ckpt);
      if (ck.meta.n_scan != cfg.world.n_scan) {
        throw std::runtime_error("geometry mismatch: checkpoint n_scan=" +
                                 std::to_string(ck.meta.n_scan) + " vs config " +
                                 std::to_string(cfg.world.n_scan));
      }
      TeacherNet<float> net;
      ParamStore<float> store;
      Rng rng(0);
      net.init(store, cfg.world.n_scan, rng);
      restore_into(ck, store);
      CollectStats st = collect_demos(cfg, args.seed, net, store, dataset_out);
      write_manifest(dir + "/collect_manifest.txt",
                     {{"seed", std::to_string(args.seed)},
                      {"teacher", teacher_ckpt},
                      {"episodes_attempted", std::to_string(st.episodes_attempted)},
                      {"successes", std::to_string(st.successes)},
                      {"records", std::to_string(st.records)},
                      {"dataset", dataset_out}});
      summary("collect-demos", cfg, args,
              "dataset=" + dataset_out + " episodes=" + std::to_string(st.successes) +
                  " records=" + std::to_string(st.records));
    } else if (cmd_train_student->parsed()) {
      std::string dir = run_dir(args, cfg, "train-student");
      BCResult res = bc_train<float>(cfg, args.seed, dataset_in, dir, allow_mismatch);
      char extra[160];
      std::snprintf(extra, sizeof(extra), "checkpoint=%s best_val=%.6f epoch1_val=%.6f",
                    res.best_checkpoint.c_str(), res.best_val, res.epoch1_val);
      summary("train-student", cfg, args, extra);
    } else if (cmd_eval->parsed()) {
      std::string dir = run_dir(args, cfg, "evaluate");
      std::unique_ptr<Policy> policy;
      if (eval_policy == "teacher") {
        policy = make_teacher_policy(eval_ckpt, cfg,
                                     eval_mode == "standard" ? LidarMode::standard
                                                             : LidarMode::privileged);
      } else if (eval_policy == "student") {
        AppConfig c = cfg;
        c.eval.clean_depth = clean_depth || cfg.eval.clean_depth;
        policy = make_student_policy(eval_ckpt, c, c.eval.clean_depth);
      } else {
        std::cerr << "error: --policy must be teacher or student\n";
        return 1;
      }
      EvalReport report;
      report.policy = policy->name();
      report.seed = args.seed;
      std::map<std::string, std::string> manifest{{"seed", std::to_string(args.seed)},
                                                  {"checkpoint", eval_ckpt},
                                                  {"policy", policy->name()}};
      for (int count : cfg.eval.obstacle_counts) {
        TrajectoryLog traj;
        CellResult cell = evaluate_cell(*policy, cfg, count, cfg.eval.episodes, args.seed,
                                        log_traj ? &traj : nullptr);
        report.cells.push_back(cell);
        char key[64], val[32];
        std::snprintf(key, sizeof(key), "scenes_hash_%d", count);
        std::snprintf(val, sizeof(val), "%016llx", (unsigned long long)cell.scenes_hash);
        manifest[key] = val;
        if (log_traj) {
          save_trajectory_csv(traj, dir + "/trajectory_" + std::to_string(count) + ".csv");
          save_scene(dir + "/scene_" + std::to_string(count) + ".txt", traj.scene);
        }
      }
      write_report_csv(report, dir + "/report.csv");
      write_manifest(dir + "/eval_manifest.txt", manifest);
      summary("evaluate", cfg, args, "report=" + dir + "/report.csv");
    } else if (cmd_compare->parsed()) {
      std::string dir = run_dir(args, cfg, "compare");
      CompareTable table = compare_table(cmp_teacher, cmp_student, cfg, args.seed, dir);
      std::string extra = "table=" + dir + "/compare.csv";
      for (const auto& r : table.rows) {
        char cell[96];
        std::snprintf(cell, sizeof(cell), " n%d=%.3f/%.3f/%.3f", r.obstacle_count,
                      r.teacher_std.success_rate, r.teacher_priv.success_rate,
                      r.student.success_rate);
        extra += cell;
      }
      summary("compare", cfg, args, extra);
    } else if (cmd_render->parsed()) {
      fs::create_directories(args.out_dir);
      SceneSpec scene;
      if (!scene_path.empty()) {
        scene = load_scene(scene_path);
      } else {
        Rng rng = Rng::derive(args.seed, 0x5343454eull, uint64_t(cfg.world.obstacle_count), 0);
        scene = sample_scene(rng, cfg.world.arena_half_extent, cfg.world.obstacle_count,
                             cfg.world.kind_mix, cfg.world.robot);
      }
      std::vector<TrajectoryPoint> traj;
      if (!traj_path.empty()) traj = load_trajectory_csv(traj_path);
      std::string out = args.out_dir + "/" + svg_out;
      render_scene_svg(scene, traj.empty() ? nullptr : &traj, out);
      summary("render", cfg, args, "svg=" + out);
    } else if (cmd_augment->parsed()) {
      std::string dir = run_dir(args, cfg, "augment-preview");
      Rng scene_rng = Rng::derive(args.seed, 0x5343454eull, uint64_t(cfg.world.obstacle_count), 0);
      SceneSpec scene = sample_scene(scene_rng, cfg.world.arena_half_extent,
                                     cfg.world.obstacle_count, cfg.world.kind_mix,
                                     cfg.world.robot);
      RobotState robot;
      robot.pose = scene.start_pose;
      DepthPanorama clean = render_depth(robot, scene, cfg.rig);
      write_depth_bin(clean, dir + "/depth_clean.bin");
      DepthPanorama noisy = clean;
      Rng aug_rng = Rng::derive(args.seed, 0x41554721ull, 1, 0);
      apply_pipeline(noisy, cfg.augment, aug_rng);
      write_depth_bin(noisy, dir + "/depth_augmented.bin");
      save_scene(dir + "/scene.txt", scene);
      summary("augment-preview", cfg, args,
              "clean=" + dir + "/depth_clean.bin augmented=" + dir + "/depth_augmented.bin");
    } else if (cmd_stats->parsed()) {
      DatasetReader reader(stats_dataset);
      std::printf("records=%llu episodes=%zu depth=%dx%d max_depth=%.2f config_hash=%016llx\n",
                  (unsigned long long)reader.record_count(), reader.episodes().size(),
                  reader.height(), reader.width(), reader.max_depth(),
                  (unsigned long long)reader.config_hash());
      uint64_t len_sum = 0;
      for (const auto& ep : reader.episodes()) len_sum += ep.length;
      std::printf("mean_episode_len=%.2f\n",
                  reader.episodes().empty() ? 0.0 : double(len_sum) / reader.episodes().size());
      // Per-axis action histogram over 8 bins in [-1, 1].
      int hist[3][8] = {};
      DemoRecord rec;
      for (uint64_t i = 0; i < reader.record_count(); ++i) {
        reader.read_record(i, rec);
        for (int k = 0; k < 3; ++k) {
          int bin = std::clamp(int((double(rec.action[k]) + 1.0) / 2.0 * 8.0), 0, 7);
          hist[k][bin] += 1;
        }
      }
      const char* axis[3] = {"vx", "vy", "wz"};
      for (int k = 0; k < 3; ++k) {
        std::printf("action_%s:", axis[k]);
        for (int b = 0; b < 8; ++b) std::printf(" %d", hist[k][b]);
        std::printf("\n");
      }
      summary("dataset-stats", cfg, args, "dataset=" + stats_dataset);
    } else if (cmd_describe->parsed()) {
      Rng rng(0);
      TeacherNet<float> teacher;
      ParamStore<float> tstore;
      teacher.init(tstore, cfg.world.n_scan, rng);
      describe_store(tstore, "teacher (n_scan=" + std::to_string(cfg.world.n_scan) + ")");
      StudentNet<float> student;
      ParamStore<float> sstore;
      student.init(sstore, cfg.rig.height, cfg.rig.width, rng);
      describe_store(sstore, "student (depth=" + std::to_string(cfg.rig.height) + "x" +
                                 std::to_string(cfg.rig.width) + ")");
      summary("describe", cfg, args, "");
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  return 0;
}
