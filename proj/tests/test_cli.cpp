#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "nav/checkpoint.hpp"
#include "nav/nets.hpp"

#ifndef NAVSIM_BIN
#error "NAVSIM_BIN must point at the CLI binary"
#endif

using namespace nav;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code;
  std::string out;
  std::string err;
};

RunResult run_cli(const std::string& cli_args) {
  const std::string out_file = "/tmp/navtest_cli_stdout.txt";
  const std::string err_file = "/tmp/navtest_cli_stderr.txt";
  std::string cmd = std::string(NAVSIM_BIN) + " " + cli_args + " > " + out_file + " 2> " + err_file;
  int rc = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  auto slurp = [](const std::string& p) {
    std::ifstream f(p);
    return std::string(std::istreambuf_iterator<char>(f), {});
  };
  r.out = slurp(out_file);
  r.err = slurp(err_file);
  return r;
}

std::vector<char> file_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  return std::vector<char>(std::istreambuf_iterator<char>(f), {});
}

// First regular file under dir whose name matches `name`, searching one run
// directory deep (run dirs are content-addressed).
std::string find_output(const std::string& dir, const std::string& name) {
  for (const auto& run : fs::directory_iterator(dir)) {
    if (!run.is_directory()) continue;
    fs::path p = run.path() / name;
    if (fs::exists(p)) return p.string();
  }
  return "";
}

}  // namespace

TEST_CASE("usage errors exit 1") {
  CHECK(run_cli("").exit_code == 1);                       // missing subcommand
  CHECK(run_cli("no-such-command").exit_code == 1);
  CHECK(run_cli("collect-demos").exit_code == 1);          // missing required --teacher
  CHECK(run_cli("describe --config /tmp/navtest_no_such_config.cfg").exit_code == 1);
}

TEST_CASE("help exits 0") {
  RunResult r = run_cli("--help");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("train-teacher") != std::string::npos);
}

TEST_CASE("runtime failures exit 2") {
  SUBCASE("unreadable checkpoint") {
    RunResult r = run_cli("evaluate --checkpoint /tmp/navtest_missing_ckpt.bin");
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("error:") != std::string::npos);
  }
  SUBCASE("sensor geometry mismatch") {
    // A teacher trained for 40 rays cannot drive a 360-ray config.
    ParamStore<float> store;
    TeacherNet<float> net;
    Rng rng(1);
    net.init(store, 40, rng);
    CheckpointMeta meta;
    meta.kind = "teacher";
    meta.n_scan = 40;
    const std::string ckpt = "/tmp/navtest_cli_teacher40.bin";
    save_checkpoint(ckpt, meta, store);
    RunResult r = run_cli("collect-demos --teacher " + ckpt +
                          " --out-dir /tmp/navtest_cli_collect");
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("geometry mismatch") != std::string::npos);
  }
}

TEST_CASE("describe prints parameter tables and a summary line") {
  RunResult r = run_cli("describe --seed 3 --out-dir /tmp/navtest_cli_describe");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("teacher (n_scan=360)") != std::string::npos);
  CHECK(r.out.find("student (depth=60x96)") != std::string::npos);
  CHECK(r.out.find("total parameters:") != std::string::npos);
  CHECK(r.out.find("ok command=describe run_id=") != std::string::npos);
  CHECK(r.out.find("seed=3") != std::string::npos);
}

TEST_CASE("render is deterministic across runs") {
  const std::string d1 = "/tmp/navtest_cli_render1", d2 = "/tmp/navtest_cli_render2";
  fs::remove_all(d1);
  fs::remove_all(d2);
  RunResult r1 = run_cli("render --seed 5 --out-dir " + d1);
  RunResult r2 = run_cli("render --seed 5 --out-dir " + d2);
  CHECK(r1.exit_code == 0);
  CHECK(r2.exit_code == 0);
  CHECK(r1.out.find("ok command=render") != std::string::npos);
  CHECK(file_bytes(d1 + "/scene.svg") == file_bytes(d2 + "/scene.svg"));

  RunResult r3 = run_cli("render --seed 6 --out-dir " + d1 + " --out other.svg");
  CHECK(r3.exit_code == 0);
  CHECK(file_bytes(d1 + "/scene.svg") != file_bytes(d1 + "/other.svg"));
}

TEST_CASE("augment-preview writes clean and augmented panoramas deterministically") {
  const std::string d1 = "/tmp/navtest_cli_aug1", d2 = "/tmp/navtest_cli_aug2";
  fs::remove_all(d1);
  fs::remove_all(d2);
  RunResult r1 = run_cli("augment-preview --seed 9 --out-dir " + d1);
  RunResult r2 = run_cli("augment-preview --seed 9 --out-dir " + d2);
  CHECK(r1.exit_code == 0);
  CHECK(r2.exit_code == 0);
  std::string clean1 = find_output(d1, "depth_clean.bin");
  std::string clean2 = find_output(d2, "depth_clean.bin");
  std::string noisy1 = find_output(d1, "depth_augmented.bin");
  std::string scene1 = find_output(d1, "scene.txt");
  REQUIRE(!clean1.empty());
  REQUIRE(!clean2.empty());
  REQUIRE(!noisy1.empty());
  REQUIRE(!scene1.empty());
  CHECK(file_bytes(clean1) == file_bytes(clean2));
  CHECK(file_bytes(clean1) != file_bytes(noisy1));
}
