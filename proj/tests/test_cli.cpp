#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "grouprec/synthetic.hpp"
#include "testutil.hpp"

using namespace grouprec;
namespace fs = std::filesystem;

namespace {

const char* cli_path() { return GROUPREC_CLI_PATH; }

int run_cli(const std::string& args) {
  const std::string cmd = std::string(cli_path()) + " " + args + " >/dev/null 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

// Tiny benchmark plus a config file pointing at it.
std::string write_config(const std::string& dir, std::uint64_t seed) {
  BenchmarkSpec spec;
  spec.n_users = 36;
  spec.latent_clusters = 3;
  spec.pool_per_cluster = 8;
  spec.shared_items = 10;
  spec.train_per_user = 4;
  spec.group_size = 4;
  spec.negatives_per_case = 10;
  const auto paths = make_benchmark_files(dir + "/data", spec, seed);
  const std::string cfg_path = dir + "/run.cfg";
  std::ofstream cfg(cfg_path);
  cfg << "data.train = " << paths.train << "\n"
      << "data.user_test = " << paths.user_test << "\n"
      << "data.user_negatives = " << paths.user_negatives << "\n"
      << "data.group_train = " << paths.group_train << "\n"
      << "data.group_test = " << paths.group_test << "\n"
      << "data.group_negatives = " << paths.group_negatives << "\n"
      << "data.group_members = " << paths.group_members << "\n"
      << "model.dim = 8\n"
      << "opt.lr = 0.01\n"
      << "train.epochs = 4\n"
      << "train.gid_epoch = 1\n"
      << "gim.explore_budget = 0\n";
  return cfg_path;
}

}  // namespace

TEST_CASE("train/eval happy path and stable exit codes") {
  const auto dir = testutil::scratch_dir("cli");
  const auto cfg = write_config(dir, 21);

  CHECK(run_cli("train --config " + cfg + " --seed 1 --out " + dir + "/run1") == 0);
  CHECK(fs::exists(dir + "/run1/checkpoint.bin"));
  CHECK(fs::exists(dir + "/run1/history.csv"));
  CHECK(fs::exists(dir + "/run1/manifest.json"));

  CHECK(run_cli("eval --checkpoint " + dir + "/run1/checkpoint.bin --config " + cfg + " --out " +
                dir + "/eval1") == 0);
  CHECK(fs::exists(dir + "/eval1/metrics.csv"));
  CHECK(fs::exists(dir + "/eval1/report.txt"));

  SUBCASE("missing dataset file exits 2 and names the path") {
    std::ofstream bad(dir + "/bad.cfg");
    bad << "data.train = " << dir << "/nowhere.txt\n"
        << "data.user_negatives = " << dir << "/nowhere2.txt\n";
    bad.close();
    CHECK(run_cli("train --config " + dir + "/bad.cfg --out " + dir + "/run_bad") == 2);
  }
  SUBCASE("unknown config key exits 2") {
    CHECK(run_cli("train --config " + cfg + " --set wrong.key=1 --out " + dir + "/run_bad2") == 2);
  }
  SUBCASE("ablation overrides are accepted") {
    CHECK(run_cli("train --config " + cfg + " --set loss.a=0 --set loss.b=0 --out " + dir +
                  "/run_base") == 0);
  }
  SUBCASE("nearest-center group mode flag works") {
    CHECK(run_cli("eval --checkpoint " + dir + "/run1/checkpoint.bin --config " + cfg +
                  " --group-mode nearest-center --out " + dir + "/eval_nc") == 0);
    CHECK(run_cli("eval --checkpoint " + dir + "/run1/checkpoint.bin --config " + cfg +
                  " --group-mode bogus --out " + dir + "/eval_bogus") == 2);
  }
  SUBCASE("inspect-checkpoint prints a summary") {
    CHECK(run_cli("inspect-checkpoint --checkpoint " + dir + "/run1/checkpoint.bin") == 0);
    CHECK(run_cli("inspect-checkpoint --checkpoint " + dir + "/run1/history.csv") == 2);
  }
}

TEST_CASE("identify subcommand on a points file") {
  const auto dir = testutil::scratch_dir("cli_identify");
  Rng rng(5);
  const auto blobs = make_blobs(2, 30, 2, 0.05, 10.0, rng);
  std::ofstream pts(dir + "/points.txt");
  for (Index i = 0; i < blobs.points.rows(); ++i) {
    pts << blobs.points(i, 0) << ' ' << blobs.points(i, 1) << '\n';
  }
  pts.close();

  CHECK(run_cli("identify --points " + dir + "/points.txt --seed 4 --explore-budget 0 --out " +
                dir + "/id1") == 0);
  const auto text = testutil::read_file(dir + "/id1/identify.txt");
  CHECK(text.find("k_prime 2") != std::string::npos);
  CHECK(text.find("silhouette") != std::string::npos);

  SUBCASE("same seed produces identical output bytes") {
    CHECK(run_cli("identify --points " + dir + "/points.txt --seed 4 --explore-budget 0 --out " +
                  dir + "/id2") == 0);
    CHECK(testutil::read_file(dir + "/id2/identify.txt") == text);
  }
  SUBCASE("duplicate-only input reports a single center") {
    std::ofstream dup(dir + "/dup.txt");
    for (int i = 0; i < 5; ++i) dup << "1.5 -2.0\n";
    dup.close();
    CHECK(run_cli("identify --points " + dir + "/dup.txt --out " + dir + "/id3") == 0);
    CHECK(testutil::read_file(dir + "/id3/identify.txt").find("k_prime 1") != std::string::npos);
  }
  SUBCASE("fewer than two points exits 2") {
    std::ofstream one(dir + "/one.txt");
    one << "0 0\n";
    one.close();
    CHECK(run_cli("identify --points " + dir + "/one.txt --out " + dir + "/id4") == 2);
  }
}

TEST_CASE("sweep writes one row per grid point, seed, and task") {
  const auto dir = testutil::scratch_dir("cli_sweep");
  const auto cfg = write_config(dir, 31);
  CHECK(run_cli("sweep --config " + cfg + " --grid loss.a=0,0.5 --seeds 1,2,3 --out " + dir +
                "/sw") == 0);
  const auto csv = testutil::read_file(dir + "/sw/sweep.csv");
  int lines = 0;
  for (char c : csv) lines += c == '\n' ? 1 : 0;
  CHECK(lines == 1 + 2 * 3 * 2);  // header + grid x seeds x {user, group}
  CHECK(csv.find("hr@5") != std::string::npos);

  SUBCASE("empty grid exits 2") {
    CHECK(run_cli("sweep --config " + cfg + " --grid '' --seeds 1 --out " + dir + "/sw2") == 2);
  }
}
