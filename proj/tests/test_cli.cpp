#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "dyntok/dyntok.hpp"

namespace {

namespace fs = std::filesystem;

const fs::path kSource(DYNTOK_SOURCE_DIR);

struct Result {
  int code = -1;
  std::string out;
};

// Runs the CLI through the shell with stderr folded into stdout.
Result run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " '" DYNTOK_CLI "' " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() / ("dyntok_cli_" + std::to_string(::getpid()) + "_" +
                                       ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  std::string path(const std::string& name) const { return "'" + (dir / name).string() + "'"; }

  fs::path generate(const std::string& scene, const std::string& env = "") {
    const auto out = dir / (scene + ".dtg");
    auto r = run("generate --scene '" + (kSource / "corpus" / (scene + ".json")).string() + "' --seed 7 --out '" +
                     out.string() + "'",
                 env);
    EXPECT_EQ(r.code, 0) << r.out;
    return out;
  }

  std::vector<std::string> csv_lines(const fs::path& file) const {
    std::istringstream in(dyntok::byteio::read_file(file));
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    return lines;
  }

  fs::path dir;
};

std::string read(const fs::path& p) { return dyntok::byteio::read_file(p); }

TEST_F(Cli, RejectsOutOfRangeThreshold) {
  const auto grid = generate("constant");
  auto r = run("compress --in '" + grid.string() + "' --out " + path("o") + " --threshold 1.5");
  EXPECT_EQ(r.code, 2) << r.out;
  EXPECT_FALSE(fs::exists(dir / "o" / "constant.dtcs"));
  EXPECT_EQ(run("compress --in '" + grid.string() + "' --threshold -1").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
}

TEST_F(Cli, CorpusMatchesGoldenFiles) {
  for (const std::string scene : {"desk", "constant", "orthogonal"}) {
    const auto grid = generate(scene);
    EXPECT_EQ(read(grid), read(kSource / "tests" / "golden" / (scene + ".dtg"))) << scene;
    const bool pool = scene == "desk";
    auto r = run("compress --in '" + grid.string() + "' --out " + path("out") + " --threshold 0.6 --scale 4" +
                 (pool ? " --pool2" : ""));
    ASSERT_EQ(r.code, 0) << r.out;
    std::size_t compared = 0;
    for (const auto& entry : fs::directory_iterator(dir / "out")) {
      const auto name = entry.path().filename().string();
      if (name == "manifest.json" || name.rfind(scene, 0) != 0) continue;
      EXPECT_EQ(read(entry.path()), read(kSource / "tests" / "golden" / name)) << name;
      ++compared;
    }
    EXPECT_GE(compared, 4u) << scene;
  }
}

TEST_F(Cli, RerunsAndThreadCountsAreByteIdentical) {
  const auto grid = generate("desk");
  std::vector<std::string> runs;
  for (const std::string env : {"DYNTOK_THREADS=1", "DYNTOK_THREADS=1", "DYNTOK_THREADS=2", "DYNTOK_THREADS=4",
                                "DYNTOK_THREADS=0"}) {
    const auto out = dir / ("run" + std::to_string(runs.size()));
    auto r = run("compress --in '" + grid.string() + "' --out '" + out.string() + "' --scale 2", env);
    ASSERT_EQ(r.code, 0) << r.out;
    std::string all;
    for (const auto& name : {"desk.dtcs", "desk_stats.json", "desk_groups.json", "desk_f0_t0.60.pgm",
                             "desk_f1_t0.60.pgm"})
      all += read(out / name);
    runs.push_back(all);
  }
  for (const auto& r : runs) EXPECT_EQ(r, runs[0]);
}

TEST_F(Cli, ManifestRecordsArtifacts) {
  const auto grid = generate("constant");
  ASSERT_EQ(run("compress --in '" + grid.string() + "' --out " + path("o")).code, 0);
  const auto manifest = nlohmann::json::parse(read(dir / "o" / "manifest.json"));
  EXPECT_EQ(manifest.at("command"), "compress");
  EXPECT_EQ(manifest.at("version"), dyntok::kVersion);
  EXPECT_FALSE(manifest.at("artifacts").empty());
}

TEST_F(Cli, DefaultSweepIsMonotone) {
  const auto grid = generate("desk");
  ASSERT_EQ(run("sweep --in '" + grid.string() + "' --out " + path("s")).code, 0);
  const auto lines = csv_lines(dir / "s" / "desk_sweep.csv");
  ASSERT_EQ(lines.size(), 6u);
  EXPECT_EQ(lines[0], "threshold,ratio,fused,total");
  double prev = 0.0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const double ratio = std::stod(lines[i].substr(lines[i].find(',') + 1));
    EXPECT_GE(ratio, prev) << lines[i];
    prev = ratio;
  }
  EXPECT_TRUE(fs::exists(dir / "s" / "desk_f0_sweep.pgm"));

  ASSERT_EQ(run("sweep --in '" + grid.string() + "' --out " + path("t") + " --thresholds 0.4,0.6").code, 0);
  EXPECT_EQ(csv_lines(dir / "t" / "desk_sweep.csv").size(), 3u);
  EXPECT_EQ(run("sweep --in '" + grid.string() + "' --out " + path("u") + " --thresholds 0.6,0.4").code, 2);
}

TEST_F(Cli, ConstantSceneSweepRatio) {
  const auto grid = generate("constant");
  ASSERT_EQ(run("sweep --in '" + grid.string() + "' --out " + path("s")).code, 0);
  const auto lines = csv_lines(dir / "s" / "constant_sweep.csv");
  ASSERT_EQ(lines.size(), 6u);
  char expected[32];
  std::snprintf(expected, sizeof expected, "%.6f", 28.0 / 210.0);
  for (std::size_t i = 1; i < lines.size(); ++i) EXPECT_NE(lines[i].find(std::string(",") + expected + ","), std::string::npos) << lines[i];
}

TEST_F(Cli, Budget) {
  auto r = run("budget --frames 96,64");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out, "frames,ratio,total_tokens\n96,1.0000,20160\n64,1.0000,13440\n");
  r = run("budget --frames 160 --ratios 0.444 --out " + path("b"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(read(dir / "b" / "budget.csv"), "frames,ratio,total_tokens\n160,0.4440,16160\n");
  EXPECT_EQ(run("budget --frames ''").code, 2);
  EXPECT_EQ(run("budget --ratios 1.5").code, 2);
}

TEST_F(Cli, MissingInputNamesStage) {
  auto r = run("compress --in " + path("absent.dtg") + " --out " + path("o"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("[load]"), std::string::npos) << r.out;
}

TEST_F(Cli, CorruptInputIsRejected) {
  dyntok::byteio::write_file_atomic(dir / "bad.dtg", "DTGR\x02");
  auto r = run("render --in " + path("bad.dtg") + " --out " + path("o"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("malformed"), std::string::npos) << r.out;
}

}  // namespace
