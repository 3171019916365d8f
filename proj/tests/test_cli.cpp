#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <movq/cli.hpp>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "movq");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = movq::cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::current_path() / "cli_scratch" / name;
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Cli, UnknownSubcommandIsUsageError) {
  const auto r = run({"frobnicate"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("simulate"), std::string::npos);
}

TEST(Cli, UnknownFlagIsUsageError) {
  EXPECT_EQ(run({"simulate", "--warp", "9"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"simulate", "--kernel", "spline"}).code, 2);
}

TEST(Cli, InvalidParametersFail) {
  const auto r = run({"validate", "--lambda", "-1"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("lambda"), std::string::npos);
}

TEST(Cli, ValidateWarnsOnRecoilBound) {
  const auto r = run({"validate", "--beta-omega0", "5e-7"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("WARNING: recoil bound violated"), std::string::npos);
  EXPECT_NE(r.out.find("warnings=1"), std::string::npos);
  EXPECT_NE(r.out.find("failures=0"), std::string::npos);
}

TEST(Cli, ValidateCleanRun) {
  const auto r = run({"validate", "--beta-omega0", "1"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("warnings=0"), std::string::npos);
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

TEST(Cli, SimulateWritesFiles) {
  const fs::path dir = scratch("sim");
  const auto r = run({"simulate", "--t-max", "5", "--dt", "0.01", "--beta-omega0", "1", "--out", dir.string(),
                      "--name", "one"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "one.csv"));
  EXPECT_TRUE(fs::exists(dir / "one.gp"));
  EXPECT_TRUE(fs::exists(dir / "one_manifest.txt"));
}

TEST(Cli, ConfigFileWithFlagOverride) {
  const fs::path dir = scratch("cfg");
  fs::create_directories(dir);
  std::ofstream(dir / "p.cfg") << "lambda = 0.1\nt_max = 4\ndt = 0.02\n";
  const auto r = run({"simulate", "--config", (dir / "p.cfg").string(), "--t-max", "2", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("steps=100 dt=0.02"), std::string::npos) << r.out;
  EXPECT_EQ(run({"simulate", "--config", (dir / "missing.cfg").string()}).code, 2);
}

TEST(Cli, FigureTwoWritesFourCurves) {
  const fs::path dir = scratch("fig2");
  const auto r = run({"figure", "fig2", "--dt", "0.05", "--stride", "10", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  int csv = 0;
  for (const auto& e : fs::directory_iterator(dir)) csv += e.path().extension() == ".csv";
  EXPECT_EQ(csv, 4);
  EXPECT_TRUE(fs::exists(dir / "fig2.gp"));
}

TEST(Cli, UnknownFigureFails) {
  const auto r = run({"figure", "fig11"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("fig11"), std::string::npos);
}

TEST(Cli, SweepReportsRows) {
  const fs::path dir = scratch("sweep");
  const auto r = run({"sweep", "--axis", "delta", "--values", "0,0.1", "--t-max", "5", "--dt", "0.05",
                      "--observable", "average", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("delta=0.1 time_average="), std::string::npos);
  EXPECT_EQ(run({"sweep", "--t-max", "5"}).code, 1);
}

TEST(Cli, CompareBackendsReport) {
  const auto r = run({"compare-backends", "--lambda", "0.01", "--beta-omega0", "1", "--lags", "20", "--t-max",
                      "10", "--dt", "0.01"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("boundary_term=off max_abs_dev="), std::string::npos);
  EXPECT_NE(r.out.find("max_rel_dev="), std::string::npos);
  EXPECT_NE(r.out.find("history_vs_aux"), std::string::npos);
}

TEST(Cli, VersionFlag) {
  const auto r = run({"--version"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find(std::string(movq::kVersion)), std::string::npos);
}
