#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "support.hpp"

namespace fs = std::filesystem;
using lutscope::testing::fixture_path;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("lutscope_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Runs the CLI with stdout and stderr discarded; returns the exit code.
  int run(const std::string& args, const std::string& env = "") const {
    const std::string cmd = env + " " + LUTSCOPE_CLI + " " + args + " >/dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
};

} // namespace

TEST_F(Cli, NoSubcommandIsUsageError) {
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("prove --method nope --properties x --out y"), 1);
}

TEST_F(Cli, BenchPipelineConfirmsTheTrigger) {
  ASSERT_EQ(run("bench --archetype pattern-lock --pattern beef --seed 7 --out " + path("b.v")), 0);
  ASSERT_TRUE(fs::exists(path("b.truth.json")));
  EXPECT_EQ(run("pipeline --netlist " + path("b.v") + " --out " + path("r1")), 3);
  EXPECT_EQ(run("pipeline --netlist " + path("b.v") + " --out " + path("r2")), 3);

  auto rep = nlohmann::json::parse(slurp(path("r1/report.json")));
  EXPECT_TRUE(rep["trojan_confirmed"].get<bool>());
  EXPECT_TRUE(rep["mitigated"].get<bool>());
  ASSERT_FALSE(rep["triggers"].empty());
  for (const auto& f : {"report.txt", "report.json", "proofs.json", "plan.json", "patched.v", "mitigation.json"})
    EXPECT_EQ(slurp(path(std::string("r1/") + f)), slurp(path(std::string("r2/") + f))) << f;

  // The first trigger drives the pattern onto the data port.
  auto trig = nlohmann::json::parse(slurp(path("r1/" + rep["triggers"][0]["file"].get<std::string>())));
  EXPECT_NE(trig.dump().find("data"), std::string::npos);

  const std::string t = path("r1/" + rep["triggers"][0]["file"].get<std::string>());
  EXPECT_EQ(run("verify --original " + path("b.v") + " --patched " + path("r1/patched.v") + " --trigger " + t +
                " --out " + path("m.json")),
            0);
  EXPECT_EQ(run("verify --original " + path("b.v") + " --patched " + path("b.v") + " --trigger " + t + " --out " +
                path("m2.json")),
            3);
}

TEST_F(Cli, SdcPipelineFindsNoTrigger) {
  EXPECT_EQ(run("pipeline --netlist " + fixture_path("sdc.v") + " --out " + path("r")), 0);
  EXPECT_NE(slurp(path("r/report.txt")).find("HOLDS"), std::string::npos);
}

TEST_F(Cli, PatchNamedCell) {
  const std::string sdc = fixture_path("sdc.v");
  ASSERT_EQ(run("converge --netlist " + sdc + " --out " + path("a.json")), 0);
  ASSERT_EQ(run("patch --netlist " + sdc + " --analysis " + path("a.json") + " --cell pay --out " + path("plan.json") +
                " --equiv-out " + path("eq.json")),
            0);
  auto plan = nlohmann::json::parse(slurp(path("plan.json")));
  EXPECT_NE(plan.dump().find("5ccc"), std::string::npos);
}

TEST_F(Cli, MismatchedTraceIsInputError) {
  ASSERT_EQ(run("simulate --netlist " + fixture_path("and2.v") + " --cycles 20 --out " + path("t.vcd")), 0);
  EXPECT_EQ(run("analyze --netlist " + fixture_path("and2.v") + " --vcd " + path("t.vcd") + " --out " + path("a.json")),
            0);
  EXPECT_EQ(run("analyze --netlist " + fixture_path("sdc.v") + " --vcd " + path("t.vcd") + " --out " + path("b.json")),
            2);
}

TEST_F(Cli, StaleArtifactIsInputError) {
  ASSERT_EQ(run("converge --netlist " + fixture_path("sdc.v") + " --out " + path("a.json")), 0);
  EXPECT_EQ(run("extract --netlist " + fixture_path("and2.v") + " --analysis " + path("a.json") + " --out " +
                path("p.json")),
            2);
}

TEST_F(Cli, SeedFallsBackToEnvironment) {
  ASSERT_EQ(run("bench --archetype sdc-pair --seed 9 --out " + path("a.v")), 0);
  ASSERT_EQ(run("bench --archetype sdc-pair --out " + path("b.v"), "LUTSCOPE_SEED=9"), 0);
  ASSERT_EQ(run("bench --archetype sdc-pair --out " + path("c.v")), 0);
  EXPECT_EQ(slurp(path("a.v")), slurp(path("b.v")));
  EXPECT_NE(slurp(path("a.v")), slurp(path("c.v")));
}
