#include "dftclk/cli.hpp"
#include "dftclk/report.hpp"
#include "helpers.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace dftclk;
using testing_helpers::source_path;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args)
{
  args.insert(args.begin(), "dftclk");
  std::ostringstream out, err;
  const int code = run_cli(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p)
{
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

class Cli : public ::testing::Test {
protected:
  void SetUp() override
  {
    dir_ = fs::temp_directory_path() /
           (std::string("dftclk_cli_") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text)
  {
    std::ofstream(dir_ / name) << text;
    return dir_ / name;
  }

  fs::path dir_;
  const std::string toy_ = source_path("bench/crossing_toy.net");
};

}  // namespace

TEST_F(Cli, CheckSummarizesCircuit)
{
  const CliRun r = cli({"check", toy_});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_EQ(r.out, "crossing_toy: 84 gates, 8 flops (8 scan), 2 domains, 2 chains, 4 inputs, 2 outputs, 278 fault sites\n");
}

TEST_F(Cli, UsageErrorsExitWithOne)
{
  EXPECT_EQ(cli({}).code, kExitUsage);
  EXPECT_EQ(cli({"check", toy_, "--bogus"}).code, kExitUsage);
  EXPECT_EQ(cli({"atpg", "--circuit", toy_, "--experiment", "z"}).code, kExitUsage);
  EXPECT_EQ(cli({"cpf-verify", "--pulses", "5"}).code, kExitUsage);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitUsage);
}

TEST_F(Cli, HelpExitsWithZero) { EXPECT_EQ(cli({"--help"}).code, kExitOk); }

TEST_F(Cli, InputErrorsExitWithThree)
{
  EXPECT_EQ(cli({"check", (dir_ / "missing.net").string()}).code, kExitInput);
  const CliRun r = cli({"check", write("bad.net", "x = AND(\n").string()});
  EXPECT_EQ(r.code, kExitInput);
  EXPECT_NE(r.err.find("E_SYNTAX"), std::string::npos);
}

TEST_F(Cli, CpfVerifyPassesAndDetectsWrongShiftLength)
{
  EXPECT_EQ(cli({"cpf-verify", "--scenarios", "200"}).code, kExitOk);
  const CliRun bad = cli({"cpf-verify", "--scenarios", "200", "--shift-stages", "4",
                       "--dump-waveform", (dir_ / "wave.txt").string()});
  EXPECT_EQ(bad.code, kExitMismatch);
  EXPECT_TRUE(fs::exists(dir_ / "wave.txt"));
}

TEST_F(Cli, AtpgOutputsReadBackThroughFaultsim)
{
  const CliRun gen = cli({"atpg", "--circuit", toy_, "--experiment", "c", "--out", dir_.string()});
  ASSERT_EQ(gen.code, kExitOk) << gen.err;
  for (const char* f : {"patterns.txt", "faults.txt", "report.txt"}) EXPECT_TRUE(fs::exists(dir_ / f)) << f;
  const ReportRow generated = parse_report(slurp(dir_ / "report.txt")).at(0);
  EXPECT_EQ(generated.label, "(c)");
  EXPECT_EQ(generated.eff_hundredths, 10000);

  const CliRun sim = cli({"faultsim", "--circuit", toy_, "--patterns", (dir_ / "patterns.txt").string(), "--experiment",
                       "c"});
  ASSERT_EQ(sim.code, kExitOk) << sim.err;
  const ReportRow replayed = parse_report(sim.out).at(0);
  EXPECT_EQ(replayed.tc_hundredths, generated.tc_hundredths);
  EXPECT_EQ(replayed.patterns, generated.patterns);
  EXPECT_FALSE(replayed.eff_hundredths.has_value());
}

TEST_F(Cli, SeedComesFromFlagConfigOrEnvironment)
{
  int runs = 0;
  auto patterns = [&](std::vector<std::string> extra) {
    const fs::path out = dir_ / ("run" + std::to_string(runs++));
    std::vector<std::string> args = {"atpg", "--circuit", toy_, "--experiment", "c", "--out", out.string()};
    args.insert(args.end(), extra.begin(), extra.end());
    const CliRun r = cli(args);
    EXPECT_EQ(r.code, kExitOk) << r.err;
    return slurp(out / "patterns.txt");
  };
  const std::string seed0 = patterns({"--seed", "0"});
  const std::string seed7 = patterns({"--seed", "7"});
  ASSERT_NE(seed0, seed7);

  const fs::path config = write("run.cfg", "# seed for the random fill\nseed = 7\n");
  EXPECT_EQ(patterns({"--config", config.string()}), seed7);
  EXPECT_EQ(patterns({"--config=" + config.string()}), seed7);
  EXPECT_EQ(patterns({"--config", config.string(), "--seed", "0"}), seed0);

  ::setenv("DFTCLK_SEED", "7", 1);
  const std::string from_env = patterns({});
  const std::string flag_wins = patterns({"--seed", "0"});
  ::unsetenv("DFTCLK_SEED");
  EXPECT_EQ(from_env, seed7);
  EXPECT_EQ(flag_wins, seed0);
}

TEST_F(Cli, ConfigWithUnknownKeyIsUsageError)
{
  const fs::path config = write("bad.cfg", "colour = blue\n");
  EXPECT_EQ(cli({"atpg", "--circuit", toy_, "--experiment", "a", "--config", config.string()}).code, kExitUsage);
}

TEST_F(Cli, ExperimentWritesTablesAndReportReemitsThem)
{
  const CliRun r = cli({"experiment", "--experiment", "a", "--experiment", "b", "--circuit", toy_, "--out", dir_.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.out.rfind("# crossing_toy\n", 0), 0U);
  EXPECT_TRUE(fs::exists(dir_ / "crossing_toy" / "a" / "patterns.txt"));
  EXPECT_TRUE(fs::exists(dir_ / "crossing_toy" / "b" / "faults.txt"));
  EXPECT_FALSE(fs::exists(dir_ / "crossing_toy" / "c"));

  const CliRun again = cli({"report", (dir_ / "report.txt").string()});
  ASSERT_EQ(again.code, kExitOk) << again.err;
  EXPECT_EQ(again.out, r.out);
}
