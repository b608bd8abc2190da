#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "swarm/cli.hpp"

namespace fs = std::filesystem;

namespace {

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "swarm");
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  return swarm::run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const fs::path kScenarios = fs::path(SWARM_SOURCE_DIR) / "scenarios";

}  // namespace

TEST(Cli, HelpAndBadFlags) {
  EXPECT_EQ(cli({"--help"}), 0);
  EXPECT_EQ(cli({"replay", "--bogus"}), 1);
  EXPECT_EQ(cli({"replay"}), 1);
  EXPECT_EQ(cli({"bench", "--suite", "nope"}), 1);
}

TEST(Cli, ReplayIsDeterministicAndComparable) {
  const fs::path tmp = fs::temp_directory_path();
  const fs::path a = tmp / "swarm_cli_a.jsonl";
  const fs::path b = tmp / "swarm_cli_b.jsonl";
  const fs::path m = tmp / "swarm_cli_m.json";
  const std::string sc = (kScenarios / "head_on.json").string();
  ASSERT_EQ(cli({"replay", "--scenario", sc, "--trace", a.string(), "--metrics", m.string()}), 0);
  ASSERT_EQ(cli({"replay", "--scenario", sc, "--trace", b.string()}), 0);
  EXPECT_EQ(cli({"compare", "--a", a.string(), "--b", b.string()}), 0);
  EXPECT_FALSE(slurp(m).empty());
  EXPECT_EQ(cli({"metrics", "--trace", a.string()}), 0);
  ASSERT_EQ(cli({"replay", "--scenario", sc, "--trace", b.string(), "--seed", "9"}), 0);
  // fixed start poses: the seed does not matter here
  EXPECT_EQ(cli({"compare", "--a", a.string(), "--b", b.string()}), 0);
  ASSERT_EQ(cli({"replay", "--scenario", (kScenarios / "circle8.json").string(), "--trace",
                 b.string()}),
            0);
  EXPECT_EQ(cli({"compare", "--a", a.string(), "--b", b.string()}), 2);
  for (const fs::path& p : {a, b, m}) fs::remove(p);
}

TEST(Cli, MissingFilesAreErrors) {
  EXPECT_EQ(cli({"replay", "--scenario", "/nonexistent.json"}), 1);
  EXPECT_EQ(cli({"metrics", "--trace", "/nonexistent.jsonl"}), 1);
  EXPECT_EQ(cli({"replay", "--scenario", (kScenarios / "live.json").string()}), 1);
}

TEST(Cli, SynthAndPatterns) {
  const fs::path tmp = fs::temp_directory_path() / "swarm_cli_out";
  fs::create_directories(tmp);
  const fs::path traj = tmp / "hand.traj";
  EXPECT_EQ(cli({"synth", "--sign", "scissors", "--from", "0,0", "--to", "100,50", "--out",
                 traj.string()}),
            0);
  EXPECT_TRUE(fs::exists(traj));
  EXPECT_EQ(cli({"patterns", "--out", tmp.string(), "--bits", "4"}), 0);
  EXPECT_TRUE(fs::exists(tmp / "x_00.pgm"));
  EXPECT_TRUE(fs::exists(tmp / "y_03.pgm"));
  fs::remove_all(tmp);
}
