#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("qmfs_cli_test_" + name);
    fs::remove_all(p);
    return p;
}

int run(const std::string& args) {
    const std::string cmd = std::string(QMFS_CLI_PATH) + " " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

const std::string kConfigs = QMFS_CONFIG_DIR;

}  // namespace

TEST(Cli, MissingConfigExitsTwoWithoutOutput) {
    const auto out = scratch("missing");
    EXPECT_EQ(run("stats --config /nonexistent.json --out " + out.string()), 2);
    EXPECT_FALSE(fs::exists(out / "stats.csv"));
    EXPECT_FALSE(fs::exists(out / "stats.manifest.json"));
}

TEST(Cli, InvalidConfigExitsTwo) {
    const auto out = scratch("invalid");
    fs::create_directories(out);
    std::ofstream(out / "bad.json") << R"({"cavities": [{"kappa_rate": 1, "chi_rate": 0.5}],
        "loss": {"eta": 1.3}, "tau_kappa": 1})";
    EXPECT_EQ(run("stats --config " + (out / "bad.json").string() + " --out " + out.string()), 2);
    EXPECT_FALSE(fs::exists(out / "stats.csv"));
}

TEST(Cli, UnreachableTargetExitsThree) {
    const auto out = scratch("unreachable");
    fs::create_directories(out);
    std::ofstream(out / "weak.json") << R"({"cavities": [{"kappa_rate": 1, "chi_rate": 0.5, "n0": 1e-9}],
        "tau_kappa": 1})";
    EXPECT_EQ(run("optimize --config " + (out / "weak.json").string() + " --out " + out.string()), 3);
}

TEST(Cli, StatsOnQmfsConfigEmitsProtocolColumns) {
    const auto out = scratch("stats");
    ASSERT_EQ(run("stats --config " + kConfigs + "/fig3a_qmfs.json --grid 1:10:4 --out " + out.string()), 0);
    std::ifstream in(out / "stats.csv");
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header.rfind("kappa_tau,snr_coherent,snr_single_opt", 0), 0u) << header;
    EXPECT_NE(header.find("snr_qmfs"), std::string::npos);
    int rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    EXPECT_EQ(rows, 4);
    const auto manifest = nlohmann::json::parse(slurp(out / "stats.manifest.json"));
    EXPECT_EQ(manifest["subcommand"], "stats");
    EXPECT_EQ(manifest["config"]["protocol"], "two_mode_qmfs");
    EXPECT_TRUE(manifest.contains("wall_time_s"));
    EXPECT_TRUE(manifest.contains("version"));
    EXPECT_TRUE(manifest.contains("seed"));
}

TEST(Cli, HeisenbergMatchesClosedForm) {
    const auto out = scratch("heisenberg");
    ASSERT_EQ(run("heisenberg --N 8 --out " + out.string()), 0);
    std::ifstream in(out / "heisenberg.csv");
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    std::stringstream ss(row);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
    ASSERT_GE(v.size(), 4u);
    EXPECT_NEAR(v[2], 32.0 / 9.0, 1e-12);
    EXPECT_NEAR(v[3], 16.0 * std::sqrt(1.25), 1e-12);
}

TEST(Cli, TrajectoryCsvIsByteIdenticalForSameSeed) {
    const auto a = scratch("traj_a"), b = scratch("traj_b");
    const std::string args = "trajectories --config " + kConfigs + "/coherent.json --n-traj 50 --seed 77 --threads 2";
    ASSERT_EQ(run(args + " --out " + a.string()), 0);
    ASSERT_EQ(run(args + " --out " + b.string()), 0);
    EXPECT_EQ(slurp(a / "trajectories.csv"), slurp(b / "trajectories.csv"));
    EXPECT_EQ(slurp(a / "trajectories.csv").rfind("traj_id,qubit_state,M\n", 0), 0u);
    EXPECT_TRUE(fs::exists(a / "trajectories_summary.csv"));
}

TEST(Cli, SweepCsvIsByteIdenticalAcrossRuns) {
    const auto a = scratch("fig3b_a"), b = scratch("fig3b_b");
    ASSERT_EQ(run("fig3b --grid 1:100:3:log --out " + a.string()), 0);
    ASSERT_EQ(run("fig3b --grid 1:100:3:log --threads 3 --out " + b.string()), 0);
    EXPECT_EQ(slurp(a / "fig3b.csv"), slurp(b / "fig3b.csv"));
    EXPECT_NE(slurp(a / "fig3b.csv").find("_in_inverse_kappa"), std::string::npos);
}

TEST(Cli, EveryFigureSubcommandRuns) {
    const auto out = scratch("figs");
    EXPECT_EQ(run("fig3a --grid 0.5:5:3 --out " + out.string()), 0);
    EXPECT_EQ(run("fig3c --grid 1:5:2 --out " + out.string()), 0);
    EXPECT_EQ(run("fig4a --grid -0.05:0.05:3 --out " + out.string()), 0);
    EXPECT_EQ(run("fig4b --grid 0.34:0.36:5 --out " + out.string()), 0);
    EXPECT_EQ(run("optimize --config " + kConfigs + "/single_mode.json --out " + out.string()), 0);
    for (const char* name : {"fig3a", "fig3c", "fig4a", "fig4b", "optimize"}) {
        EXPECT_TRUE(fs::exists(out / (std::string(name) + ".csv"))) << name;
        EXPECT_TRUE(fs::exists(out / (std::string(name) + ".manifest.json"))) << name;
    }
    const auto m = nlohmann::json::parse(slurp(out / "fig4b.manifest.json"));
    EXPECT_TRUE(m.contains("equal_opposite_points"));
}

TEST(Cli, BadGridIsRejected) {
    const auto out = scratch("badgrid");
    EXPECT_NE(run("fig3a --grid 1:2 --out " + out.string()), 0);
    EXPECT_FALSE(fs::exists(out / "fig3a.csv"));
}
