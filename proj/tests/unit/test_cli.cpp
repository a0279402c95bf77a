#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "adaptmps/cli.hpp"
#include "adaptmps/serialize.hpp"

namespace adaptmps {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("adaptmps_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const fs::path& p) {
  std::vector<std::string> out;
  std::ifstream in(p);
  for (std::string s; std::getline(in, s);) out.push_back(s);
  return out;
}

json xyz_model(int L, double gamma) {
  return {{"model", "xyz"}, {"l", L}, {"gamma", gamma}, {"delta", 1.5}, {"h", 0.5}};
}

TEST(Cli, GsTwoSitesGivesMinusThreePointFive) {
  auto dir = scratch("gs2");
  json cfg{{"model", {{"model", "xyz"}, {"l", 2}, {"delta", 1.5}}},
           {"gs", json::object()},
           {"output", {{"directory", dir.string()}}}};
  auto out = cli::run_gs(cfg);
  EXPECT_NEAR(out.at("E").get<double>(), -3.5, 1e-12);
  auto energy = json::parse(slurp(dir / "energy.json"));
  EXPECT_NEAR(energy.at("E").get<double>(), -3.5, 1e-12);
  EXPECT_TRUE(energy.contains("sweeps"));
  EXPECT_TRUE(energy.contains("max_bond"));
  EXPECT_TRUE(fs::exists(dir / "state.json"));
  EXPECT_NO_THROW(load_mps((dir / "state.json").string()));
}

TEST(Cli, GsSectorRows) {
  auto dir0 = scratch("gs_g0"), dir1 = scratch("gs_g1");
  cli::run_gs({{"model", xyz_model(8, 0.0)}, {"gs", json::object()}, {"output", {{"directory", dir0.string()}}}});
  cli::run_gs({{"model", xyz_model(8, 1.0)}, {"gs", json::object()}, {"output", {{"directory", dir1.string()}}}});
  auto rows0 = lines(dir0 / "pn.csv");
  ASSERT_EQ(rows0.size(), 2u);  // header + a single sector
  EXPECT_EQ(rows0[1].rfind("4,0,", 0), 0u);
  auto rows1 = lines(dir1 / "pn.csv");
  ASSERT_GT(rows1.size(), 2u);
  for (std::size_t i = 1; i < rows1.size(); ++i) {
    const int sz = std::stoi(rows1[i].substr(rows1[i].find(',') + 1));
    EXPECT_EQ(((sz % 4) + 4) % 4, 0) << rows1[i];
  }
}

TEST(Cli, QuenchIsDeterministic) {
  auto run = [](const std::string& tag) {
    auto dir = scratch(tag);
    json cfg{{"model", xyz_model(4, 0.5)},
             {"quench", {{"dt", 0.01}, {"n_steps", 20}}},
             {"output", {{"directory", dir.string()}, {"record_interval", 5}}},
             {"seed", 3}};
    cli::run_quench(cfg);
    return slurp(dir / "trajectory.csv");
  };
  const auto a = run("det_a"), b = run("det_b");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, b);
  EXPECT_NE(a.find("P_Sz=0"), std::string::npos);
  EXPECT_NE(a.find("parity"), std::string::npos);
}

TEST(Cli, QuenchWithoutChangeIsStationary) {
  auto dir = scratch("stationary");
  json cfg{{"model", xyz_model(4, 0.0)},
           {"quench", {{"dt", 0.01}, {"n_steps", 20}, {"svd_tolerance", 0.0}}},
           {"output", {{"directory", dir.string()}, {"record_interval", 20}}}};
  cli::run_quench(cfg);
  auto rows = lines(dir / "trajectory.csv");
  ASSERT_EQ(rows.size(), 3u);
  auto field = [](const std::string& row, int i) {
    std::stringstream ss(row);
    std::string s;
    for (int k = 0; k <= i; ++k) std::getline(ss, s, ',');
    return std::stod(s);
  };
  for (int col = 3; col < 8; ++col) EXPECT_NEAR(field(rows[1], col), field(rows[2], col), 1e-8) << col;
}

TEST(Cli, LindbladWritesTraceAndSectors) {
  auto dir = scratch("lindblad");
  json cfg{{"model",
            {{"model", "lindblad_bh"}, {"l", 2}, {"d", 3}, {"u", 4.0}, {"lambda1", 1.0}, {"lambdaL", 1.0},
             {"nbar1", 0.75}, {"nbarL", 0.25}}},
           {"lindblad", {{"scheme", "hybrid_trotter"}, {"dt", 0.01}, {"n_steps", 10}, {"renormalize", "none"}}},
           {"output", {{"directory", dir.string()}, {"record_interval", 5}, {"checkpoint_interval", 5}}}};
  cli::run_lindblad(cfg);
  auto rows = lines(dir / "trajectory.csv");
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].rfind("step,t,trace,n_0,n_1,P_N=0", 0), 0u);
  EXPECT_TRUE(fs::exists(dir / "checkpoint.json"));

  // resume from the checkpoint: time continues from t = 0.1
  json resume = cfg;
  auto dir2 = scratch("lindblad_resume");
  resume["output"]["directory"] = dir2.string();
  resume["initial"] = {{"checkpoint", (dir / "checkpoint.json").string()}};
  cli::run_lindblad(resume);
  auto rows2 = lines(dir2 / "trajectory.csv");
  EXPECT_EQ(rows2[1].rfind("0,0.10000000000000001,", 0), 0u) << rows2[1];
}

TEST(Cli, ConfigErrors) {
  json good{{"model", xyz_model(4, 0.0)}, {"gs", json::object()}, {"output", {{"directory", scratch("err").string()}}}};
  auto bad = good;
  bad["model"]["gama"] = 0.1;
  EXPECT_THROW(cli::run_gs(bad), ConfigError);
  bad = good;
  bad["quench"] = json::object();
  EXPECT_THROW(cli::run_gs(bad), ConfigError);
  bad = good;
  bad["model"]["model"] = "heisenberg";
  EXPECT_THROW(cli::run_gs(bad), ConfigError);
  bad = good;
  bad["gs"]["max_bond"] = 0;
  EXPECT_THROW(cli::run_gs(bad), ConfigError);
  bad = good;
  bad["initial"] = {{"checkpoint", "/nonexistent/state.json"}};
  EXPECT_THROW(cli::run_gs(bad), ConfigError);
  EXPECT_THROW(cli::load_config("/nonexistent/config.json"), ConfigError);
  EXPECT_THROW(cli::run_lindblad({{"model", xyz_model(2, 0.0)}, {"lindblad", json::object()}}), ConfigError);
}

TEST(Cli, ThreadsEnvironmentWins) {
  setenv("ADAPTMPS_THREADS", "1", 1);
  EXPECT_EQ(cli::configure_threads(4), 1);
  unsetenv("ADAPTMPS_THREADS");
}

}  // namespace
}  // namespace adaptmps
