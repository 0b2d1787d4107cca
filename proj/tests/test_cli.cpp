#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ld_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args) {
    const std::string cmd = std::string(LD_BINARY) + " " + args + " > " + (dir_ / "stdout.txt").string() + " 2> " +
                            (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string read(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  std::string out() { return read(dir_ / "stdout.txt"); }
  std::string err() { return read(dir_ / "stderr.txt"); }
  std::string path(const std::string& name) { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, ListsCatalog) {
  ASSERT_EQ(run("list"), 0);
  const auto text = out();
  EXPECT_NE(text.find("rotation2d"), std::string::npos);
  EXPECT_NE(text.find("exact M available"), std::string::npos);
  EXPECT_NE(text.find("shear_piecewise (a=1, k=1)"), std::string::npos);
  ASSERT_EQ(run("list --json"), 0);
  const auto j = nlohmann::json::parse(out());
  ASSERT_TRUE(j.is_array());
  EXPECT_GE(j.size(), 10u);
  EXPECT_EQ(j[0].at("name"), "linear3d");
}

TEST_F(Cli, MinimalSweep) {
  ASSERT_EQ(run("sweep --system rotation2d --tau 2 --res 2x2 --out " + path("o")), 0) << err();
  const auto csv = read(dir_ / "o" / "rotation2d_M_field.csv");
  std::istringstream lines(csv);
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(lines, line)) rows.push_back(line);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0].rfind("# {", 0), 0u);
  EXPECT_EQ(rows[1], "x,y,value");
  EXPECT_EQ(rows[2].rfind("-1,-1,", 0), 0u);
  EXPECT_EQ(csv.find('\r'), std::string::npos);
  const auto j = nlohmann::json::parse(read(dir_ / "o" / "rotation2d_M_field.json"));
  EXPECT_EQ(j.at("values").size(), 4u);
  EXPECT_EQ(j.at("run_config").at("descriptor").at("tau"), 2.0);
  EXPECT_TRUE(fs::exists(dir_ / "o" / "rotation2d_M_contours.json"));
}

TEST_F(Cli, SvgOutput) {
  ASSERT_EQ(run("sweep --system saddle2d --tau 3 --res 21x21 --levels 0.5,1,2 --format svg --out " + path("s")), 0)
      << err();
  const auto svg = read(dir_ / "s" / "saddle2d_M_contours.svg");
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("<path"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir_ / "s" / "saddle2d_M_field.csv"));
}

TEST_F(Cli, WorkerCountDoesNotChangeOutput) {
  const std::string base = "sweep --system shear_tanh --tau 8 --region x:-0.1:0.1,y:-0.5:0.5 --res 31x31 ";
  ASSERT_EQ(run(base + "--workers 1 --out " + path("w1")), 0) << err();
  ASSERT_EQ(run(base + "--workers 4 --out " + path("w4")), 0) << err();
  for (const char* f : {"shear_tanh_M_field.csv", "shear_tanh_M_field.json", "shear_tanh_M_contours.json"})
    EXPECT_EQ(read(dir_ / "w1" / f), read(dir_ / "w4" / f)) << f;
  ASSERT_EQ(std::system(("LD_WORKERS=3 " + std::string(LD_BINARY) + " " + base + "--out " + path("w3") +
                         " > /dev/null")
                            .c_str()),
            0);
  EXPECT_EQ(read(dir_ / "w1" / "shear_tanh_M_field.csv"), read(dir_ / "w3" / "shear_tanh_M_field.csv"));
}

TEST_F(Cli, Scan) {
  ASSERT_EQ(run("scan --system basin2d --descriptor Lf --tau 2 --line x=1.1,y:-2:2 --samples 401 --out " + path("b")),
            0)
      << err();
  const auto j = nlohmann::json::parse(read(dir_ / "b" / "basin2d_Lf_scan.json"));
  EXPECT_NEAR(j.at("argmin").get<double>(), 1.0, 0.1);
  EXPECT_EQ(j.at("params").size(), 401u);
  ASSERT_EQ(run("scan --system duffing_damped --descriptor Lf --tau 20 --line q=1.1,qd:-10:10 --samples 201 --out " +
                path("d")),
            0)
      << err();
  const auto d = nlohmann::json::parse(read(dir_ / "d" / "duffing_damped_Lf_scan.json"));
  EXPECT_LT(std::abs(d.at("argmin").get<double>()), 0.1);
  ASSERT_EQ(run("scan --system perturbed_map --descriptor MDp --N 5 --line x=3,y:-0.01:0.01 --samples 21 --out " +
                path("m")),
            0)
      << err();
}

TEST_F(Cli, CustomSystemConfig) {
  ASSERT_EQ(run("sweep --config " + std::string(LD_DATA_DIR) + "/pendulum.json --tau 2 --res 11x11 --out " +
                path("p")),
            0)
      << err();
  EXPECT_TRUE(fs::exists(dir_ / "p" / "pendulum_M_field.csv"));
}

TEST_F(Cli, MapSweep) {
  ASSERT_EQ(run("sweep --system linear_map --descriptor MDp --N 3 --p 0.5 --res 5x5 --out " + path("m")), 0) << err();
  EXPECT_TRUE(fs::exists(dir_ / "m" / "linear_map_MDp_field.csv"));
}

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("sweep --bogus"), 2);
  EXPECT_EQ(run("sweep --system no_such_system"), 2);
  EXPECT_EQ(run("sweep --system saddle2d --descriptor X"), 2);
  EXPECT_EQ(run("sweep --system saddle2d --region x:-1:1"), 2);
  EXPECT_EQ(run("sweep --system saddle2d --region x:1:-1,y:0:1 --res 3x3 --out " + path("r")), 2);
  EXPECT_EQ(run("sweep --system saddle2d --res 3 --out " + path("r")), 2);
  EXPECT_EQ(run("sweep --system saddle2d --descriptor MDp --res 3x3 --out " + path("r")), 2);
  EXPECT_EQ(run("sweep --system linear_map --res 3x3 --out " + path("r")), 2);
  EXPECT_EQ(run("sweep --system saddle2d --format pdf --res 3x3 --out " + path("r")), 2);
  EXPECT_EQ(run("sweep --config /nonexistent.json"), 2);
  EXPECT_EQ(run("scan --system basin2d --line x=1.1"), 2);
  EXPECT_EQ(run("scan --system basin2d --line q=1.1,y:-1:1"), 2);
  EXPECT_EQ(run("verify --claim no_such"), 2);
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("--help"), 0);
}

TEST_F(Cli, NumericalFailureExitsThree) {
  EXPECT_EQ(run("sweep --system saddle2d --tau 800 --res 3x3 --out " + path("n")), 3);
  EXPECT_NE(err().find("SweepAborted"), std::string::npos);
}

TEST_F(Cli, VerifySingleClaim) {
  ASSERT_EQ(run("verify --claim rotation_identity --claim mdp_separable --out " + path("v")), 0) << out();
  const auto j = nlohmann::json::parse(read(dir_ / "v" / "verify_report.json"));
  ASSERT_EQ(j.size(), 2u);
  EXPECT_EQ(j[0].at("claim"), "rotation_identity");
  EXPECT_TRUE(j[0].at("pass").get<bool>());
  for (const char* key : {"claim", "description", "measured", "tolerance", "pass", "seconds"})
    EXPECT_TRUE(j[1].contains(key)) << key;
  EXPECT_NE(out().find("PASS"), std::string::npos);
  ASSERT_EQ(run("verify --list"), 0);
  EXPECT_NE(out().find("discrete_false_positive"), std::string::npos);
}
