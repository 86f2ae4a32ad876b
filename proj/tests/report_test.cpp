#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bellsim/ball_protocol.hpp"
#include "bellsim/report.hpp"

namespace bellsim::cli {
namespace {

using nlohmann::json;

RunContext quiet() {
  RunContext ctx;
  ctx.timestamp = false;
  return ctx;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

TEST(ParseAngleTest, Units) {
  EXPECT_NEAR(parse_angle("60deg"), kPi / 3, 1e-15);
  EXPECT_DOUBLE_EQ(parse_angle("1.5rad"), 1.5);
  EXPECT_NEAR(parse_angle("-90 deg"), -kPi / 2, 1e-15);
  EXPECT_DOUBLE_EQ(parse_angle("1e-3rad"), 1e-3);
  EXPECT_THROW(parse_angle("60"), UsageError);
  EXPECT_THROW(parse_angle("sixty deg"), UsageError);
  EXPECT_THROW(parse_angle("60grad"), UsageError);
}

TEST(ParseSweepTest, InclusiveStop) {
  const Sweep s = parse_sweep("0:180:5deg");
  ASSERT_EQ(s.radians.size(), 37u);
  EXPECT_EQ(s.unit, "deg");
  EXPECT_DOUBLE_EQ(s.display.back(), 180.0);
  EXPECT_NEAR(s.radians.back(), kPi, 1e-15);
  EXPECT_EQ(parse_sweep("0:1:0.25rad").radians.size(), 5u);
  EXPECT_THROW(parse_sweep("0:180:0deg"), UsageError);
  EXPECT_THROW(parse_sweep("10:0:1deg"), UsageError);
  EXPECT_THROW(parse_sweep("0:180deg"), UsageError);
}

TEST(SettingsTest, RoundTripThroughJson) {
  BallProtocolSettings s;
  s.stage = 2;
  s.bob_filter = "c";
  s.p_stage23 = 0.07;
  s.trials = 1234;
  BallProtocolSettings back;
  apply_settings(settings_json(s), back);
  EXPECT_EQ(settings_json(back), settings_json(s));

  ChshSettings c;
  c.a_prime = "1.2rad";
  c.mode = "analytic";
  ChshSettings c2;
  apply_settings(settings_json(c), c2);
  EXPECT_EQ(settings_json(c2), settings_json(c));
}

TEST(SettingsTest, PartialConfigLayersOverDefaults) {
  McRunSettings s;
  apply_settings(json{{"trials", 77}}, s);
  EXPECT_EQ(s.trials, 77u);
  EXPECT_EQ(s.phi, "60deg");
  EXPECT_THROW(apply_settings(json{{"trials", "many"}}, s), UsageError);
  EXPECT_THROW(apply_settings(json::array(), s), UsageError);
}

TEST(ConfigForTest, AcceptsReportManifest) {
  McRunSettings s;
  s.trials = 500;
  s.phi = "30deg";
  const RunResult r = run_mc(s, quiet());
  const json cfg = config_for(r.report, "mc-run");
  McRunSettings back;
  apply_settings(cfg, back);
  EXPECT_EQ(back.trials, 500u);
  EXPECT_EQ(back.phi, "30deg");
  EXPECT_THROW(config_for(r.report, "chsh"), UsageError);
  EXPECT_EQ(config_for(json{{"trials", 3}}, "chsh"), (json{{"trials", 3}}));
}

TEST(SpinCorrelationRunTest, SweepAndData) {
  const auto data = std::filesystem::temp_directory_path() / "bellsim_report_test_data.txt";
  SpinCorrelationSettings s;
  s.sweep = "0:180:5deg";
  s.data = data.string();
  const RunResult r = run_spin_correlation(s, quiet());
  EXPECT_TRUE(r.passed);
  ASSERT_EQ(r.report["rows"].size(), 37u);
  EXPECT_NEAR(r.report["rows"][12]["quantum_correlation"].get<double>(), -0.5, 1e-12);
  const std::string text = slurp(data);
  EXPECT_EQ(text.rfind("# phi_deg C_QM\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 38);
  std::filesystem::remove(data);
  EXPECT_THROW(run_spin_correlation(SpinCorrelationSettings{}, quiet()), UsageError);
}

TEST(SpinCorrelationRunTest, TextHeaderListsEachColumnOnce) {
  SpinCorrelationSettings s;
  s.phi = {"0.5rad", "1rad"};
  const std::string text = run_spin_correlation(s, quiet()).text;
  const auto first = text.find("phi[rad]");
  ASSERT_NE(first, std::string::npos);
  EXPECT_EQ(text.find("phi[rad]", first + 1), std::string::npos);
}

TEST(McRunTest, ReportShapeAndDeterminism) {
  McRunSettings s;
  s.trials = 20000;
  s.description = "both";
  RunContext ctx = quiet();
  const RunResult one = run_mc(s, ctx);
  ctx.workers = 8;
  const RunResult eight = run_mc(s, ctx);
  EXPECT_EQ(one.report.dump(), eight.report.dump());
  EXPECT_TRUE(one.passed);
  EXPECT_FALSE(one.report["manifest"].contains("timestamp"));
  EXPECT_EQ(one.report["manifest"]["seed"], kDefaultSeed);
  EXPECT_TRUE(one.report.contains("description_equivalence"));
  EXPECT_TRUE(run_mc(s, RunContext{}).report["manifest"].contains("timestamp"));

  s.trials = 0;
  EXPECT_THROW(run_mc(s, quiet()), UsageError);
  s.trials = 10;
  s.description = "carol";
  EXPECT_THROW(run_mc(s, quiet()), UsageError);
}

TEST(McRunTest, RecordsFile) {
  const auto path = std::filesystem::temp_directory_path() / "bellsim_report_test_mc.csv";
  McRunSettings s;
  s.trials = 100;
  s.phi = "0deg";
  s.records = path.string();
  run_mc(s, quiet());
  std::ifstream f(path);
  std::string line;
  std::getline(f, line);
  EXPECT_EQ(line, "trial,lambda_sign,outcome1,outcome2");
  int rows = 0;
  while (std::getline(f, line)) {
    int t, l, o1, o2;
    ASSERT_EQ(std::sscanf(line.c_str(), "%d,%d,%d,%d", &t, &l, &o1, &o2), 4);
    EXPECT_EQ(t, rows);
    EXPECT_EQ(o1, -o2);
    ++rows;
  }
  EXPECT_EQ(rows, 100);
  std::filesystem::remove(path);
}

TEST(BallProtocolRunTest, AllStagesAnalytic) {
  BallProtocolSettings s;
  s.all_stages = true;
  s.analytic = true;
  const RunResult r = run_ball_protocol(s, quiet());
  EXPECT_TRUE(r.passed);
  EXPECT_NEAR(r.report["inequality"]["analytic"]["lhs"].get<double>(), 0.075, 1e-15);
  EXPECT_NEAR(r.report["inequality"]["analytic"]["rhs"].get<double>(), 0.04, 1e-15);
  EXPECT_TRUE(r.report["inequality"]["analytic"]["violated"].get<bool>());
  EXPECT_NE(r.text.find("VIOLATED"), std::string::npos);
}

TEST(BallProtocolRunTest, EmptyAndInvalidFilters) {
  BallProtocolSettings s;
  s.alice_filter = "c";
  s.bob_filter = "c";
  s.trials = 1000;
  EXPECT_THROW(run_ball_protocol(s, quiet()), balls::EmptyReportError);
  s.alice_filter = "b";
  EXPECT_THROW(run_ball_protocol(s, quiet()), UsageError);
  s = BallProtocolSettings{};
  s.mismatch = 2.0;
  EXPECT_THROW(run_ball_protocol(s, quiet()), UsageError);
}

TEST(CommonCauseRunTest, BuiltinsAndModelFile) {
  CommonCauseSettings s;
  s.builtin = "ball";
  RunResult r = run_common_cause(s, quiet());
  EXPECT_TRUE(r.passed);
  EXPECT_TRUE(r.report["report"]["certified"].get<bool>());
  s.builtin = "spin";
  s.phi = "60deg";
  EXPECT_TRUE(run_common_cause(s, quiet()).passed);

  const auto path = std::filesystem::temp_directory_path() / "bellsim_report_test_model.json";
  {
    std::ofstream f(path);
    f << R"({"p_z": 0.5, "joint_given_z": [[0.25, 0.25], [0.25, 0.25]],
             "joint_given_not_z": [[0.3, 0.3], [0.3, 0.3]]})";
  }
  CommonCauseSettings file;
  file.model_file = path.string();
  try {
    run_common_cause(file, quiet());
    FAIL() << "expected UsageError";
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("joint_given_not_z"), std::string::npos);
  }
  std::filesystem::remove(path);
  EXPECT_THROW(run_common_cause(CommonCauseSettings{}, quiet()), UsageError);
}

TEST(ChshRunTest, DerivedDemonstrationLabel) {
  ChshSettings s;
  s.trials = 50000;
  const RunResult r = run_chsh(s, quiet());
  EXPECT_TRUE(r.passed);
  EXPECT_TRUE(r.report["derived_demonstration"].get<bool>());
  EXPECT_NEAR(std::fabs(r.report["analytic"]["value"].get<double>()), 2 * std::sqrt(2.0), 1e-12);
  s.mode = "sideways";
  EXPECT_THROW(run_chsh(s, quiet()), UsageError);
}

}  // namespace
}  // namespace bellsim::cli
