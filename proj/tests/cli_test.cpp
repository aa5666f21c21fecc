#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "chainverifier/commands.hpp"
#include "chainverifier/config.hpp"
#include "chainverifier/errors.hpp"
#include "chainverifier/report.hpp"

namespace cv = chainverifier;

namespace {

cv::RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return cv::parse_config(in);
}

std::string field_of(const std::string& text) {
  try {
    parse(text);
  } catch (const cv::ConfigError& e) {
    return e.field();
  }
  return "";
}

std::string strip_wall_clock(const std::string& json) {
  std::istringstream in(json);
  std::string line, out;
  while (std::getline(in, line)) {
    if (line.find("\"wall_clock_seconds\"") == std::string::npos) out += line + "\n";
  }
  return out;
}

struct Run {
  int exit_code = -1;
  std::string out;
};

Run run_cli(const std::string& args) {
  const std::string cmd = std::string(CHAINVERIFIER_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string config(const std::string& name) { return std::string(CHAINVERIFIER_CONFIG_DIR) + "/" + name; }

const char* kToy = R"(
[run]
seed = 4
[model]
kind = toy
[toy]
kind = control-ignoring
[analysis]
origin_count = 6
return_k_max = 2
[search]
restarts = 2
iterations = 5
)";

}  // namespace

TEST(Config, MinimalDefaults) {
  const auto c = parse("[run]\nseed = 12\n");
  EXPECT_EQ(c.seed, 12u);
  EXPECT_EQ(c.model.kind, "random-walk");
  EXPECT_EQ(c.analysis.span, 8);
  EXPECT_EQ(c.analysis.origin_count, 32);
  EXPECT_DOUBLE_EQ(cv::resolved_epsilon_return(c), c.analysis.epsilon / 10.0);
}

TEST(Config, SeedIsMandatory) { EXPECT_EQ(field_of("[model]\nkind = random-walk\n"), "run.seed"); }

TEST(Config, UnknownKeyAndSectionRejected) {
  EXPECT_EQ(field_of("[run]\nseed = 1\n[model]\nflavour = x\n"), "model.flavour");
  EXPECT_EQ(field_of("[run]\nseed = 1\n[extras]\na = 1\n"), "extras");
  EXPECT_EQ(field_of("[run]\nseed = 1\n[path.0]\ny = 0\ncenter = 0\nbogus = 1\n"), "path.0.bogus");
}

TEST(Config, BadValuesNameTheField) {
  EXPECT_EQ(field_of("[run]\nseed = -3\n"), "run.seed");
  EXPECT_EQ(field_of("[run]\nseed = 1\n[analysis]\nepsilon = tiny\n"), "analysis.epsilon");
  EXPECT_EQ(field_of("[run]\nseed = 1\n[analysis]\nepsilon = -1\n"), "analysis.epsilon");
  EXPECT_EQ(field_of("[run]\nseed = 1\n[model]\nkind = external\n"), "model.kind");
  EXPECT_EQ(field_of("[run]\nseed = 1\n[model]\nkind = xnes\nobjective = nope\n"), "model.objective");
  EXPECT_EQ(field_of("[run]\nseed = 1\n[model]\nkind = xnes\n[xnes]\nlambda = 3\nmu = 4\n"), "xnes.mu");
  EXPECT_EQ(field_of("[run]\nseed = 1\n[model]\nn = 2\n[analysis]\nx_star = 1, 2, 3\n"), "analysis.x_star");
  EXPECT_EQ(field_of("[run]\nseed = 1\n[search]\nuse_hints = maybe\n"), "search.use_hints");
}

TEST(Config, VectorsAndPaths) {
  const auto c = parse(
      "[run]\nseed = 1\n[model]\nn = 2\n[analysis]\nx_star = 1, -2\nextra_origins = 0 0; 3,4\n"
      "[path.0]\ny = 1 1\ncenter = 0 0\nradius = 0.5\nk = 3\n[path.1]\ny = 2 2\ncenter = 1 1\n");
  EXPECT_EQ(*c.analysis.x_star, (cv::Vector(2) << 1, -2).finished());
  ASSERT_EQ(c.analysis.extra_origins.size(), 2u);
  EXPECT_EQ(c.analysis.extra_origins[1], (cv::Vector(2) << 3, 4).finished());
  ASSERT_EQ(c.paths.size(), 2u);
  EXPECT_EQ(c.paths[0].k, 3);
  EXPECT_DOUBLE_EQ(c.paths[0].radius, 0.5);
  EXPECT_EQ(c.paths[1].k, 1);
}

TEST(Config, ShippedConfigsParse) {
  for (const char* name : {"random_walk.ini", "xnes_sphere.ini", "toy_control_ignoring.ini", "selection_walk.ini",
                           "xnes_density.ini", "rate_sphere.ini", "rate_null.ini", "paths.ini"}) {
    EXPECT_NO_THROW(cv::load_config(config(name))) << name;
  }
}

TEST(Report, RoundTripIsLossless) {
  auto cfg = cv::load_config(config("random_walk.ini"));
  cfg.analysis.origin_count = 5;
  auto res = cv::cmd_analyze(cfg);
  res.report.wall_clock_seconds = 0.125;
  const std::string a = cv::dump_report(res.report);
  const auto back = cv::parse_report(a);
  EXPECT_EQ(cv::dump_report(back), a);
  ASSERT_TRUE(back.verdict.has_value());
  EXPECT_EQ(back.verdict->conclusion, res.report.verdict->conclusion);
  ASSERT_TRUE(back.verdict->globally.has_value());
  const auto& p0 = back.verdict->globally->paths.front();
  const auto& q0 = res.report.verdict->globally->paths.front();
  EXPECT_EQ(p0.sequence.flatten(), q0.sequence.flatten());
  EXPECT_EQ(p0.log_density, q0.log_density);
}

TEST(Report, NonFiniteRealsSurvive) {
  cv::VerdictReport r;
  r.config = parse("[run]\nseed = 1\n");
  cv::RateVerdict rate;
  rate.estimate.route_a = -INFINITY;
  rate.estimate.route_b = NAN;
  r.rate = rate;
  const auto back = cv::parse_report(cv::dump_report(r));
  EXPECT_EQ(back.rate->estimate.route_a, -INFINITY);
  EXPECT_TRUE(std::isnan(back.rate->estimate.route_b));
}

TEST(Commands, AnalyzeExitCodes) {
  auto rw = cv::load_config(config("random_walk.ini"));
  rw.analysis.origin_count = 8;
  const auto a = cv::cmd_analyze(rw);
  EXPECT_EQ(a.exit_code, 0);
  EXPECT_EQ(a.report.verdict->conclusion, cv::Conclusion::kAperiodicPhiIrreducibleTChain);
  const auto t = cv::cmd_analyze(parse(kToy));
  EXPECT_EQ(t.exit_code, 2);
  EXPECT_EQ(t.report.verdict->conclusion, cv::Conclusion::kInconclusive);
}

TEST(Commands, RateRefusesNonScalingInvariantObjective) {
  const auto c = parse("[run]\nseed = 1\n[model]\nkind = xnes\nn = 2\nobjective = bumpy\n[rate]\niterations = 100\n");
  EXPECT_THROW(cv::cmd_rate(c), cv::InputError);
}

TEST(Commands, PathsReportEachQuery) {
  const auto r = cv::cmd_paths(cv::load_config(config("paths.ini")));
  EXPECT_EQ(r.exit_code, 0);
  ASSERT_EQ(r.report.paths.size(), 3u);
  for (const auto& p : r.report.paths) EXPECT_TRUE(p.certificate.has_value());
}

TEST(Commands, DensityPassFlags) {
  auto c = cv::load_config(config("xnes_density.ini"));
  const auto r = cv::cmd_check_density(c);
  EXPECT_EQ(r.exit_code, 0);
  c.density.threshold = 1e-6;
  EXPECT_EQ(cv::cmd_check_density(c).exit_code, 2);
}

TEST(Cli, AnalyzeConclusiveAndInconclusive) {
  const auto ok = run_cli("analyze --quiet --config " + config("random_walk.ini"));
  EXPECT_EQ(ok.exit_code, 0);
  EXPECT_NE(ok.out.find("aperiodic-phi-irreducible-T-chain"), std::string::npos);
  const auto toy = run_cli("analyze --quiet --config " + config("toy_control_ignoring.ini"));
  EXPECT_EQ(toy.exit_code, 2);
}

TEST(Cli, ConfigErrorExitsOne) {
  const std::string path = ::testing::TempDir() + "bad_config.ini";
  std::ofstream(path) << "[run]\nseed = 1\n[analysis]\nepsilon = zero\n";
  EXPECT_EQ(run_cli("analyze --config " + path).exit_code, 1);
  EXPECT_EQ(run_cli("analyze --config /nonexistent.ini").exit_code, 1);
}

TEST(Cli, ReportsAreReproducible) {
  const auto a = run_cli("analyze --quiet --config " + config("xnes_sphere.ini"));
  const auto b = run_cli("analyze --quiet --config " + config("xnes_sphere.ini"));
  EXPECT_EQ(strip_wall_clock(a.out), strip_wall_clock(b.out));
  const auto c = run_cli("analyze --quiet --seed-override 8 --config " + config("xnes_sphere.ini"));
  EXPECT_NE(strip_wall_clock(a.out), strip_wall_clock(c.out));
}

TEST(Cli, OutDirectoryGetsFiles) {
  const std::string dir = ::testing::TempDir() + "cv_out";
  const auto r = run_cli("check-density --quiet --out " + dir + " --config " + config("xnes_density.ini"));
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_TRUE(std::ifstream(dir + "/report.json").good());
  EXPECT_TRUE(std::ifstream(dir + "/histogram_0.csv").good());
}
