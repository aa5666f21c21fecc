#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "chainverifier/errors.hpp"
#include "chainverifier/models.hpp"
#include "chainverifier/simulate.hpp"

namespace cv = chainverifier;

namespace {

cv::Vector v1(double a) { return cv::Vector::Constant(1, a); }

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

TEST(RunChain, ReplayIsBitIdentical) {
  const auto rw = cv::make_random_walk(1);
  const auto a = cv::run_chain(rw, v1(0.0), 10, 99);
  const auto b = cv::run_chain(rw, v1(0.0), 10, 99);
  ASSERT_EQ(a.states.size(), 11u);
  for (std::size_t i = 0; i < a.states.size(); ++i) EXPECT_EQ(a.states[i], b.states[i]);
  for (std::size_t i = 0; i < a.controls.size(); ++i) EXPECT_EQ(a.controls[i], b.controls[i]);
  EXPECT_EQ(a.seed, 99u);
}

TEST(RunChain, RecordedStepsReplay) {
  const auto m = cv::make_xnes_chain(cv::xnes_params(2, 6, 3, cv::make_objective("sphere", 2)));
  const auto t = cv::run_chain(m, cv::Vector::Constant(2, 3.0), 200, 5);
  for (std::size_t i = 0; i + 1 < t.states.size(); ++i) {
    EXPECT_EQ(cv::step(m, t.states[i], t.controls[i]), t.states[i + 1]);
  }
}

TEST(RunChain, XnesStaysFinite) {
  const auto m = cv::make_xnes_chain(cv::xnes_params(3, 6, 3, cv::make_objective("sphere", 3)));
  const auto t = cv::run_chain(m, 10.0 * cv::Vector::Unit(3, 0), 2000, 1);
  for (const auto& s : t.states) ASSERT_TRUE(s.allFinite());
}

TEST(RunChain, SingleStep) {
  EXPECT_EQ(cv::run_chain(cv::make_random_walk(1), v1(0.0), 1, 1).states.size(), 2u);
  EXPECT_THROW(cv::run_chain(cv::make_random_walk(1), v1(0.0), 0, 1), cv::InputError);
}

TEST(RunChain, NonFiniteStateNamesIndex) {
  cv::ModelSpec m = cv::make_random_walk(1);
  m.step = [](const cv::Vector& x, const cv::Vector&) -> cv::Vector { return x * 1e200; };
  try {
    cv::run_chain(m, v1(1.0), 10, 1);
    FAIL() << "expected NumericError";
  } catch (const cv::NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("index 2"), std::string::npos) << e.what();
  }
}

TEST(RunChain, CsvHasOneRowPerState) {
  const auto t = cv::run_chain(cv::make_random_walk(2), cv::Vector::Zero(2), 5, 1);
  std::ostringstream out;
  cv::write_trajectory_csv(out, t);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "index,x0,x1,w0,w1");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 6);
}

TEST(DensityCheck, BinMassesMatchNormalCdf) {
  const auto r = cv::empirical_density_check(cv::make_random_walk(1), v1(0.0), 10000, 16, -4, 4, 1);
  for (const auto& b : r.coordinates[0].bins) {
    EXPECT_NEAR(b.analytic, std_normal_cdf(b.hi) - std_normal_cdf(b.lo), 1e-5);
  }
}

TEST(DensityCheck, RandomWalk) {
  const auto r = cv::empirical_density_check(cv::make_random_walk(1), v1(0.0), 200000, 80, -4, 4, 2);
  EXPECT_LE(r.max_l1(), 0.02);
}

TEST(DensityCheck, SelectionWalk) {
  const auto m = cv::make_selection_walk(cv::make_objective("sphere", 1));
  for (double x : {0.0, 1.3}) {
    const auto r = cv::empirical_density_check(m, v1(x), 200000, 80, -4, 4, 3);
    EXPECT_LE(r.max_l1(), 0.03) << x;
  }
}

TEST(DensityCheck, XnesOneDimension) {
  const auto m = cv::make_xnes_chain(cv::xnes_params(1, 2, 1, cv::make_objective("sphere", 1)));
  const auto r = cv::empirical_density_check(m, v1(1.0), 100000, 80, -4, 4, 4);
  EXPECT_LE(r.max_l1(), 0.05);
}

TEST(DensityCheck, XnesMarginals) {
  const auto m = cv::make_xnes_chain(cv::xnes_params(2, 4, 2, cv::make_objective("sphere", 2)));
  const auto r = cv::empirical_density_check(m, (cv::Vector(2) << 0.5, -1.0).finished(), 100000, 40, -4, 4, 5);
  ASSERT_EQ(r.coordinates.size(), 4u);
  for (const auto& c : r.coordinates) {
    EXPECT_TRUE(c.marginal);
    EXPECT_LE(c.l1, 0.05) << c.coordinate;
  }
}

TEST(DensityCheck, EmptyBinsCounted) {
  const auto r = cv::empirical_density_check(cv::make_random_walk(1), v1(0.0), 10000, 20, -40, 40, 6);
  EXPECT_GT(r.coordinates[0].empty_bins, 0);
}

TEST(DensityCheck, TooFewSamples) {
  EXPECT_THROW(cv::empirical_density_check(cv::make_random_walk(1), v1(0.0), 999, 10, -4, 4, 1), cv::InputError);
}

TEST(BatchMeans, ConstantSeries) {
  const auto bm = cv::batch_means(std::vector<double>(100, 2.5), 20);
  EXPECT_DOUBLE_EQ(bm.mean, 2.5);
  EXPECT_DOUBLE_EQ(bm.se, 0.0);
}

TEST(BatchMeans, TwoBatches) {
  // batches {0,0} and {2,2}: means 0 and 2, sd sqrt(2), se 1.
  const auto bm = cv::batch_means({0, 0, 2, 2}, 2);
  EXPECT_DOUBLE_EQ(bm.mean, 1.0);
  EXPECT_DOUBLE_EQ(bm.se, 1.0);
}

TEST(Rate, SphereConvergesAndRoutesAgree) {
  const auto p = cv::xnes_params(5, 10, 5, cv::make_objective("sphere", 5));
  const auto r = cv::xnes_convergence_rate(p, cv::Vector::Unit(5, 0), 1.0, 20000, 4000, 17);
  EXPECT_LT(r.route_a, 0.0);
  EXPECT_TRUE(r.routes_agree(4.0)) << r.route_a << " " << r.route_b << " " << r.combined_se();
  EXPECT_NEAR(r.log_norm_rate, r.route_a, 0.02);
}

TEST(Rate, NoSelectionPressureIsZero) {
  const auto p = cv::xnes_params(5, 5, 5, cv::make_objective("sphere", 5));
  const auto r = cv::xnes_convergence_rate(p, cv::Vector::Unit(5, 0), 1.0, 20000, 4000, 18);
  EXPECT_LE(std::abs(r.route_b), 4.0 * r.se_b);
  EXPECT_LE(std::abs(r.route_a), 4.0 * r.se_a);
}

TEST(Rate, DivergenceStaysRepresentable) {
  const auto p = cv::xnes_params(2, 8, 2, cv::make_objective("linear", 2));
  const auto r = cv::xnes_convergence_rate(p, cv::Vector::Unit(2, 0), 1.0, 20000, 4000, 19);
  EXPECT_GT(r.route_a, 0.0);
  EXPECT_TRUE(std::isfinite(r.route_a));
  EXPECT_TRUE(r.routes_agree(4.0));
}

TEST(Rate, RefusesObjectiveWithoutScalingFlag) {
  const auto p = cv::xnes_params(2, 4, 2, cv::make_objective("bumpy", 2));
  EXPECT_THROW(cv::xnes_convergence_rate(p, cv::Vector::Unit(2, 0), 1.0, 100, 10, 1), cv::InputError);
}

TEST(Rate, BurnInMustPrecedeEnd) {
  const auto p = cv::xnes_params(2, 4, 2, cv::make_objective("sphere", 2));
  EXPECT_THROW(cv::xnes_convergence_rate(p, cv::Vector::Unit(2, 0), 1.0, 100, 100, 1), cv::InputError);
}

TEST(ReturnPeriodsTest, RandomWalkGcdOne) {
  const auto r = cv::empirical_return_periods(cv::make_random_walk(1), v1(0.0), 0.5, 5000, 1);
  EXPECT_FALSE(r.gaps.empty());
  EXPECT_EQ(r.gcd, 1);
}

TEST(ReturnPeriodsTest, FlipAlternates) {
  const auto r = cv::empirical_return_periods(cv::make_flip(), v1(2.0), 1e-6, 50, 1);
  EXPECT_EQ(r.gcd, 2);
  for (int g : r.gaps) EXPECT_EQ(g % 2, 0);
  EXPECT_EQ(r.visit_times.size(), 26u);
}

TEST(ReturnPeriodsTest, NoReturnWarns) {
  const auto r = cv::empirical_return_periods(cv::make_drift(), v1(0.0), 0.5, 20, 1);
  EXPECT_TRUE(r.gaps.empty());
  EXPECT_FALSE(r.warnings.empty());
}
