#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "chainverifier/core_model.hpp"
#include "chainverifier/errors.hpp"
#include "chainverifier/models.hpp"

namespace cv = chainverifier;

namespace {

cv::Vector v1(double a) { return cv::Vector::Constant(1, a); }

cv::ControlSequence seq1(std::initializer_list<double> ws) {
  cv::ControlSequence s;
  for (double w : ws) s.push_back(v1(w));
  return s;
}

const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * M_PI);

}  // namespace

TEST(Step, RandomWalkAdds) {
  const auto rw = cv::make_random_walk(1);
  EXPECT_DOUBLE_EQ(cv::step(rw, v1(0.5), v1(1.0))[0], 1.5);
}

TEST(Step, XnesZeroNumerator) {
  const auto m = cv::make_xnes_chain(cv::xnes_params(1, 2, 1, cv::make_objective("sphere", 1)));
  EXPECT_EQ(cv::step(m, v1(0.0), v1(0.0))[0], 0.0);
}

TEST(Step, XnesDirectFormula) {
  const auto m = cv::make_xnes_chain(cv::xnes_params(1, 2, 1, cv::make_objective("sphere", 1)));
  EXPECT_NEAR(cv::step(m, v1(1.0), v1(0.0))[0], std::exp(0.5), 1e-14);
  EXPECT_NEAR(cv::step(m, v1(1.0), v1(1.0))[0], 2.0, 1e-14);
}

TEST(Step, DimensionMismatchIsInputError) {
  const auto rw = cv::make_random_walk(2);
  EXPECT_THROW(cv::step(rw, v1(0.0), cv::Vector::Zero(2)), cv::InputError);
  EXPECT_THROW(cv::step(rw, cv::Vector::Zero(2), v1(0.0)), cv::InputError);
}

TEST(Step, NonFiniteStateRejected) {
  const auto rw = cv::make_random_walk(1);
  EXPECT_THROW(cv::step(rw, v1(NAN), v1(0.0)), cv::InputError);
}

TEST(ExtendedTransition, Telescopes) {
  const auto rw = cv::make_random_walk(1);
  EXPECT_EQ(cv::extended_transition(rw, v1(3.0), seq1({0, 0, -3}))[0], 0.0);
  EXPECT_EQ(cv::extended_transition(rw, v1(0.0), seq1({1, 1, 1, 1}))[0], 4.0);
}

TEST(ExtendedTransition, SingleBlockIsStep) {
  const auto m = cv::make_xnes_chain(cv::xnes_params(2, 4, 2, cv::make_objective("sphere", 2)));
  const cv::Vector z = (cv::Vector(2) << 0.3, -1.2).finished();
  const cv::Vector w = (cv::Vector(4) << 0.1, 0.2, -0.9, 0.4).finished();
  cv::ControlSequence s;
  s.push_back(w);
  EXPECT_EQ(cv::extended_transition(m, z, s), cv::step(m, z, w));
}

TEST(ExtendedTransition, ZeroStepsIsIdentity) {
  const auto rw = cv::make_random_walk(1);
  EXPECT_EQ(cv::extended_transition(rw, v1(2.5))[0], 2.5);
}

TEST(ExtendedTransition, EmptySequenceRejected) {
  const auto rw = cv::make_random_walk(1);
  EXPECT_THROW(cv::extended_transition(rw, v1(0.0), cv::ControlSequence{}), cv::InputError);
}

TEST(ExtendedTransition, CompositionOverEverySplit) {
  const auto m = cv::make_xnes_chain(cv::xnes_params(2, 5, 2, cv::make_objective("sphere", 2)));
  cv::Rng rng(5);
  cv::Vector x = cv::Vector::Constant(2, 0.7);
  cv::ControlSequence ws;
  cv::Vector y = x;
  for (int i = 0; i < 6; ++i) {
    auto w = m.sample_control(y, rng);
    y = cv::step(m, y, w);
    ws.push_back(w);
  }
  const auto whole = cv::extended_transition(m, x, ws);
  for (int cut = 1; cut < 6; ++cut) {
    const auto mid = cv::extended_transition(m, x, ws.slice(0, cut));
    EXPECT_EQ(cv::extended_transition(m, mid, ws.slice(cut, 6 - cut)), whole);
  }
}

TEST(ExtendedDensity, RandomWalkValues) {
  const auto rw = cv::make_random_walk(1);
  EXPECT_NEAR(cv::extended_density(rw, v1(1.7), seq1({0})), kInvSqrt2Pi, 1e-15);
  EXPECT_NEAR(cv::extended_density(rw, v1(-4.0), seq1({0, 0})), 1.0 / (2.0 * M_PI), 1e-15);
}

TEST(ExtendedDensity, RandomWalkIndependentOfState) {
  const auto rw = cv::make_random_walk(1);
  const auto ws = seq1({0.3, -1.1, 2.0});
  const double ref = cv::extended_density(rw, v1(0.0), ws);
  for (double x : {-10.0, -1.0, 3.5, 100.0}) {
    EXPECT_DOUBLE_EQ(cv::extended_density(rw, v1(x), ws), ref);
  }
}

TEST(ExtendedDensity, SelectionWalkAtOrigin) {
  const auto sw = cv::make_selection_walk(cv::make_objective("sphere", 1));
  EXPECT_NEAR(cv::extended_density(sw, v1(0.0), seq1({0})), 2.0 * kInvSqrt2Pi, 1e-12);
}

TEST(ExtendedDensity, FactorizesAlongSplits) {
  const auto sw = cv::make_selection_walk(cv::make_objective("sphere", 1));
  const auto ws = seq1({0.4, -0.2, 1.3, 0.05});
  const cv::Vector x = v1(-0.8);
  const double whole = cv::extended_density(sw, x, ws);
  for (int cut = 1; cut < 4; ++cut) {
    const auto u = ws.slice(0, cut);
    const auto v = ws.slice(cut, 4 - cut);
    const double parts =
        cv::extended_density(sw, x, u) * cv::extended_density(sw, cv::extended_transition(sw, x, u), v);
    EXPECT_NEAR(whole, parts, 1e-13 * whole);
  }
}

TEST(ExtendedDensity, ZeroShortCircuits) {
  const auto pt = cv::make_period_two();
  EXPECT_EQ(cv::extended_density(pt, v1(1.0), seq1({0.2, 5.0, 0.1})), 0.0);
  EXPECT_EQ(cv::extended_log_density(pt, v1(1.0), seq1({5.0})), -INFINITY);
}

TEST(InControlSet, RandomWalkAlwaysTrue) {
  const auto rw = cv::make_random_walk(1);
  EXPECT_TRUE(cv::in_control_set(rw, v1(0.0), seq1({30.0, -30.0})));
}

TEST(InControlSet, XnesOrderIndicator) {
  const auto m = cv::make_xnes_chain(cv::xnes_params(1, 4, 2, cv::make_objective("sphere", 1)));
  const cv::Vector z = v1(0.0);
  cv::ControlSequence ordered;
  ordered.push_back((cv::Vector(2) << 0.1, 0.5).finished());
  cv::ControlSequence reversed;
  reversed.push_back((cv::Vector(2) << 0.5, 0.1).finished());
  EXPECT_TRUE(cv::in_control_set(m, z, ordered));
  EXPECT_FALSE(cv::in_control_set(m, z, reversed));
}

TEST(IsPath, RandomWalk) {
  const auto rw = cv::make_random_walk(1);
  EXPECT_TRUE(cv::is_path(rw, v1(3.0), seq1({0, 0, -3}), v1(0.0), 0.1));
  EXPECT_FALSE(cv::is_path(rw, v1(3.0), seq1({0, 0, 0}), v1(0.0), 0.1));
}

TEST(IsPath, BallIsOpen) {
  const auto rw = cv::make_random_walk(1);
  EXPECT_FALSE(cv::is_path(rw, v1(0.0), seq1({1.0}), v1(0.0), 1.0));
}

TEST(IsPath, RadiusMustBePositive) {
  const auto rw = cv::make_random_walk(1);
  EXPECT_THROW(cv::is_path(rw, v1(0.0), seq1({1.0}), v1(0.0), 0.0), cv::InputError);
}

TEST(IsPath, XnesLargeOrderedBlockReachesZero) {
  const auto m = cv::make_xnes_chain(cv::xnes_params(1, 2, 1, cv::make_objective("sphere", 1)));
  const cv::Vector y = v1(4.0);
  // One selected block of norm 40: numerator ~ 44, denominator e^{(1600-1)/2}.
  EXPECT_TRUE(cv::is_path(m, y, seq1({-40.0}), v1(0.0), 1e-6));
}

TEST(ControlSequence, FlattenRoundTrip) {
  const cv::Vector flat = (cv::Vector(6) << 1, 2, 3, 4, 5, 6).finished();
  const auto s = cv::ControlSequence::from_flat(flat, 2);
  EXPECT_EQ(s.length(), 3);
  EXPECT_EQ(s[1][0], 3.0);
  EXPECT_EQ(s.flatten(), flat);
  EXPECT_THROW(cv::ControlSequence::from_flat(flat, 4), cv::InputError);
}

TEST(ControlSequence, MixedDimensionsRejected) {
  EXPECT_THROW(cv::ControlSequence({cv::Vector::Zero(1), cv::Vector::Zero(2)}), cv::InputError);
}

TEST(Sampler, LandsInSupport) {
  const auto m = cv::make_xnes_chain(cv::xnes_params(2, 6, 3, cv::make_objective("sphere", 2)));
  cv::Rng rng(17);
  const cv::Vector z = (cv::Vector(2) << 1.0, -2.0).finished();
  int inside = 0;
  for (int i = 0; i < 2000; ++i) {
    cv::ControlSequence s;
    s.push_back(m.sample_control(z, rng));
    inside += cv::in_control_set(m, z, s);
  }
  EXPECT_EQ(inside, 2000);
}
