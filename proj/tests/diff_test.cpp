#include <gtest/gtest.h>

#include <cmath>

#include "chainverifier/core_model.hpp"
#include "chainverifier/diff.hpp"
#include "chainverifier/errors.hpp"
#include "chainverifier/models.hpp"

namespace cv = chainverifier;

namespace {

cv::Vector v1(double a) { return cv::Vector::Constant(1, a); }

// Central differences of ws -> S_x^k(ws), written out independently of the
// library's Jacobian code.
cv::Matrix fd_sequence_jacobian(const cv::ModelSpec& m, const cv::Vector& x, const cv::ControlSequence& ws) {
  const cv::Vector flat = ws.flatten();
  cv::Matrix J(m.n, flat.size());
  for (Eigen::Index c = 0; c < flat.size(); ++c) {
    const double h = std::max(1e-6, 1e-6 * std::abs(flat[c]));
    cv::Vector up = flat, dn = flat;
    up[c] += h;
    dn[c] -= h;
    const auto fu = cv::extended_transition(m, x, cv::ControlSequence::from_flat(up, m.p));
    const auto fdn = cv::extended_transition(m, x, cv::ControlSequence::from_flat(dn, m.p));
    J.col(c) = (fu - fdn) / (2.0 * h);
  }
  return J;
}

cv::ControlSequence sampled(const cv::ModelSpec& m, const cv::Vector& x, int k, cv::Rng& rng) {
  cv::ControlSequence ws;
  cv::Vector y = x;
  for (int i = 0; i < k; ++i) {
    auto w = m.sample_control(y, rng);
    y = cv::step(m, y, w);
    ws.push_back(w);
  }
  return ws;
}

void expect_close(const cv::Matrix& a, const cv::Matrix& b, double tol) {
  ASSERT_EQ(a.rows(), b.rows());
  ASSERT_EQ(a.cols(), b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      EXPECT_LE(std::abs(a(i, j) - b(i, j)), tol * (1.0 + std::abs(b(i, j)))) << i << "," << j;
    }
  }
}

}  // namespace

TEST(Jacobians, RandomWalkIdentity) {
  const auto rw = cv::make_random_walk(1);
  EXPECT_EQ(cv::jacobian_x(rw, v1(2.0), v1(-1.0))(0, 0), 1.0);
  EXPECT_EQ(cv::jacobian_w(rw, v1(2.0), v1(-1.0))(0, 0), 1.0);
}

TEST(Jacobians, XnesAtZero) {
  const auto m = cv::make_xnes_chain(cv::xnes_params(1, 2, 1, cv::make_objective("sphere", 1)));
  EXPECT_NEAR(cv::jacobian_x(m, v1(0.0), v1(0.0))(0, 0), std::exp(0.5), 1e-14);
  EXPECT_NEAR(cv::jacobian_w(m, v1(0.0), v1(0.0))(0, 0), std::exp(0.5), 1e-14);
}

TEST(Jacobians, DualMatchesFiniteDifferences) {
  const auto m = cv::make_xnes_chain(cv::xnes_params(3, 6, 3, cv::make_objective("ellipsoid", 3), 0.8, 1.3));
  cv::Rng rng(3);
  for (int t = 0; t < 10; ++t) {
    cv::Vector z = cv::Vector::Random(3) * 3.0;
    const auto w = m.sample_control(z, rng);
    const auto dual = cv::step_jacobians(m, z, w);
    const auto fd = cv::step_jacobians(m, z, w, {false, true});
    EXPECT_EQ(dual.route, cv::DerivativeRoute::kDual);
    EXPECT_EQ(fd.route, cv::DerivativeRoute::kFiniteDifference);
    expect_close(fd.dx, dual.dx, 1e-5);
    expect_close(fd.dw, dual.dw, 1e-5);
  }
}

TEST(Jacobians, TiedBlockRefused) {
  const auto m = cv::make_xnes_chain(cv::xnes_params(1, 3, 2, cv::make_objective("sphere", 1)));
  const cv::Vector tied = (cv::Vector(2) << 0.5, -0.5).finished();
  EXPECT_THROW(cv::jacobian_w(m, v1(0.0), tied), cv::DifferentiationError);
  EXPECT_NO_THROW(cv::jacobian_w(m, v1(0.0), tied, {true, false}));
}

TEST(Jacobians, NonFiniteEntriesRefused) {
  cv::ModelSpec bad = cv::make_random_walk(1);
  bad.step_dual = nullptr;
  bad.step = [](const cv::Vector& x, const cv::Vector& w) -> cv::Vector { return v1(std::sqrt(x[0]) + w[0]); };
  EXPECT_THROW(cv::jacobian_x(bad, v1(0.0), v1(0.0)), cv::DifferentiationError);
}

TEST(Controllability, RandomWalkOnes) {
  const auto rw = cv::make_random_walk(1);
  const auto C = cv::controllability_matrix(rw, v1(0.3), cv::ControlSequence({v1(1), v1(2), v1(3)}));
  ASSERT_EQ(C.mat.rows(), 1);
  ASSERT_EQ(C.mat.cols(), 3);
  EXPECT_EQ(C.mat, cv::Matrix::Ones(1, 3));
}

TEST(Controllability, XnesZeroBlock) {
  for (int n : {1, 3}) {
    const auto m = cv::make_xnes_chain(cv::xnes_params(n, 2, 1, cv::make_objective("sphere", n), 0.7, 1.4));
    const auto C = cv::controllability_matrix(m, cv::Vector::Zero(n),
                                              cv::ControlSequence({cv::Vector::Zero(n)}));
    expect_close(C.mat, 0.7 * std::exp(0.7) * cv::Matrix::Identity(n, n), 1e-14);
  }
}

TEST(Controllability, MatchesFiniteDifferenceJacobian) {
  const std::vector<cv::ModelSpec> models = {
      cv::make_random_walk(2),
      cv::make_selection_walk(cv::make_objective("sphere", 1)),
      cv::make_xnes_chain(cv::xnes_params(2, 5, 2, cv::make_objective("sphere", 2))),
      cv::make_xnes_chain(cv::xnes_params(3, 4, 1, cv::make_objective("l1", 3), 1.0, 0.5)),
  };
  cv::Rng rng(11);
  for (const auto& m : models) {
    for (int k = 1; k <= 4; ++k) {
      const cv::Vector x = cv::Vector::Random(m.n) * 2.0;
      const auto ws = sampled(m, x, k, rng);
      const auto C = cv::controllability_matrix(m, x, ws);
      expect_close(C.mat, fd_sequence_jacobian(m, x, ws), 1e-4);
    }
  }
}

TEST(Controllability, RecursionSubmatrix) {
  const auto m = cv::make_xnes_chain(cv::xnes_params(2, 6, 2, cv::make_objective("sphere", 2)));
  cv::Rng rng(23);
  for (int t = 0; t < 5; ++t) {
    const cv::Vector x = cv::Vector::Random(2);
    const auto ws = sampled(m, x, 4, rng);
    const auto full = cv::controllability_matrix(m, x, ws);
    const auto tail = cv::controllability_matrix(m, cv::step(m, x, ws[0]), ws.slice(1, 3));
    const cv::Matrix right = full.mat.rightCols(tail.mat.cols());
    for (Eigen::Index i = 0; i < right.size(); ++i) {
      EXPECT_NEAR(right.data()[i], tail.mat.data()[i], 1e-14 * (1.0 + std::abs(tail.mat.data()[i])));
    }
  }
}

TEST(NumericRank, Examples) {
  EXPECT_EQ(cv::numeric_rank(cv::Matrix::Ones(1, 3)).numeric_rank, 1);
  const auto zero = cv::numeric_rank(cv::Matrix::Zero(2, 2));
  EXPECT_EQ(zero.numeric_rank, 0);
  EXPECT_FALSE(zero.full_rank);
  cv::Matrix d = cv::Matrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 1e-14;
  const auto r = cv::numeric_rank(d, 1e-10);
  EXPECT_EQ(r.numeric_rank, 1);
  EXPECT_DOUBLE_EQ(r.singular_values[0], 1.0);
  EXPECT_DOUBLE_EQ(r.tolerance, 1e-10);
}

TEST(NumericRank, BorderlineFlagged) {
  cv::Matrix d = cv::Matrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 3e-8;
  const auto r = cv::numeric_rank(d, 1e-8);
  EXPECT_EQ(r.numeric_rank, 2);
  EXPECT_TRUE(r.borderline);
  d(1, 1) = 0.5;
  EXPECT_FALSE(cv::numeric_rank(d, 1e-8).borderline);
}

TEST(NumericRank, SingularValuesNonincreasing) {
  const cv::Matrix a = cv::Matrix::Random(4, 7);
  const auto r = cv::numeric_rank(a);
  ASSERT_EQ(r.singular_values.size(), 4u);
  for (std::size_t i = 1; i < 4; ++i) EXPECT_GE(r.singular_values[i - 1], r.singular_values[i]);
  EXPECT_EQ(r.numeric_rank, 4);
}

TEST(RankCondition, RandomWalk) {
  const auto rw = cv::make_random_walk(1);
  EXPECT_TRUE(cv::rank_condition(rw, v1(4.0), cv::ControlSequence({v1(0.0)})));
}

TEST(RankCondition, XnesOrderedBlockNearZero) {
  const auto m = cv::make_xnes_chain(cv::xnes_params(2, 4, 2, cv::make_objective("sphere", 2)));
  const cv::Vector w = (cv::Vector(4) << 0.01, 0.0, 0.0, 0.02).finished();
  EXPECT_TRUE(cv::rank_condition(m, cv::Vector::Zero(2), cv::ControlSequence({w})));
}

TEST(RankCondition, OutsideControlSetIsInvalidWitness) {
  const auto m = cv::make_xnes_chain(cv::xnes_params(1, 4, 2, cv::make_objective("sphere", 1)));
  const cv::Vector w = (cv::Vector(2) << 0.5, 0.1).finished();
  EXPECT_THROW(cv::rank_condition(m, v1(0.0), cv::ControlSequence({w})), cv::InvalidWitnessError);
}

TEST(RankCondition, ControlIgnoringIsRankDeficient) {
  const auto m = cv::make_control_ignoring(2);
  const auto rw = cv::assess_rank(m, cv::Vector::Zero(2), cv::ControlSequence({cv::Vector::Zero(2)}));
  EXPECT_EQ(rw.report.numeric_rank, 0);
  EXPECT_FALSE(rw.report.full_rank);
}
