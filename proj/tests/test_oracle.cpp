#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace bayesbin;
using oracle::GridAxis;
using oracle::GridSpec;

namespace {

GridSpec square(std::size_t dim, double half_width, std::size_t n) {
  GridSpec g;
  for (std::size_t d = 0; d < dim; ++d) g.axes.push_back(GridAxis{-half_width, half_width, n});
  return g;
}

}  // namespace

TEST(Oracle, FiniteDifferencesOfQuadratic) {
  Eigen::VectorXd b(3);
  b << 0.5, -1.0, 2.0;
  auto f = [](const Eigen::VectorXd& v) { return v(0) * v(0) + 3.0 * v(1) * v(2) - v(2); };
  const auto g = oracle::finite_diff_gradient(f, b);
  EXPECT_NEAR(g(0), 1.0, 1e-8);
  EXPECT_NEAR(g(1), 6.0, 1e-8);
  EXPECT_NEAR(g(2), -4.0, 1e-8);
}

TEST(Oracle, FiniteDifferencesRejectNonFinite) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(2);
  auto f = [](const Eigen::VectorXd& v) { return v(1) > 0 ? std::log(-1.0) : 0.0; };
  try {
    oracle::finite_diff_gradient(f, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFiniteEvaluation);
  }
}

TEST(Oracle, PairwiseSum) {
  std::vector<double> v(1000, 0.1);
  EXPECT_NEAR(oracle::pairwise_sum(v), 100.0, 1e-12);
  EXPECT_EQ(oracle::pairwise_sum({}), 0.0);
}

TEST(Oracle, PriorOnlyGridRecoversPrior) {
  Eigen::MatrixXd x(0, 1);
  Eigen::VectorXd y(0);
  const ModelSpec m(LinkKind::Logit, PriorSpec{0.5, 1.0, -1.0, 0.5}, x, y);
  GridSpec g;
  g.axes = {GridAxis{-5.5, 6.5, 301}, GridAxis{-4.0, 2.0, 301}};
  const auto mo = oracle::grid_posterior_moments(m, g);
  EXPECT_NEAR(mo.mean(0), 0.5, 1e-3);
  EXPECT_NEAR(mo.sd(0), 1.0, 1e-3);
  EXPECT_NEAR(mo.mean(1), -1.0, 1e-3);
  EXPECT_NEAR(mo.sd(1), 0.5, 1e-3);
}

TEST(Oracle, FlippedOutcomesNegateMeans) {
  // y -> 1 - y with a symmetric prior centred at zero negates every posterior mean
  auto prob = synthetic_regression(30, 1, LinkKind::Logit, 5);
  Eigen::VectorXd flipped = Eigen::VectorXd::Ones(30) - prob.y;
  const PriorSpec pr{0, 2.5, 0, 2.5};
  const auto g = square(2, 6.0, 201);
  const auto a = oracle::grid_posterior_moments(ModelSpec(LinkKind::Logit, pr, prob.x, prob.y), g);
  const auto b = oracle::grid_posterior_moments(ModelSpec(LinkKind::Logit, pr, prob.x, flipped), g);
  EXPECT_NEAR(a.mean(0), -b.mean(0), 1e-10);
  EXPECT_NEAR(a.mean(1), -b.mean(1), 1e-10);
  EXPECT_NEAR(a.sd(1), b.sd(1), 1e-10);
  // flipping y and negating x negates the intercept only
  const Eigen::MatrixXd negated = -prob.x;
  const auto c = oracle::grid_posterior_moments(ModelSpec(LinkKind::Logit, pr, negated, flipped), g);
  EXPECT_NEAR(a.mean(0), -c.mean(0), 1e-10);
  EXPECT_NEAR(a.mean(1), c.mean(1), 1e-10);
}

TEST(Oracle, RefiningGridIsStable) {
  auto prob = synthetic_regression(40, 1, LinkKind::Probit, 6);
  const ModelSpec m(LinkKind::Probit, PriorSpec{0, 2.5, 0, 2.5}, prob.x, prob.y);
  const auto a = oracle::grid_posterior_moments(m, square(2, 5.0, 201));
  const auto b = oracle::grid_posterior_moments(m, square(2, 5.0, 401));
  EXPECT_LT((a.mean - b.mean).cwiseAbs().maxCoeff(), 1e-4);
  EXPECT_LT((a.sd - b.sd).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(Oracle, GridErrors) {
  auto prob = synthetic_regression(10, 3, LinkKind::Logit, 1);
  const ModelSpec four(LinkKind::Logit, default_priors(LinkKind::Logit), prob.x, prob.y);
  try {
    oracle::grid_posterior_moments(four, square(4, 3.0, 11));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionTooHigh);
  }

  auto small = synthetic_regression(30, 1, LinkKind::Logit, 2);
  const ModelSpec two(LinkKind::Logit, PriorSpec{0, 2.5, 0, 2.5}, small.x, small.y);
  try {
    oracle::grid_posterior_moments(two, square(2, 0.3, 51));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::GridTooCoarse);
  }
  try {
    oracle::grid_posterior_moments(two, square(3, 3.0, 11));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
  GridSpec big = square(2, 3.0, 5000);
  try {
    big.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooLarge);
  }
  EXPECT_THROW(square(2, 3.0, 2).validate(), Error);
}

TEST(Oracle, NaiveLogPosteriorAtZero) {
  auto prob = synthetic_regression(8, 2, LinkKind::Probit, 3);
  const PriorSpec pr{0, 1, 0, 1};
  const ModelSpec m(LinkKind::Probit, pr, prob.x, prob.y);
  const double expected = 8 * std::log(0.5) - 1.5 * std::log(2 * M_PI);
  EXPECT_NEAR(oracle::naive_log_posterior(m, Eigen::VectorXd::Zero(3)), expected, 1e-12);
}
