#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace bayesbin;

namespace {

// 3 chains x 41 draws of a deterministic autocorrelated sequence with chain offsets.
ChainDraws fixture() {
  ChainDraws x(3, std::vector<double>(41));
  for (int c = 0; c < 3; ++c) {
    double v = 0.0;
    for (int i = 0; i < 41; ++i) {
      double u = std::sin(12.9898 * (i + 1) + 78.233 * (c + 1)) * 43758.5453;
      u -= std::floor(u);
      v = 0.6 * v + (u - 0.5) + 0.15 * c;
      x[c][i] = v;
    }
  }
  return x;
}

ChainDraws ar1(double rho, std::size_t chains, std::size_t n, std::uint64_t seed) {
  Engine eng = make_engine(seed, StreamTag::Synthetic, 500);
  ChainDraws x(chains, std::vector<double>(n));
  const double innov = std::sqrt(1 - rho * rho);
  for (auto& c : x) {
    double v = standard_normal(eng);
    for (auto& e : c) {
      v = rho * v + innov * standard_normal(eng);
      e = v;
    }
  }
  return x;
}

}  // namespace

TEST(Quantile, Examples) {
  EXPECT_EQ(quantile({1, 2, 3, 4, 5}, 0.5), 3.0);
  EXPECT_EQ(quantile({0, 10}, 0.25), 2.5);
  std::vector<double> v;
  for (int i = 1; i <= 100; ++i) v.push_back(i);
  EXPECT_NEAR(quantile(v, 0.975), 97.525, 1e-12);
  EXPECT_EQ(quantile({4, -1, 7}, 0.0), -1.0);
  EXPECT_EQ(quantile({4, -1, 7}, 1.0), 7.0);
  try {
    quantile({}, 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyInput);
  }
}

TEST(Quantile, NormalQuantile) {
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054236, 1e-15);
  EXPECT_NEAR(normal_quantile(1e-10), -6.361340902404056205, 1e-13);
  EXPECT_EQ(normal_quantile(0.5), 0.0);
}

// Reference values from an independent array implementation of the same
// estimators (rank normalization, split chains, Geyer truncation).
TEST(Diagnostics, ReferenceFixture) {
  const auto x = fixture();
  EXPECT_NEAR(x[0][0], 0.24008482419867505, 1e-10);
  EXPECT_NEAR(split_rhat(x), 1.2874717464119665, 1e-9);
  EXPECT_NEAR(ess_bulk(x), 9.4900085885312198, 1e-7);
  EXPECT_NEAR(ess_tail(x), 70.091078024272193, 1e-7);
}

TEST(Diagnostics, IidChains) {
  Engine eng = make_engine(3, StreamTag::Synthetic, 1);
  const auto x = iid_chains(eng, 4, 1000);
  EXPECT_NEAR(split_rhat(x), 1.0, 0.01);
  EXPECT_NEAR(ess_bulk(x), 4000.0, 600.0);
  EXPECT_NEAR(ess_tail(x), 4000.0, 600.0);
}

TEST(Diagnostics, ShiftedChains) {
  Engine eng = make_engine(3, StreamTag::Synthetic, 2);
  EXPECT_GT(split_rhat(iid_chains(eng, 2, 1000, {0.0, 5.0})), 1.5);
  EXPECT_GT(split_rhat(iid_chains(eng, 4, 1000, {0.0, 5.0})), 1.1);
}

TEST(Diagnostics, Ar1Ess) {
  const double rho = 0.9;
  const double nominal = 4000.0 * (1 - rho) / (1 + rho);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto x = ar1(rho, 4, 1000, seed);
    EXPECT_NEAR(ess_bulk(x) / nominal, 1.0, 0.3) << "seed " << seed;
  }
}

TEST(Diagnostics, FftMatchesDirect) {
  const auto x = ar1(0.5, 4, 3000, 9);
  for (auto est : {ess_bulk, ess_tail}) {
    const double d = est(x, detail::AutocovMethod::Direct);
    const double f = est(x, detail::AutocovMethod::Fft);
    EXPECT_NEAR(d, f, 1e-9 * d);
  }
}

TEST(Diagnostics, EssCapAndAntithetic) {
  // negatively correlated chains are super-efficient; the estimate is capped at 2S
  const auto x = ar1(-0.5, 4, 1000, 3);
  EXPECT_GT(ess_bulk(x), 4000.0);
  EXPECT_LE(ess_bulk(x), 8000.0);
  const auto strong = ar1(-0.9, 4, 1000, 4);
  EXPECT_LE(ess_bulk(strong), 8000.0);
}

TEST(Diagnostics, DegenerateAndTooFew) {
  ChainDraws same(4, std::vector<double>(10, 1.0));
  EXPECT_TRUE(std::isnan(split_rhat(same)));
  EXPECT_TRUE(std::isnan(ess_bulk(same)));
  EXPECT_TRUE(std::isnan(ess_tail(same)));
  ChainDraws few(2, std::vector<double>(3, 0.5));
  try {
    split_rhat(few);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewDraws);
  }
}

TEST(Summary, ConstantDrawsRenderNA) {
  PosteriorDraws d = constant_draws(4, 100, Eigen::VectorXd::Ones(1));
  const auto rows = summarize(d);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].estimate, 1.0);
  EXPECT_EQ(rows[0].est_error, 0.0);
  EXPECT_FALSE(rows[0].rhat.has_value());
  std::ostringstream out;
  render_summary(rows, out);
  EXPECT_NE(out.str().find("NA"), std::string::npos);
  EXPECT_NE(out.str().find("1.00"), std::string::npos);
  EXPECT_TRUE(summary_json(rows)[0]["rhat"].is_null());
}

TEST(Summary, NormalDrawsReproduceTableRow) {
  // 4 x 1000 iid Normal(2.34, 0.81) draws summarize to about (2.34, 0.81, 0.77, 3.94)
  Engine eng = make_engine(5, StreamTag::Synthetic, 3);
  PosteriorDraws d = constant_draws(4, 1000, Eigen::VectorXd::Zero(1));
  for (double& v : d.values) v = 2.34 + 0.81 * standard_normal(eng);
  const auto r = summarize(d)[0];
  const double se = 0.81 / std::sqrt(4000.0);
  EXPECT_NEAR(r.estimate, 2.34, 4 * se);
  EXPECT_NEAR(r.est_error, 0.81, 4 * se / std::sqrt(2.0));
  EXPECT_NEAR(r.ci_lower, 2.34 - 1.959964 * 0.81, 0.06);
  EXPECT_NEAR(r.ci_upper, 2.34 + 1.959964 * 0.81, 0.06);
}

TEST(Summary, ChainOrderInvariantAndRowOrder) {
  auto prob = synthetic_regression(40, 2, LinkKind::Logit, 2);
  const ModelSpec m(LinkKind::Logit, PriorSpec{0, 2, 0, 2}, prob.x, prob.y);
  SamplerConfig cfg;
  cfg.n_warmup = 200;
  cfg.n_draws = 200;
  const auto d = sample(m, cfg, {"Intercept", "a", "b"});
  auto swapped = d;
  const std::size_t block = d.n_draws * d.n_params;
  std::swap_ranges(swapped.values.begin(), swapped.values.begin() + block, swapped.values.begin() + 3 * block);
  const auto a = summarize(d);
  const auto b = summarize(swapped);
  ASSERT_EQ(a.size(), 3u);
  EXPECT_EQ(a[1].name, "a");
  for (std::size_t p = 0; p < 3; ++p) {
    EXPECT_NEAR(a[p].estimate, b[p].estimate, 1e-12);
    EXPECT_NEAR(a[p].est_error, b[p].est_error, 1e-12);
    EXPECT_EQ(a[p].ci_lower, b[p].ci_lower);
    EXPECT_EQ(a[p].ci_upper, b[p].ci_upper);
  }
}

TEST(Summary, TextAndJsonCarrySameValues) {
  PosteriorDraws d = constant_draws(2, 50, Eigen::VectorXd::Zero(2));
  Engine eng = make_engine(1, StreamTag::Synthetic, 4);
  for (double& v : d.values) v = standard_normal(eng);
  const auto rows = summarize(d);
  const auto j = summary_json(rows);
  std::ostringstream text;
  render_summary(rows, text);
  std::ostringstream expect;
  expect << std::fixed << std::setprecision(2) << j[1]["estimate"].get<double>();
  std::string e = expect.str() == "-0.00" ? "0.00" : expect.str();
  EXPECT_NE(text.str().find(e), std::string::npos);
}

TEST(Calibration, FiftySeeds) {
  const auto r = check_diagnostic_calibration(1);
  EXPECT_TRUE(r.passed) << format_check(r);
}
