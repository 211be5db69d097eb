#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace bayesbin;

namespace {

// Independent normals with the given scales.
struct NormalTarget {
  Eigen::VectorXd scale;
  Eigen::Index dim() const { return scale.size(); }
  double log_density_gradient(const Eigen::VectorXd& q, Eigen::VectorXd& g) const {
    const Eigen::VectorXd z = q.cwiseQuotient(scale);
    g = -z.cwiseQuotient(scale);
    return -0.5 * z.squaredNorm();
  }
};

struct NanTarget {
  Eigen::Index dim() const { return 2; }
  double log_density_gradient(const Eigen::VectorXd&, Eigen::VectorXd& g) const {
    g = Eigen::VectorXd::Zero(2);
    return std::nan("");
  }
};

// Finite only inside the unit box.
struct BoxTarget {
  Eigen::Index dim() const { return 2; }
  double log_density_gradient(const Eigen::VectorXd& q, Eigen::VectorXd& g) const {
    g = -q;
    if (q.cwiseAbs().maxCoeff() > 1.0) return -INFINITY;
    return -0.5 * q.squaredNorm();
  }
};

}  // namespace

TEST(Sampler, StandardNormalMeans) {
  const NormalTarget target{Eigen::VectorXd::Ones(2)};
  SamplerConfig cfg;
  cfg.seed = 42;
  const auto d = sample(target, cfg);
  ASSERT_EQ(d.values.size(), 4u * 1000u * 2u);
  for (std::size_t p = 0; p < 2; ++p) {
    const auto chains = d.chains_of(p);
    std::vector<double> all;
    for (const auto& c : chains) all.insert(all.end(), c.begin(), c.end());
    const double mean = detail::mean_of(all);
    const double sd = std::sqrt(detail::variance_of(all));
    EXPECT_LT(std::abs(mean), 4.0 * sd / std::sqrt(ess_bulk(chains)));
    EXPECT_NEAR(sd, 1.0, 0.05);
  }
  EXPECT_EQ(d.total_divergences(), 0u);
  EXPECT_EQ(d.param_names[0], "Intercept");
}

TEST(Sampler, MetricAdaptsToScales) {
  Eigen::VectorXd s(3);
  s << 0.01, 1.0, 100.0;
  const NormalTarget target{s};
  SamplerConfig cfg;
  cfg.n_chains = 1;
  const auto d = sample(target, cfg);
  // inverse metric approximates the variances
  EXPECT_NEAR(d.inv_metric[0][0] / 1e-4, 1.0, 0.3);
  EXPECT_NEAR(d.inv_metric[0][2] / 1e4, 1.0, 0.3);
  std::vector<double> big;
  for (std::size_t i = 0; i < d.n_draws; ++i) big.push_back(d(0, i, 2));
  EXPECT_NEAR(std::sqrt(detail::variance_of(big)), 100.0, 10.0);
}

TEST(Sampler, DeterministicAcrossRunsAndThreads) {
  auto prob = synthetic_regression(60, 3, LinkKind::Logit, 4);
  const ModelSpec m(LinkKind::Logit, default_priors(LinkKind::Logit), prob.x, prob.y);
  SamplerConfig cfg;
  cfg.n_warmup = 200;
  cfg.n_draws = 100;
  const auto a = sample(m, cfg, {}, 1);
  const auto b = sample(m, cfg, {}, 1);
  const auto c = sample(m, cfg, {}, 3);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.values, c.values);
  EXPECT_EQ(a.step_size, c.step_size);
  cfg.seed = 2;
  EXPECT_NE(sample(m, cfg, {}, 1).values, a.values);
}

TEST(Sampler, ChainsDependOnlyOnTheirIndex) {
  const NormalTarget target{Eigen::VectorXd::Ones(2)};
  SamplerConfig cfg;
  cfg.n_warmup = 100;
  cfg.n_draws = 50;
  cfg.n_chains = 2;
  const auto two = sample(target, cfg);
  cfg.n_chains = 4;
  const auto four = sample(target, cfg);
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t i = 0; i < 50; ++i) {
      EXPECT_EQ(two(c, i, 0), four(c, i, 0));
      EXPECT_EQ(two(c, i, 1), four(c, i, 1));
    }
  }
}

TEST(Sampler, InitializeChain) {
  auto prob = synthetic_regression(20, 2, LinkKind::Logit, 1);
  const ModelSpec m(LinkKind::Logit, default_priors(LinkKind::Logit), prob.x, prob.y);
  SamplerConfig cfg;
  cfg.init_radius = 0.0;
  EXPECT_EQ(initialize_chain(m, 0, cfg).flat(), Eigen::VectorXd::Zero(3));
  EXPECT_EQ(initialize_chain(m, 3, cfg).flat(), Eigen::VectorXd::Zero(3));
  cfg.init_radius = 2.0;
  const auto a = initialize_chain(m, 0, cfg).flat();
  const auto b = initialize_chain(m, 1, cfg).flat();
  EXPECT_NE(a, b);
  for (std::size_t c = 0; c < 20; ++c) EXPECT_LE(initialize_chain(m, c, cfg).flat().cwiseAbs().maxCoeff(), 2.0);
}

TEST(Sampler, InitializationRetriesAndFails) {
  SamplerConfig cfg;
  cfg.init_radius = 1.5;  // about 44% of starts land inside the box
  EXPECT_LE(initialize_chain(BoxTarget{}, 0, cfg).cwiseAbs().maxCoeff(), 1.0);
  try {
    initialize_chain(NanTarget{}, 0, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFiniteGradient);
  }
}

TEST(Sampler, ConstrainedTargetStaysFinite) {
  SamplerConfig cfg;
  cfg.init_radius = 0.5;
  cfg.n_warmup = 300;
  cfg.n_draws = 300;
  const auto d = sample(BoxTarget{}, cfg);
  for (double v : d.values) EXPECT_LE(std::abs(v), 1.0);
}

TEST(Sampler, ShortWarmupAndNoWarmup) {
  const NormalTarget target{Eigen::VectorXd::Ones(3)};
  SamplerConfig cfg;
  cfg.n_chains = 2;
  cfg.n_draws = 20;
  for (std::size_t w : {0u, 10u, 40u, 149u}) {
    cfg.n_warmup = w;
    const auto d = sample(target, cfg);
    EXPECT_EQ(d.values.size(), 2u * 20u * 3u);
    for (double v : d.values) EXPECT_TRUE(std::isfinite(v));
  }
}

TEST(Sampler, ConfigValidation) {
  SamplerConfig cfg;
  cfg.target_accept = 1.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.n_chains = 0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.max_tree_depth = 16;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  auto back = nlohmann::json(cfg).get<SamplerConfig>();
  EXPECT_TRUE(back == cfg);
}

TEST(Sampler, DivergenceFlagThreshold) {
  PosteriorDraws d;
  d.n_chains = 1;
  d.n_draws = 1000;
  d.divergence_count = {10};
  EXPECT_FALSE(d.divergence_flag());
  d.divergence_count = {11};
  EXPECT_TRUE(d.divergence_flag());
}

TEST(Sampler, MatchesGridQuadrature) {
  const auto r = check_sampler_vs_grid(7);
  EXPECT_TRUE(r.passed) << format_check(r);
}
