#pragma once

// Pointwise predictive densities, Pareto-smoothed importance sampling
// leave-one-out cross-validation, and model comparison on elpd.
//
// REFERENCE: Vehtari, A., Gelman, A. and Gabry, J., 2017. Practical Bayesian
// model evaluation using leave-one-out cross-validation and WAIC. Statistics
// and Computing 27. Zhang, J. and Stephens, M.A., 2009. A new and efficient
// estimation method for the generalized Pareto distribution. Technometrics 51.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "error.hpp"
#include "links.hpp"
#include "model.hpp"
#include "random.hpp"
#include "sampler.hpp"

namespace bayesbin {

/// S x N: entry (s, i) is log p(y_i | draw s). Column-major, so each
/// observation's draws are contiguous.
using LogLikMatrix = Eigen::MatrixXd;

/// Order-independent hash of the observation set: N, k and the multiset of (row, y).
inline std::uint64_t dataset_fingerprint(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  std::uint64_t acc = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto absorb = [&h](double v) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, sizeof bits);
      h = mix64(h ^ bits);
    };
    for (Eigen::Index j = 0; j < x.cols(); ++j) absorb(x(i, j));
    absorb(y(i));
    acc += h;
  }
  return mix64(acc ^ mix64(static_cast<std::uint64_t>(x.rows())) ^
               mix64(static_cast<std::uint64_t>(x.cols()) << 32));
}

inline std::uint64_t dataset_fingerprint(const ModelSpec& model) { return dataset_fingerprint(model.x(), model.y()); }

namespace detail {

inline void check_draws_match(const PosteriorDraws& draws, const ModelSpec& model) {
  if (draws.n_params != static_cast<std::size_t>(model.dim())) {
    throw Error(ErrorCode::DimensionMismatch, "draws have " + std::to_string(draws.n_params) +
                                                  " parameters, model has " + std::to_string(model.dim()));
  }
}

/// S x (end - begin) block of the log-likelihood matrix.
inline Eigen::MatrixXd loglik_block(const PosteriorDraws& draws, const ModelSpec& model, Eigen::Index begin,
                                    Eigen::Index end) {
  const auto s_count = static_cast<Eigen::Index>(draws.total_draws());
  const auto k = model.slopes();
  Eigen::MatrixXd betas(s_count, k);
  Eigen::VectorXd intercepts(s_count);
  for (Eigen::Index s = 0; s < s_count; ++s) {
    const Eigen::VectorXd q = draws.draw(static_cast<std::size_t>(s));
    intercepts(s) = q(0);
    betas.row(s) = q.tail(k).transpose();
  }
  Eigen::MatrixXd eta = betas * model.x().middleRows(begin, end - begin).transpose();
  eta.colwise() += intercepts;
  for (Eigen::Index c = 0; c < eta.cols(); ++c) {
    const bool y = model.y()(begin + c) > 0.5;
    for (Eigen::Index s = 0; s < s_count; ++s) eta(s, c) = bernoulli_log_density(model.link(), eta(s, c), y);
  }
  return eta;
}

inline double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

struct GpdFit {
  double k = std::numeric_limits<double>::quiet_NaN();
  double sigma = std::numeric_limits<double>::quiet_NaN();
};

/// Generalized Pareto fit to sorted exceedances (Zhang-Stephens profile
/// posterior with a weakly informative shrink of k toward 0.5).
inline GpdFit gpd_fit(const std::vector<double>& x) {
  const std::size_t n = x.size();
  const double prior = 3.0;
  const std::size_t m = 30 + static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
  const double xstar = x[static_cast<std::size_t>(std::floor(static_cast<double>(n) / 4.0 + 0.5)) - 1];
  std::vector<double> theta(m), log_lik(m);
  for (std::size_t j = 0; j < m; ++j) {
    theta[j] = 1.0 / x[n - 1] +
               (1.0 - std::sqrt(static_cast<double>(m) / (static_cast<double>(j + 1) - 0.5))) / prior / xstar;
    const double a = -theta[j];
    double kk = 0.0;
    for (double v : x) kk += std::log1p(a * v);
    kk /= static_cast<double>(n);
    log_lik[j] = static_cast<double>(n) * (std::log(a / kk) - kk - 1.0);
  }
  const double lmax = *std::max_element(log_lik.begin(), log_lik.end());
  double wsum = 0.0;
  for (double l : log_lik) wsum += std::exp(l - lmax);
  double theta_hat = 0.0;
  for (std::size_t j = 0; j < m; ++j) theta_hat += theta[j] * std::exp(log_lik[j] - lmax) / wsum;

  GpdFit fit;
  double k = 0.0;
  for (double v : x) k += std::log1p(-theta_hat * v);
  k /= static_cast<double>(n);
  fit.sigma = -k / theta_hat;
  const double nd = static_cast<double>(n);
  fit.k = k * nd / (nd + 10.0) + 10.0 * 0.5 / (nd + 10.0);
  return fit;
}

inline double gpd_quantile(double p, double k, double sigma) {
  if (std::abs(k) < 1e-12) return -sigma * std::log1p(-p);
  return sigma * std::expm1(-k * std::log1p(-p)) / k;
}

}  // namespace detail

struct SmoothedWeights {
  std::vector<double> log_weights;
  double pareto_k = std::numeric_limits<double>::quiet_NaN();
};

/// Replaces the largest M = ceil(min(0.2 S, 3 sqrt(S))) log weights by expected
/// order statistics of a generalized Pareto fit, then truncates at the largest
/// raw weight. Fewer than 25 weights, or a flat tail, pass through with k = NaN.
inline SmoothedWeights psis_smooth(const std::vector<double>& raw_log_weights) {
  SmoothedWeights out;
  out.log_weights = raw_log_weights;
  const std::size_t s = raw_log_weights.size();
  if (s < 25) return out;

  const double max_raw = *std::max_element(raw_log_weights.begin(), raw_log_weights.end());
  if (!std::isfinite(max_raw)) return out;
  std::vector<double> lw(s);
  for (std::size_t i = 0; i < s; ++i) lw[i] = raw_log_weights[i] - max_raw;

  const double sd = static_cast<double>(s);
  const auto tail_len = static_cast<std::size_t>(std::ceil(std::min(0.2 * sd, 3.0 * std::sqrt(sd))));
  std::vector<std::size_t> order(s);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return lw[a] < lw[b]; });

  const std::size_t first_tail = s - tail_len;
  const double tail_min = lw[order[first_tail]];
  const double tail_max = lw[order[s - 1]];
  if (std::abs(tail_max - tail_min) < std::numeric_limits<double>::epsilon() / 100.0) return out;

  const double cutoff = lw[order[first_tail - 1]];
  const double exp_cutoff = std::exp(cutoff);
  std::vector<double> exceed(tail_len);
  for (std::size_t t = 0; t < tail_len; ++t) exceed[t] = std::exp(lw[order[first_tail + t]]) - exp_cutoff;
  const auto fit = detail::gpd_fit(exceed);
  if (!std::isfinite(fit.k) || !(fit.sigma > 0.0)) return out;

  for (std::size_t t = 0; t < tail_len; ++t) {
    const double p = (static_cast<double>(t) + 0.5) / static_cast<double>(tail_len);
    lw[order[first_tail + t]] = std::log(detail::gpd_quantile(p, fit.k, fit.sigma) + exp_cutoff);
  }
  for (std::size_t i = 0; i < s; ++i) {
    if (lw[i] > 0.0) lw[i] = 0.0;
    out.log_weights[i] = lw[i] + max_raw;
  }
  out.pareto_k = fit.k;
  return out;
}

struct LooResult {
  double elpd_loo = 0.0;
  double se_elpd = 0.0;
  double lpd = 0.0;  // in-sample sum of log mean predictive densities
  std::vector<double> pointwise_elpd;
  std::vector<double> pareto_k;
  std::size_t n_high_k = 0;
  std::uint64_t fingerprint = 0;

  std::size_t size() const { return pointwise_elpd.size(); }
  double p_loo() const { return lpd - elpd_loo; }
};

inline constexpr double kParetoKWarning = 0.7;

namespace detail {

struct PointwiseLoo {
  double elpd = 0.0;
  double lpd = 0.0;
  double k = std::numeric_limits<double>::quiet_NaN();
};

inline PointwiseLoo loo_column(const Eigen::Ref<const Eigen::VectorXd>& ll) {
  const auto s = ll.size();
  std::vector<double> ratios(static_cast<std::size_t>(s));
  for (Eigen::Index i = 0; i < s; ++i) ratios[static_cast<std::size_t>(i)] = -ll(i);
  const auto smoothed = psis_smooth(ratios);
  Eigen::Map<const Eigen::VectorXd> lw(smoothed.log_weights.data(), s);
  const double norm = log_sum_exp(lw);
  PointwiseLoo out;
  out.elpd = log_sum_exp((lw.array() - norm).matrix() + ll);
  out.lpd = log_sum_exp(ll) - std::log(static_cast<double>(s));
  out.k = smoothed.pareto_k;
  return out;
}

inline double se_of_sum(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(n * ss / (n - 1.0));
}

inline void finish(LooResult& r) {
  r.elpd_loo = std::accumulate(r.pointwise_elpd.begin(), r.pointwise_elpd.end(), 0.0);
  r.se_elpd = se_of_sum(r.pointwise_elpd);
  r.n_high_k = static_cast<std::size_t>(
      std::count_if(r.pareto_k.begin(), r.pareto_k.end(), [](double k) { return k > kParetoKWarning; }));
}

}  // namespace detail

/// Full S x N log-likelihood matrix.
inline LogLikMatrix pointwise_loglik(const PosteriorDraws& draws, const ModelSpec& model) {
  detail::check_draws_match(draws, model);
  return detail::loglik_block(draws, model, 0, model.rows());
}

inline LooResult psis_loo(const LogLikMatrix& loglik, std::uint64_t fingerprint = 0) {
  LooResult r;
  r.fingerprint = fingerprint;
  for (Eigen::Index i = 0; i < loglik.cols(); ++i) {
    const auto p = detail::loo_column(loglik.col(i));
    r.pointwise_elpd.push_back(p.elpd);
    r.pareto_k.push_back(p.k);
    r.lpd += p.lpd;
  }
  detail::finish(r);
  return r;
}

/// PSIS-LOO straight from draws, building the log-likelihood in column
/// blocks so the full S x N matrix never exists at once.
inline LooResult psis_loo(const PosteriorDraws& draws, const ModelSpec& model, Eigen::Index block = 256) {
  detail::check_draws_match(draws, model);
  LooResult r;
  r.fingerprint = dataset_fingerprint(model);
  for (Eigen::Index begin = 0; begin < model.rows(); begin += block) {
    const Eigen::Index end = std::min(model.rows(), begin + block);
    const Eigen::MatrixXd ll = detail::loglik_block(draws, model, begin, end);
    for (Eigen::Index c = 0; c < ll.cols(); ++c) {
      const auto p = detail::loo_column(ll.col(c));
      r.pointwise_elpd.push_back(p.elpd);
      r.pareto_k.push_back(p.k);
      r.lpd += p.lpd;
    }
  }
  detail::finish(r);
  return r;
}

struct ComparisonRow {
  std::string model;
  double elpd_loo = 0.0;
  double elpd_diff = 0.0;
  double se_diff = 0.0;
};

using LooComparison = std::vector<ComparisonRow>;

/// Best model first with (0, 0); others by decreasing elpd. elpd_diff is the
/// sum of pointwise differences against the best model.
inline LooComparison compare(const std::vector<std::pair<std::string, LooResult>>& results) {
  if (results.empty()) return {};
  for (const auto& [name, r] : results) {
    if (r.fingerprint != results.front().second.fingerprint || r.size() != results.front().second.size()) {
      throw Error(ErrorCode::DatasetMismatch, "model '" + name + "' was evaluated on a different dataset than '" +
                                                  results.front().first + "'");
    }
  }
  std::vector<std::size_t> order(results.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return results[a].second.elpd_loo > results[b].second.elpd_loo; });

  const LooResult& best = results[order.front()].second;
  LooComparison rows;
  for (std::size_t idx : order) {
    const auto& [name, r] = results[idx];
    ComparisonRow row{name, r.elpd_loo, 0.0, 0.0};
    if (idx != order.front()) {
      std::vector<double> diff(r.size());
      for (std::size_t i = 0; i < r.size(); ++i) diff[i] = r.pointwise_elpd[i] - best.pointwise_elpd[i];
      row.elpd_diff = std::accumulate(diff.begin(), diff.end(), 0.0);
      row.se_diff = detail::se_of_sum(diff);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline nlohmann::json loo_json(const LooResult& r) {
  nlohmann::json k = nlohmann::json::array();
  for (double v : r.pareto_k) k.push_back(std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr));
  return nlohmann::json{{"elpd_loo", r.elpd_loo},     {"se_elpd", r.se_elpd},   {"p_loo", r.p_loo()},
                        {"n_high_k", r.n_high_k},     {"n", r.size()},          {"fingerprint", r.fingerprint},
                        {"pointwise_elpd", r.pointwise_elpd}, {"pareto_k", k}};
}

inline nlohmann::json comparison_json(const LooComparison& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"model", r.model}, {"elpd_diff", r.elpd_diff}, {"se_diff", r.se_diff}, {"elpd_loo", r.elpd_loo}});
  }
  return arr;
}

inline void render_comparison(const LooComparison& rows, std::ostream& out) {
  std::size_t width = 5;
  for (const auto& r : rows) width = std::max(width, r.model.size());
  out << std::left << std::setw(static_cast<int>(width)) << "Model" << std::right << std::setw(12) << "elpd_diff"
      << std::setw(10) << "se_diff" << '\n';
  for (const auto& r : rows) {
    std::ostringstream d, s;
    d << std::fixed << std::setprecision(1) << r.elpd_diff;
    s << std::fixed << std::setprecision(1) << r.se_diff;
    out << std::left << std::setw(static_cast<int>(width)) << r.model << std::right << std::setw(12) << d.str()
        << std::setw(10) << s.str() << '\n';
  }
}

/// Brute-force leave-one-out: refit without row i, score row i by its log
/// mean predictive density. One entry per observation.
inline std::vector<double> exact_loo_pointwise(const ModelSpec& model, const SamplerConfig& config,
                                               unsigned threads = 0) {
  if (model.rows() > 500) {
    throw Error(ErrorCode::TooLarge, "exact LOO refits once per row; " + std::to_string(model.rows()) +
                                         " rows exceeds the limit of 500");
  }
  const auto n = model.rows();
  const auto k = model.slopes();
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::MatrixXd x(n - 1, k);
    Eigen::VectorXd y(n - 1);
    for (Eigen::Index r = 0, w = 0; r < n; ++r) {
      if (r == i) continue;
      x.row(w) = model.x().row(r);
      y(w) = model.y()(r);
      ++w;
    }
    const ModelSpec sub(model.link(), model.prior(), x, y);
    const PosteriorDraws draws = sample(sub, config, {}, threads);
    const Eigen::Index s_count = static_cast<Eigen::Index>(draws.total_draws());
    Eigen::VectorXd ll(s_count);
    const bool yi = model.y()(i) > 0.5;
    for (Eigen::Index s = 0; s < s_count; ++s) {
      const Eigen::VectorXd q = draws.draw(static_cast<std::size_t>(s));
      const double eta = q(0) + model.x().row(i).dot(q.tail(k));
      ll(s) = bernoulli_log_density(model.link(), eta, yi);
    }
    out.push_back(detail::log_sum_exp(ll) - std::log(static_cast<double>(s_count)));
  }
  return out;
}

inline double exact_loo(const ModelSpec& model, const SamplerConfig& config, unsigned threads = 0) {
  const auto pw = exact_loo_pointwise(model, config, threads);
  return std::accumulate(pw.begin(), pw.end(), 0.0);
}

}  // namespace bayesbin
