#pragma once

// Posterior summaries and convergence diagnostics: split rank-normalized
// R-hat and bulk/tail effective sample size.
//
// REFERENCE: Vehtari, A., Gelman, A., Simpson, D., Carpenter, B. and Buerkner,
// P.-C., 2021. Rank-normalization, folding, and localization: an improved
// R-hat for assessing convergence of MCMC. Bayesian Analysis 16(2).

#include <algorithm>
#include <cmath>
#include <complex>
#include <iomanip>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/special_functions/erf.hpp>
#include <nlohmann/json.hpp>

#include "error.hpp"
#include "sampler.hpp"

namespace bayesbin {

/// Draws of one parameter, one vector per chain.
using ChainDraws = std::vector<std::vector<double>>;

/// Empirical quantile, linear interpolation at index (n - 1) p of the sorted sample.
inline double quantile(std::vector<double> samples, double p) {
  if (samples.empty()) throw Error(ErrorCode::EmptyInput, "quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "quantile probability outside [0, 1]");
  std::sort(samples.begin(), samples.end());
  const double h = static_cast<double>(samples.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, samples.size() - 1);
  return samples[lo] + (h - static_cast<double>(lo)) * (samples[hi] - samples[lo]);
}

inline double normal_quantile(double p) {
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

namespace detail {

inline void check_draws(const ChainDraws& draws) {
  if (draws.empty()) throw Error(ErrorCode::TooFewDraws, "no chains");
  const std::size_t n = draws.front().size();
  for (const auto& c : draws) {
    if (c.size() != n) throw Error(ErrorCode::DimensionMismatch, "chains have different lengths");
  }
  if (n < 4) throw Error(ErrorCode::TooFewDraws, "need at least 4 draws per chain, got " + std::to_string(n));
}

inline bool all_identical(const ChainDraws& draws) {
  const double first = draws.front().front();
  for (const auto& c : draws) {
    for (double v : c) {
      if (v != first) return false;
    }
  }
  return true;
}

/// Each chain cut into halves; for odd lengths the middle draw is dropped.
inline ChainDraws split_chains(const ChainDraws& draws) {
  ChainDraws out;
  for (const auto& c : draws) {
    const std::size_t half = c.size() / 2;
    out.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(half));
    out.emplace_back(c.end() - static_cast<std::ptrdiff_t>(half), c.end());
  }
  return out;
}

/// Pooled average ranks mapped through the normal quantile at (r - 3/8) / (S + 1/4).
inline ChainDraws rank_normalize(const ChainDraws& draws) {
  std::vector<std::pair<double, std::size_t>> flat;
  for (std::size_t c = 0; c < draws.size(); ++c) {
    for (double v : draws[c]) flat.emplace_back(v, flat.size());
  }
  const std::size_t total = flat.size();
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return flat[a].first < flat[b].first; });
  std::vector<double> rank(total);
  for (std::size_t i = 0; i < total;) {
    std::size_t j = i;
    while (j + 1 < total && flat[order[j + 1]].first == flat[order[i]].first) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based average rank
    for (std::size_t t = i; t <= j; ++t) rank[order[t]] = avg;
    i = j + 1;
  }
  ChainDraws out = draws;
  std::size_t idx = 0;
  const double s = static_cast<double>(total);
  for (auto& c : out) {
    for (double& v : c) v = normal_quantile((rank[idx++] - 0.375) / (s + 0.25));
  }
  return out;
}

inline double median_of(const ChainDraws& draws) {
  std::vector<double> all;
  for (const auto& c : draws) all.insert(all.end(), c.begin(), c.end());
  return quantile(std::move(all), 0.5);
}

inline ChainDraws fold(const ChainDraws& draws) {
  const double med = median_of(draws);
  ChainDraws out = draws;
  for (auto& c : out) {
    for (double& v : c) v = std::abs(v - med);
  }
  return out;
}

inline ChainDraws indicator_below(const ChainDraws& draws, double threshold) {
  ChainDraws out = draws;
  for (auto& c : out) {
    for (double& v : c) v = v <= threshold ? 1.0 : 0.0;
  }
  return out;
}

inline double mean_of(const std::vector<double>& x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

inline double variance_of(const std::vector<double>& x) {
  const double m = mean_of(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

/// sqrt(((n-1)/n W + B/n) / W) with B = n * var(chain means).
inline double rhat_basic(const ChainDraws& chains) {
  const double n = static_cast<double>(chains.front().size());
  std::vector<double> means, vars;
  for (const auto& c : chains) {
    means.push_back(mean_of(c));
    vars.push_back(variance_of(c));
  }
  const double w = mean_of(vars);
  const double b = chains.size() > 1 ? n * variance_of(means) : 0.0;
  return std::sqrt(((n - 1.0) / n * w + b / n) / w);
}

/// Biased (1/N) autocovariance at lags 0..N-1 by direct summation.
inline std::vector<double> autocovariance_direct(const std::vector<double>& x) {
  const std::size_t n = x.size();
  const double m = mean_of(x);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] - m;
  std::vector<double> acov(n, 0.0);
  for (std::size_t lag = 0; lag < n; ++lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += y[i] * y[i + lag];
    acov[lag] = s / static_cast<double>(n);
  }
  return acov;
}

inline void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        const auto u = a[i + j];
        const auto v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    for (auto& v : a) v /= static_cast<double>(n);
  }
}

/// Same quantity as autocovariance_direct via a zero-padded FFT.
inline std::vector<double> autocovariance_fft(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::size_t m = 1;
  while (m < 2 * n) m <<= 1;
  const double mean = mean_of(x);
  std::vector<std::complex<double>> a(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) a[i] = x[i] - mean;
  fft_inplace(a, false);
  for (auto& v : a) v = std::norm(v);
  fft_inplace(a, true);
  std::vector<double> acov(n);
  for (std::size_t i = 0; i < n; ++i) acov[i] = a[i].real() / static_cast<double>(n);
  return acov;
}

enum class AutocovMethod { Auto, Direct, Fft };

/// Autocorrelation-sum ESS over the given chains, with Geyer's initial
/// positive/monotone sequence truncation and the antithetic floor
/// tau >= 1 / log10(S).
inline double ess_from_chains(const ChainDraws& chains, AutocovMethod method = AutocovMethod::Auto) {
  const std::size_t m = chains.size();
  const std::size_t n = chains.front().size();
  std::vector<std::vector<double>> acov(m);
  std::vector<double> chain_mean(m), chain_var(m);
  for (std::size_t c = 0; c < m; ++c) {
    const bool fft = method == AutocovMethod::Fft || (method == AutocovMethod::Auto && n > 2048);
    acov[c] = fft ? autocovariance_fft(chains[c]) : autocovariance_direct(chains[c]);
    chain_mean[c] = mean_of(chains[c]);
    chain_var[c] = acov[c][0] * static_cast<double>(n) / static_cast<double>(n - 1);
  }
  const double mean_var = mean_of(chain_var);
  double var_plus = mean_var * static_cast<double>(n - 1) / static_cast<double>(n);
  if (m > 1) var_plus += variance_of(chain_mean);
  if (!(var_plus > 0.0)) return std::numeric_limits<double>::quiet_NaN();

  auto rho_at = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t c = 0; c < m; ++c) s += acov[c][lag];
    return 1.0 - (mean_var - s / static_cast<double>(m)) / var_plus;
  };

  std::vector<double> rho(n, 0.0);
  std::size_t t = 0;
  double rho_even = 1.0;
  rho[0] = rho_even;
  double rho_odd = rho_at(1);
  rho[1] = rho_odd;
  while (t + 5 < n && !std::isnan(rho_even + rho_odd) && rho_even + rho_odd > 0.0) {
    t += 2;
    rho_even = rho_at(t);
    rho_odd = rho_at(t + 1);
    if (rho_even + rho_odd >= 0.0) {
      rho[t] = rho_even;
      rho[t + 1] = rho_odd;
    }
  }
  const std::size_t max_t = t;
  if (rho_even > 0.0) rho[max_t] = rho_even;

  t = 0;
  while (t + 4 <= max_t) {
    t += 2;
    if (rho[t] + rho[t + 1] > rho[t - 2] + rho[t - 1]) {
      rho[t] = 0.5 * (rho[t - 2] + rho[t - 1]);
      rho[t + 1] = rho[t];
    }
  }

  const double total = static_cast<double>(m * n);
  double tau = -1.0 + rho[max_t];
  for (std::size_t i = 0; i < max_t; ++i) tau += 2.0 * rho[i];
  tau = std::max(tau, 1.0 / std::log10(total));
  return total / tau;
}

inline std::size_t total_count(const ChainDraws& draws) {
  std::size_t s = 0;
  for (const auto& c : draws) s += c.size();
  return s;
}

inline double cap_ess(double ess, const ChainDraws& draws) {
  if (std::isnan(ess)) return ess;
  return std::min(ess, 2.0 * static_cast<double>(total_count(draws)));
}

}  // namespace detail

/// max of the bulk (rank-normalized split) and tail (folded) R-hat. NaN when
/// every draw is identical.
inline double split_rhat(const ChainDraws& draws) {
  detail::check_draws(draws);
  if (detail::all_identical(draws)) return std::numeric_limits<double>::quiet_NaN();
  const double bulk = detail::rhat_basic(detail::rank_normalize(detail::split_chains(draws)));
  const double tail = detail::rhat_basic(detail::rank_normalize(detail::split_chains(detail::fold(draws))));
  return std::max(bulk, tail);
}

inline double ess_bulk(const ChainDraws& draws, detail::AutocovMethod method = detail::AutocovMethod::Auto) {
  detail::check_draws(draws);
  if (detail::all_identical(draws)) return std::numeric_limits<double>::quiet_NaN();
  return detail::cap_ess(detail::ess_from_chains(detail::rank_normalize(detail::split_chains(draws)), method), draws);
}

/// min ESS of the indicators draw <= q05 and draw <= q95.
inline double ess_tail(const ChainDraws& draws, detail::AutocovMethod method = detail::AutocovMethod::Auto) {
  detail::check_draws(draws);
  if (detail::all_identical(draws)) return std::numeric_limits<double>::quiet_NaN();
  std::vector<double> all;
  for (const auto& c : draws) all.insert(all.end(), c.begin(), c.end());
  const double q05 = quantile(all, 0.05);
  const double q95 = quantile(all, 0.95);
  const auto split = detail::split_chains(draws);
  const double lo = detail::ess_from_chains(detail::indicator_below(split, q05), method);
  const double hi = detail::ess_from_chains(detail::indicator_below(split, q95), method);
  if (std::isnan(lo) || std::isnan(hi)) return std::numeric_limits<double>::quiet_NaN();
  return detail::cap_ess(std::min(lo, hi), draws);
}

struct ParamSummary {
  std::string name;
  double estimate = 0.0;
  double est_error = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  std::optional<double> rhat;      // empty when degenerate
  std::optional<double> ess_bulk;
  std::optional<double> ess_tail;
};

inline std::optional<double> finite_or_empty(double v) {
  return std::isfinite(v) ? std::optional<double>(v) : std::nullopt;
}

inline ParamSummary summarize_param(const std::string& name, const ChainDraws& chains) {
  ParamSummary s;
  s.name = name;
  std::vector<double> all;
  for (const auto& c : chains) all.insert(all.end(), c.begin(), c.end());
  s.estimate = detail::mean_of(all);
  s.est_error = all.size() > 1 ? std::sqrt(detail::variance_of(all)) : 0.0;
  if (detail::all_identical(chains)) s.est_error = 0.0;
  s.ci_lower = quantile(all, 0.025);
  s.ci_upper = quantile(all, 0.975);
  if (chains.front().size() >= 4) {
    s.rhat = finite_or_empty(split_rhat(chains));
    s.ess_bulk = finite_or_empty(ess_bulk(chains));
    s.ess_tail = finite_or_empty(ess_tail(chains));
  }
  return s;
}

/// One row per parameter, in parameter order.
inline std::vector<ParamSummary> summarize(const PosteriorDraws& draws) {
  std::vector<ParamSummary> out;
  for (std::size_t p = 0; p < draws.n_params; ++p) {
    out.push_back(summarize_param(draws.param_names[p], draws.chains_of(p)));
  }
  return out;
}

inline bool any_rhat_above(const std::vector<ParamSummary>& rows, double threshold) {
  return std::any_of(rows.begin(), rows.end(), [&](const auto& r) { return r.rhat && *r.rhat > threshold; });
}

inline nlohmann::json summary_json(const std::vector<ParamSummary>& rows) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back(nlohmann::json{{"variable", r.name},
                                 {"estimate", r.estimate},
                                 {"est_error", r.est_error},
                                 {"ci_lower", r.ci_lower},
                                 {"ci_upper", r.ci_upper},
                                 {"rhat", opt(r.rhat)},
                                 {"ess_bulk", opt(r.ess_bulk)},
                                 {"ess_tail", opt(r.ess_tail)}});
  }
  return arr;
}

/// Aligned text table: Variable, Estimate, Est.Error, 95% CI Lower/Upper, Rhat, ESS Bulk, ESS Tail.
inline void render_summary(const std::vector<ParamSummary>& rows, std::ostream& out) {
  std::size_t width = 8;
  for (const auto& r : rows) width = std::max(width, r.name.size());
  auto fixed2 = [](double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << v;
    auto str = s.str();
    return str == "-0.00" ? std::string("0.00") : str;
  };
  auto rounded = [](const std::optional<double>& v) {
    return v ? std::to_string(static_cast<long long>(std::llround(*v))) : std::string("NA");
  };
  out << std::left << std::setw(static_cast<int>(width)) << "Variable" << std::right << std::setw(10) << "Estimate"
      << std::setw(11) << "Est.Error" << std::setw(14) << "95% CI Lower" << std::setw(14) << "95% CI Upper"
      << std::setw(7) << "Rhat" << std::setw(10) << "ESS Bulk" << std::setw(10) << "ESS Tail" << '\n';
  for (const auto& r : rows) {
    out << std::left << std::setw(static_cast<int>(width)) << r.name << std::right << std::setw(10)
        << fixed2(r.estimate) << std::setw(11) << fixed2(r.est_error) << std::setw(14) << fixed2(r.ci_lower)
        << std::setw(14) << fixed2(r.ci_upper) << std::setw(7) << (r.rhat ? fixed2(*r.rhat) : "NA")
        << std::setw(10) << rounded(r.ess_bulk) << std::setw(10) << rounded(r.ess_tail) << '\n';
  }
}

}  // namespace bayesbin
