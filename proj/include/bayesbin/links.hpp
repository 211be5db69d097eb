#pragma once

// Inverse link functions and the stable log-probability forms the likelihood needs.

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>

#include "error.hpp"

namespace bayesbin {

enum class LinkKind { Logit, Probit };

inline std::string_view to_string(LinkKind link) {
  return link == LinkKind::Logit ? "logit" : "probit";
}

inline LinkKind parse_link(std::string_view s) {
  if (s == "logit") return LinkKind::Logit;
  if (s == "probit") return LinkKind::Probit;
  throw Error(ErrorCode::InvalidArgument, "link must be logit or probit, got '" + std::string(s) + "'");
}

/// log(1 + exp(x)) without overflow.
inline double log1p_exp(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double logit_link(double eta) {
  if (eta < 0.0) {
    const double e = std::exp(eta);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(-eta));
}

/// Standard normal CDF.
inline double probit_link(double eta) {
  constexpr double lo = std::numeric_limits<double>::min();
  constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2;
  const double p = 0.5 * std::erfc(-eta / std::numbers::sqrt2);
  return p < lo ? lo : (p > hi ? hi : p);
}

inline double inverse_link(LinkKind link, double eta) {
  return link == LinkKind::Logit ? logit_link(eta) : probit_link(eta);
}

inline double log_normal_pdf(double x) {
  return -0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi);
}

/// log Phi(x). erfc keeps full relative precision down to x ~ -37; below
/// that the asymptotic tail series is accurate to well under 1 ulp.
inline double log_normal_cdf(double x) {
  if (x > 5.0) return std::log1p(-0.5 * std::erfc(x / std::numbers::sqrt2));
  if (x > -37.0) return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
  const double r = 1.0 / (x * x);
  const double series = 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r * (1.0 - 9.0 * r))));
  return log_normal_pdf(x) - std::log(-x) + std::log(series);
}

/// d/dx log Phi(x) = phi(x) / Phi(x), the inverse Mills ratio.
inline double normal_hazard(double x) {
  return std::exp(log_normal_pdf(x) - log_normal_cdf(x));
}

/// log p(y | eta) for y in {0, 1}; writes d/d eta to `deta` when non-null.
inline double bernoulli_log_density(LinkKind link, double eta, bool y, double* deta = nullptr) {
  if (link == LinkKind::Logit) {
    if (deta) *deta = (y ? 1.0 : 0.0) - logit_link(eta);
    return y ? -log1p_exp(-eta) : -log1p_exp(eta);
  }
  if (y) {
    if (deta) *deta = normal_hazard(eta);
    return log_normal_cdf(eta);
  }
  if (deta) *deta = -normal_hazard(-eta);
  return log_normal_cdf(-eta);
}

}  // namespace bayesbin
