#pragma once

// Bernoulli GLM with logit/probit link and independent normal priors; the
// unnormalized log posterior and its exact gradient.

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "error.hpp"
#include "links.hpp"

namespace bayesbin {

struct PriorSpec {
  double intercept_mean = 0.0;
  double intercept_sd = 1.0;
  double slope_mean = 0.0;
  double slope_sd = 1.0;

  void validate() const {
    if (!(intercept_sd > 0.0) || !(slope_sd > 0.0) || !std::isfinite(intercept_sd) || !std::isfinite(slope_sd) ||
        !std::isfinite(intercept_mean) || !std::isfinite(slope_mean)) {
      throw Error(ErrorCode::InvalidArgument, "prior means must be finite and sds strictly positive");
    }
  }

  friend bool operator==(const PriorSpec&, const PriorSpec&) = default;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(PriorSpec, intercept_mean, intercept_sd, slope_mean, slope_sd)

/// Logit: intercept N(3.5, 1), slopes N(0, 0.5). Probit: intercept N(0, 5), slopes N(0, 2).
inline PriorSpec default_priors(LinkKind link) {
  if (link == LinkKind::Logit) return PriorSpec{3.5, 1.0, 0.0, 0.5};
  return PriorSpec{0.0, 5.0, 0.0, 2.0};
}

struct Coefficients {
  double intercept = 0.0;
  Eigen::VectorXd slopes;

  /// [intercept, slopes...]
  Eigen::VectorXd flat() const {
    Eigen::VectorXd q(slopes.size() + 1);
    q(0) = intercept;
    q.tail(slopes.size()) = slopes;
    return q;
  }

  static Coefficients from_flat(const Eigen::VectorXd& q) {
    return Coefficients{q(0), q.tail(q.size() - 1)};
  }
};

/// Read-only view of a dataset plus link and prior. Holds references: the
/// design and target must outlive it.
class ModelSpec {
 public:
  ModelSpec(LinkKind link, PriorSpec prior, const Eigen::MatrixXd& x, const Eigen::VectorXd& y)
      : link_(link), prior_(prior), x_(&x), y_(&y) {
    prior_.validate();
    if (x.rows() != y.size()) {
      throw Error(ErrorCode::DimensionMismatch, "design has " + std::to_string(x.rows()) + " rows, target has " +
                                                    std::to_string(y.size()));
    }
  }
  ModelSpec(LinkKind, PriorSpec, Eigen::MatrixXd&&, const Eigen::VectorXd&) = delete;
  ModelSpec(LinkKind, PriorSpec, const Eigen::MatrixXd&, Eigen::VectorXd&&) = delete;

  LinkKind link() const { return link_; }
  const PriorSpec& prior() const { return prior_; }
  const Eigen::MatrixXd& x() const { return *x_; }
  const Eigen::VectorXd& y() const { return *y_; }
  Eigen::Index rows() const { return x_->rows(); }
  Eigen::Index slopes() const { return x_->cols(); }

  /// Number of sampled parameters (intercept + slopes).
  Eigen::Index dim() const { return x_->cols() + 1; }

  double log_density_gradient(const Eigen::VectorXd& q, Eigen::VectorXd& grad) const;

 private:
  LinkKind link_;
  PriorSpec prior_;
  const Eigen::MatrixXd* x_;
  const Eigen::VectorXd* y_;
};

namespace detail {

inline void check_dims(const Eigen::VectorXd& q, const ModelSpec& model) {
  if (q.size() != model.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "coefficient vector has " + std::to_string(q.size()) +
                                                  " entries, model needs " + std::to_string(model.dim()));
  }
}

inline double normal_log_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

/// Sum of per-row log densities; fills d(loglik)/d(eta_i) into `deta` when non-null.
inline double likelihood_sum(const Eigen::VectorXd& q, const ModelSpec& model, Eigen::VectorXd* deta) {
  const auto k = model.slopes();
  Eigen::VectorXd eta = model.x() * q.tail(k);
  eta.array() += q(0);
  if (deta) deta->resize(model.rows());
  double sum = 0.0;
  for (Eigen::Index i = 0; i < model.rows(); ++i) {
    double d = 0.0;
    sum += bernoulli_log_density(model.link(), eta(i), model.y()(i) > 0.5, deta ? &d : nullptr);
    if (deta) (*deta)(i) = d;
  }
  return sum;
}

inline double prior_sum(const Eigen::VectorXd& q, const PriorSpec& prior) {
  double sum = normal_log_pdf(q(0), prior.intercept_mean, prior.intercept_sd);
  for (Eigen::Index j = 1; j < q.size(); ++j) sum += normal_log_pdf(q(j), prior.slope_mean, prior.slope_sd);
  return sum;
}

}  // namespace detail

inline double log_likelihood(const Coefficients& beta, const ModelSpec& model) {
  const Eigen::VectorXd q = beta.flat();
  detail::check_dims(q, model);
  return detail::likelihood_sum(q, model, nullptr);
}

inline double log_prior(const Coefficients& beta, const PriorSpec& prior) {
  return detail::prior_sum(beta.flat(), prior);
}

struct ValueAndGradient {
  double value = 0.0;
  Eigen::VectorXd gradient;
};

inline double ModelSpec::log_density_gradient(const Eigen::VectorXd& q, Eigen::VectorXd& grad) const {
  detail::check_dims(q, *this);
  Eigen::VectorXd deta;
  const double ll = detail::likelihood_sum(q, *this, &deta);
  const double lp = detail::prior_sum(q, prior_);
  grad.resize(dim());
  grad(0) = deta.sum() - (q(0) - prior_.intercept_mean) / (prior_.intercept_sd * prior_.intercept_sd);
  grad.tail(slopes()) = x_->transpose() * deta;
  grad.tail(slopes()).array() -= (q.tail(slopes()).array() - prior_.slope_mean) / (prior_.slope_sd * prior_.slope_sd);
  return ll + lp;
}

/// Unnormalized log posterior and its gradient with respect to [intercept, slopes].
inline ValueAndGradient log_posterior_and_gradient(const Coefficients& beta, const ModelSpec& model) {
  ValueAndGradient out;
  out.value = model.log_density_gradient(beta.flat(), out.gradient);
  return out;
}

}  // namespace bayesbin
