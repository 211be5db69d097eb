#pragma once

// Brute-force reference computations used to check the sampler, the
// gradients and PSIS-LOO. Deliberately naive: plain loops over rows and
// grid points, nothing shared with the code paths they check.

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "model.hpp"

namespace bayesbin::oracle {

/// Sum by recursive halving; the summation order depends only on the length.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

/// Direct evaluation of the Bernoulli log likelihood plus normal log prior.
inline double naive_log_posterior(const ModelSpec& model, const Eigen::VectorXd& beta) {
  const double two_pi = 6.283185307179586;
  double total = 0.0;
  for (Eigen::Index i = 0; i < model.rows(); ++i) {
    double eta = beta(0);
    for (Eigen::Index j = 0; j < model.slopes(); ++j) eta += model.x()(i, j) * beta(j + 1);
    double p;
    if (model.link() == LinkKind::Logit) {
      p = 1.0 / (1.0 + std::exp(-eta));
    } else {
      p = 0.5 * std::erfc(-eta / std::sqrt(2.0));
    }
    total += model.y()(i) > 0.5 ? std::log(p) : std::log(1.0 - p);
  }
  const PriorSpec& pr = model.prior();
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    const double mu = j == 0 ? pr.intercept_mean : pr.slope_mean;
    const double sd = j == 0 ? pr.intercept_sd : pr.slope_sd;
    total += -0.5 * std::log(two_pi * sd * sd) - (beta(j) - mu) * (beta(j) - mu) / (2.0 * sd * sd);
  }
  return total;
}

/// Central differences (f(b + h e_j) - f(b - h e_j)) / 2h.
inline Eigen::VectorXd finite_diff_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                            const Eigen::VectorXd& beta, double h = 1e-5) {
  Eigen::VectorXd g(beta.size());
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    Eigen::VectorXd up = beta, down = beta;
    up(j) += h;
    down(j) -= h;
    const double fu = f(up);
    const double fd = f(down);
    if (!std::isfinite(fu) || !std::isfinite(fd)) {
      throw Error(ErrorCode::NonFiniteEvaluation, "function is not finite near coordinate " + std::to_string(j));
    }
    g(j) = (fu - fd) / (2.0 * h);
  }
  return g;
}

struct GridAxis {
  double lower = -1.0;
  double upper = 1.0;
  std::size_t n_points = 101;
};

struct GridSpec {
  std::vector<GridAxis> axes;  // one per parameter, intercept first
  std::size_t max_points = 10'000'000;

  std::size_t total_points() const {
    std::size_t t = 1;
    for (const auto& a : axes) t *= a.n_points;
    return t;
  }

  void validate() const {
    for (const auto& a : axes) {
      if (a.n_points < 3) throw Error(ErrorCode::InvalidArgument, "grid axes need at least 3 points");
      if (!(a.upper > a.lower)) throw Error(ErrorCode::InvalidArgument, "grid axis upper bound must exceed lower");
    }
    if (total_points() > max_points) {
      throw Error(ErrorCode::TooLarge, "grid has " + std::to_string(total_points()) + " points");
    }
  }

  /// Same centers, each width scaled by `factor`.
  GridSpec widened(double factor) const {
    GridSpec g = *this;
    for (auto& a : g.axes) {
      const double c = 0.5 * (a.lower + a.upper);
      const double hw = 0.5 * (a.upper - a.lower) * factor;
      a.lower = c - hw;
      a.upper = c + hw;
    }
    return g;
  }
};

struct Moments {
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;
};

namespace detail {

inline Moments grid_moments_once(const ModelSpec& model, const GridSpec& grid) {
  grid.validate();
  const std::size_t d = grid.axes.size();
  const std::size_t total = grid.total_points();
  std::vector<double> logp(total);
  std::vector<Eigen::VectorXd> points(total, Eigen::VectorXd(static_cast<Eigen::Index>(d)));
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rem = idx;
    for (std::size_t a = 0; a < d; ++a) {
      const auto& ax = grid.axes[a];
      const std::size_t i = rem % ax.n_points;
      rem /= ax.n_points;
      points[idx](static_cast<Eigen::Index>(a)) =
          ax.lower + (ax.upper - ax.lower) * static_cast<double>(i) / static_cast<double>(ax.n_points - 1);
    }
    logp[idx] = naive_log_posterior(model, points[idx]);
  }
  double max_lp = -INFINITY;
  for (double v : logp) {
    if (v > max_lp) max_lp = v;
  }
  std::vector<double> w(total);
  for (std::size_t i = 0; i < total; ++i) w[i] = std::exp(logp[i] - max_lp);
  const double z = pairwise_sum(w);

  Moments m;
  m.mean.resize(static_cast<Eigen::Index>(d));
  m.sd.resize(static_cast<Eigen::Index>(d));
  std::vector<double> terms(total);
  for (std::size_t a = 0; a < d; ++a) {
    const auto ai = static_cast<Eigen::Index>(a);
    for (std::size_t i = 0; i < total; ++i) terms[i] = w[i] * points[i](ai);
    const double mean = pairwise_sum(terms) / z;
    for (std::size_t i = 0; i < total; ++i) {
      const double dev = points[i](ai) - mean;
      terms[i] = w[i] * dev * dev;
    }
    m.mean(ai) = mean;
    m.sd(ai) = std::sqrt(pairwise_sum(terms) / z);
  }
  return m;
}

}  // namespace detail

/// Posterior mean and sd by Riemann sums over a tensor grid (at most three
/// parameters). Fails with GridTooCoarse unless widening every axis by 50%
/// moves each moment by less than 1e-3.
inline Moments grid_posterior_moments(const ModelSpec& model, const GridSpec& grid) {
  if (model.dim() > 3) {
    throw Error(ErrorCode::DimensionTooHigh, "grid quadrature supports at most 3 parameters, model has " +
                                                 std::to_string(model.dim()));
  }
  if (grid.axes.size() != static_cast<std::size_t>(model.dim())) {
    throw Error(ErrorCode::DimensionMismatch, "grid has " + std::to_string(grid.axes.size()) + " axes for " +
                                                  std::to_string(model.dim()) + " parameters");
  }
  const Moments m = detail::grid_moments_once(model, grid);
  const Moments wide = detail::grid_moments_once(model, grid.widened(1.5));
  const double drift = std::max((m.mean - wide.mean).cwiseAbs().maxCoeff(), (m.sd - wide.sd).cwiseAbs().maxCoeff());
  if (!(drift < 1e-3)) {
    throw Error(ErrorCode::GridTooCoarse, "moments moved by " + std::to_string(drift) + " when the grid was widened");
  }
  return m;
}

}  // namespace bayesbin::oracle
