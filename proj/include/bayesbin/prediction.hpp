#pragma once

// Posterior predictive summaries for new rows, on the probability scale
// (distribution of pi over draws) or the outcome scale (0/1 draws from
// Bernoulli(pi)).

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "diagnostics.hpp"
#include "encoding.hpp"
#include "error.hpp"
#include "links.hpp"
#include "random.hpp"
#include "sampler.hpp"

namespace bayesbin {

enum class PredictScale { Outcome, Probability };

inline std::string_view to_string(PredictScale s) { return s == PredictScale::Outcome ? "outcome" : "probability"; }

inline PredictScale parse_scale(std::string_view s) {
  if (s == "outcome") return PredictScale::Outcome;
  if (s == "probability") return PredictScale::Probability;
  throw Error(ErrorCode::InvalidArgument, "scale must be outcome or probability");
}

struct PredictionRow {
  std::size_t index = 0;  // 1-based, as displayed
  double estimate = 0.0;
  double est_error = 0.0;
  double q2_5 = 0.0;
  double q97_5 = 0.0;
  PredictScale scale = PredictScale::Outcome;
};

namespace detail {

/// Mean, population sd (so that duplicating every draw changes nothing) and 95% interval.
inline PredictionRow describe(const std::vector<double>& v) {
  PredictionRow r;
  const double n = static_cast<double>(v.size());
  double sum = 0.0;
  for (double x : v) sum += x;
  r.estimate = sum / n;
  double ss = 0.0;
  for (double x : v) ss += (x - r.estimate) * (x - r.estimate);
  r.est_error = std::sqrt(ss / n);
  r.q2_5 = quantile(v, 0.025);
  r.q97_5 = quantile(v, 0.975);
  return r;
}

}  // namespace detail

/// One row per new observation. Draws that carry encoding metadata only
/// accept rows encoded with exactly that metadata.
inline std::vector<PredictionRow> posterior_predict(const PosteriorDraws& draws, LinkKind link,
                                                    const DesignMatrix& new_rows, PredictScale scale,
                                                    std::uint64_t seed) {
  if (draws.encoding && !(*draws.encoding == new_rows.meta)) {
    throw Error(ErrorCode::EncodingMismatch, "new rows were not encoded with the training encoding");
  }
  if (static_cast<std::size_t>(new_rows.cols()) + 1 != draws.n_params) {
    throw Error(ErrorCode::DimensionMismatch, "new rows have " + std::to_string(new_rows.cols()) +
                                                  " columns, draws have " + std::to_string(draws.n_params) +
                                                  " parameters");
  }
  const std::size_t s_count = draws.total_draws();
  const auto k = new_rows.cols();
  Eigen::MatrixXd betas(static_cast<Eigen::Index>(s_count), k);
  Eigen::VectorXd intercepts(static_cast<Eigen::Index>(s_count));
  for (std::size_t s = 0; s < s_count; ++s) {
    const Eigen::VectorXd q = draws.draw(s);
    intercepts(static_cast<Eigen::Index>(s)) = q(0);
    betas.row(static_cast<Eigen::Index>(s)) = q.tail(k).transpose();
  }

  std::vector<PredictionRow> out;
  for (Eigen::Index i = 0; i < new_rows.rows(); ++i) {
    const Eigen::VectorXd eta = betas * new_rows.values.row(i).transpose() + intercepts;
    std::vector<double> v(s_count);
    for (std::size_t s = 0; s < s_count; ++s) v[s] = inverse_link(link, eta(static_cast<Eigen::Index>(s)));
    if (scale == PredictScale::Outcome) {
      Engine eng = make_engine(seed, StreamTag::Predict, static_cast<std::uint64_t>(i));
      for (double& p : v) p = uniform01(eng) < p ? 1.0 : 0.0;
    }
    PredictionRow row = detail::describe(v);
    row.index = static_cast<std::size_t>(i) + 1;
    row.scale = scale;
    out.push_back(row);
  }
  return out;
}

inline nlohmann::json predictions_json(const std::vector<PredictionRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"index", r.index},
                   {"estimate", r.estimate},
                   {"est_error", r.est_error},
                   {"q2_5", r.q2_5},
                   {"q97_5", r.q97_5},
                   {"scale", std::string(to_string(r.scale))}});
  }
  return arr;
}

inline void render_predictions(const std::vector<PredictionRow>& rows, std::ostream& out) {
  auto fmt = [](double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(3) << v;
    std::string str = s.str();
    while (str.back() == '0') str.pop_back();
    if (str.back() == '.') str.pop_back();
    return str;
  };
  out << std::setw(4) << "" << std::setw(10) << "Estimate" << std::setw(11) << "Est.Error" << std::setw(8) << "Q2.5"
      << std::setw(8) << "Q97.5" << "  (" << (rows.empty() ? "outcome" : to_string(rows.front().scale))
      << " scale)\n";
  for (const auto& r : rows) {
    std::ostringstream e, se;
    e << std::fixed << std::setprecision(3) << r.estimate;
    se << std::fixed << std::setprecision(3) << r.est_error;
    out << std::setw(4) << r.index << std::setw(10) << e.str() << std::setw(11) << se.str() << std::setw(8)
        << fmt(r.q2_5) << std::setw(8) << fmt(r.q97_5) << '\n';
  }
}

}  // namespace bayesbin
