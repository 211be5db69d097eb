#pragma once

// Synthetic data for tests and self-checks: small regression instances and
// a stand-in for the bank-marketing table (same columns and level sets,
// outcome drawn from a known logit model, about 11% positives).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dataset.hpp"
#include "links.hpp"
#include "random.hpp"

namespace bayesbin {

struct SyntheticProblem {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd beta;  // intercept first
};

/// n rows, k standard-normal predictors, outcome from the given link.
inline SyntheticProblem synthetic_regression(std::size_t n, std::size_t k, LinkKind link, std::uint64_t seed,
                                             double coef_scale = 1.0) {
  Engine eng = make_engine(seed, StreamTag::Synthetic, 0);
  SyntheticProblem p;
  const auto rows = static_cast<Eigen::Index>(n);
  const auto cols = static_cast<Eigen::Index>(k);
  p.beta.resize(cols + 1);
  for (Eigen::Index j = 0; j <= cols; ++j) p.beta(j) = coef_scale * uniform(eng, -1.0, 1.0);
  p.x.resize(rows, cols);
  p.y.resize(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    double eta = p.beta(0);
    for (Eigen::Index j = 0; j < cols; ++j) {
      p.x(i, j) = standard_normal(eng);
      eta += p.x(i, j) * p.beta(j + 1);
    }
    p.y(i) = uniform01(eng) < inverse_link(link, eta) ? 1.0 : 0.0;
  }
  return p;
}

namespace detail {

struct CategoricalSpec {
  const char* name;
  std::vector<std::string> levels;  // sorted
  std::vector<double> weights;      // sampling weights
  double effect;                    // per code step, on the logit scale
};

struct NumericSpec {
  const char* name;
  double mean, sd, lo, hi;
  double effect;  // per sd
  double step;    // rounding grain, 0 = none
  bool skewed = false;  // lognormal with the given mean and sd
};

inline std::size_t weighted_index(Engine& eng, const std::vector<double>& w) {
  double total = 0.0;
  for (double v : w) total += v;
  double u = uniform01(eng) * total;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (u < w[i]) return i;
    u -= w[i];
  }
  return w.size() - 1;
}

}  // namespace detail

/// Bank-marketing-shaped table. Coefficient signs: default, contact, month and
/// nr.employed negative; age, marital, education and duration positive.
inline RecordTable synthetic_bank(std::size_t n, std::uint64_t seed) {
  using detail::CategoricalSpec;
  using detail::NumericSpec;
  static const std::vector<CategoricalSpec> cats = {
      {"job",
       {"admin.", "blue-collar", "entrepreneur", "housemaid", "management", "retired", "self-employed", "services",
        "student", "technician", "unemployed", "unknown"},
       {25, 22, 4, 3, 7, 4, 3, 10, 2, 16, 2, 1},
       0.02},
      {"marital", {"divorced", "married", "single", "unknown"}, {11, 60, 28, 1}, 0.25},
      {"education",
       {"basic.4y", "basic.6y", "basic.9y", "high.school", "illiterate", "professional.course", "university.degree",
        "unknown"},
       {10, 6, 15, 23, 1, 13, 29, 4},
       0.08},
      {"default", {"no", "unknown", "yes"}, {79, 20, 1}, -0.6},
      {"housing", {"no", "unknown", "yes"}, {45, 3, 52}, 0.0},
      {"loan", {"no", "unknown", "yes"}, {82, 3, 15}, 0.0},
      {"contact", {"cellular", "telephone"}, {63, 37}, -0.9},
      {"month",
       {"apr", "aug", "dec", "jul", "jun", "mar", "may", "nov", "oct", "sep"},
       {6, 15, 1, 17, 13, 1, 33, 10, 2, 2},
       -0.08},
      {"day_of_week", {"fri", "mon", "thu", "tue", "wed"}, {19, 21, 21, 20, 19}, 0.0},
      {"poutcome", {"failure", "nonexistent", "success"}, {10, 86, 4}, 0.3},
  };
  static const std::vector<NumericSpec> nums = {
      {"age", 40.0, 10.4, 17.0, 98.0, 0.15, 1.0},
      {"duration", 258.0, 259.0, 0.0, 4918.0, 1.2, 1.0, true},
      {"campaign", 2.6, 2.8, 1.0, 56.0, -0.1, 1.0},
      {"pdays", 962.0, 187.0, 0.0, 999.0, 0.0, 1.0},
      {"previous", 0.17, 0.5, 0.0, 7.0, 0.0, 1.0},
      {"emp.var.rate", 0.08, 1.57, -3.4, 1.4, 0.0, 0.1},
      {"cons.price.idx", 93.58, 0.58, 92.2, 94.77, 0.0, 0.001},
      {"cons.conf.idx", -40.5, 4.6, -50.8, -26.9, 0.0, 0.1},
      {"euribor3m", 3.62, 1.73, 0.63, 5.05, 0.0, 0.001},
      {"nr.employed", 5167.0, 72.3, 4963.6, 5228.1, -0.8, 0.1},
  };

  Engine eng = make_engine(seed, StreamTag::Synthetic, 1);
  RecordTable t = empty_table();
  auto column = [&](const char* name) -> Column& {
    for (auto& c : t.columns) {
      if (c.name == name) return c;
    }
    throw Error(ErrorCode::UnknownColumn, name);
  };
  for (std::size_t r = 0; r < n; ++r) {
    double eta = -3.3;
    for (const auto& c : cats) {
      const std::size_t code = detail::weighted_index(eng, c.weights);
      column(c.name).levels.push_back(c.levels[code]);
      const double centre = 0.5 * static_cast<double>(c.levels.size() - 1);
      eta += c.effect * (static_cast<double>(code) - centre);
    }
    for (const auto& s : nums) {
      double z = standard_normal(eng);
      double v = s.mean + s.sd * z;
      if (s.skewed) {
        const double s2 = std::log1p((s.sd / s.mean) * (s.sd / s.mean));
        v = std::exp(std::log(s.mean) - 0.5 * s2 + std::sqrt(s2) * z);
      }
      v = std::clamp(v, s.lo, s.hi);
      if (s.step > 0.0) {
        // round through decimal text so the file holds short literals
        const int decimals = static_cast<int>(std::lround(-std::log10(s.step)));
        std::ostringstream txt;
        txt << std::fixed << std::setprecision(std::max(decimals, 0)) << std::round(v / s.step) * s.step;
        v = std::stod(txt.str());
      }
      column(s.name).numbers.push_back(v);
      eta += s.effect * (v - s.mean) / s.sd;
    }
    t.target.push_back(uniform01(eng) < logit_link(eta) ? 1 : 0);
    t.provenance.push_back(r);
  }
  return t;
}

}  // namespace bayesbin
