#pragma once

// Record table -> numeric design matrix. Categorical columns become a single
// integer-coded column (levels sorted, codes 1..L); optionally every column is
// standardized to mean 0 / sd 1. The metadata is enough to encode new rows
// identically.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "dataset.hpp"
#include "error.hpp"

namespace bayesbin {

struct ColumnEncoding {
  std::string name;
  bool categorical = false;
  std::vector<std::string> levels;  // code of levels[i] is i + 1
  double center = 0.0;
  double scale = 1.0;
  bool constant = false;  // zero sample variance; scale forced to 1

  double code_of(const std::string& level) const {
    auto it = std::lower_bound(levels.begin(), levels.end(), level);
    if (it == levels.end() || *it != level) {
      throw Error(ErrorCode::UnseenLevel, "column '" + name + "' has no level '" + level + "'");
    }
    return static_cast<double>(it - levels.begin() + 1);
  }

  friend bool operator==(const ColumnEncoding&, const ColumnEncoding&) = default;
};

struct EncodingMeta {
  std::vector<ColumnEncoding> columns;
  bool standardize = true;

  std::vector<std::string> column_names() const {
    std::vector<std::string> out;
    for (const auto& c : columns) out.push_back(c.name);
    return out;
  }

  bool any_constant() const {
    return std::any_of(columns.begin(), columns.end(), [](const auto& c) { return c.constant; });
  }

  friend bool operator==(const EncodingMeta&, const EncodingMeta&) = default;
};

inline void to_json(nlohmann::json& j, const ColumnEncoding& c) {
  j = nlohmann::json{{"name", c.name},
                     {"kind", c.categorical ? "categorical" : "numeric"},
                     {"center", c.center},
                     {"scale", c.scale},
                     {"constant", c.constant}};
  if (c.categorical) j["levels"] = c.levels;
}

inline void from_json(const nlohmann::json& j, ColumnEncoding& c) {
  j.at("name").get_to(c.name);
  c.categorical = j.at("kind").get<std::string>() == "categorical";
  j.at("center").get_to(c.center);
  j.at("scale").get_to(c.scale);
  j.at("constant").get_to(c.constant);
  c.levels.clear();
  if (c.categorical) j.at("levels").get_to(c.levels);
}

inline void to_json(nlohmann::json& j, const EncodingMeta& m) {
  j = nlohmann::json{{"standardize", m.standardize}, {"columns", m.columns}};
}

inline void from_json(const nlohmann::json& j, EncodingMeta& m) {
  j.at("standardize").get_to(m.standardize);
  j.at("columns").get_to(m.columns);
}

struct DesignMatrix {
  Eigen::MatrixXd values;  // n x k
  EncodingMeta meta;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

struct Encoded {
  DesignMatrix design;
  Eigen::VectorXd target;
};

namespace detail {

inline Eigen::MatrixXd raw_codes(const RecordTable& table, const EncodingMeta& meta) {
  const auto n = static_cast<Eigen::Index>(table.size());
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(meta.columns.size()));
  for (std::size_t j = 0; j < meta.columns.size(); ++j) {
    const ColumnEncoding& enc = meta.columns[j];
    const Column& col = table.columns[j];
    if (col.name != enc.name || col.categorical != enc.categorical) {
      throw Error(ErrorCode::EncodingMismatch, "column " + std::to_string(j) + " is '" + col.name +
                                                   "', encoding expects '" + enc.name + "'");
    }
    for (Eigen::Index r = 0; r < n; ++r) {
      const auto ur = static_cast<std::size_t>(r);
      x(r, static_cast<Eigen::Index>(j)) = enc.categorical ? enc.code_of(col.levels[ur]) : col.numbers[ur];
    }
  }
  return x;
}

inline void apply_scaling(Eigen::MatrixXd& x, const EncodingMeta& meta) {
  for (std::size_t j = 0; j < meta.columns.size(); ++j) {
    const auto& c = meta.columns[j];
    auto col = x.col(static_cast<Eigen::Index>(j));
    col = ((col.array() - c.center) / c.scale).matrix();
  }
}

}  // namespace detail

/// Builds the encoding from `table` and applies it.
inline Encoded encode(const RecordTable& table, bool standardize = true) {
  if (table.size() == 0) throw Error(ErrorCode::EmptyTable, "cannot encode an empty table");

  EncodingMeta meta;
  meta.standardize = standardize;
  for (const Column& col : table.columns) {
    ColumnEncoding enc;
    enc.name = col.name;
    enc.categorical = col.categorical;
    if (col.categorical) {
      enc.levels = col.levels;
      std::sort(enc.levels.begin(), enc.levels.end());
      enc.levels.erase(std::unique(enc.levels.begin(), enc.levels.end()), enc.levels.end());
    }
    meta.columns.push_back(std::move(enc));
  }

  Encoded out;
  out.design.values = detail::raw_codes(table, meta);
  if (standardize) {
    const double n = static_cast<double>(table.size());
    for (std::size_t j = 0; j < meta.columns.size(); ++j) {
      auto col = out.design.values.col(static_cast<Eigen::Index>(j));
      const double mean = col.mean();
      const double ss = (col.array() - mean).square().sum();
      const double sd = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
      auto& c = meta.columns[j];
      c.center = mean;
      if (sd > 0.0 && std::isfinite(sd)) {
        c.scale = sd;
      } else {
        c.scale = 1.0;
        c.constant = true;
      }
    }
    detail::apply_scaling(out.design.values, meta);
  }
  out.design.meta = std::move(meta);

  out.target.resize(static_cast<Eigen::Index>(table.size()));
  for (std::size_t r = 0; r < table.size(); ++r) out.target(static_cast<Eigen::Index>(r)) = table.target[r];
  return out;
}

/// Encodes new rows with an existing encoding (no refitting of levels or scales).
inline DesignMatrix apply_encoding(const RecordTable& table, const EncodingMeta& meta) {
  DesignMatrix d;
  if (table.columns.size() != meta.columns.size()) {
    throw Error(ErrorCode::EncodingMismatch, "table has " + std::to_string(table.columns.size()) +
                                                 " columns, encoding has " + std::to_string(meta.columns.size()));
  }
  d.values = detail::raw_codes(table, meta);
  if (meta.standardize) detail::apply_scaling(d.values, meta);
  d.meta = meta;
  return d;
}

inline Eigen::VectorXd target_vector(const RecordTable& table) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(table.size()));
  for (std::size_t r = 0; r < table.size(); ++r) y(static_cast<Eigen::Index>(r)) = table.target[r];
  return y;
}

/// Level string behind an integer code.
inline const std::string& decode_level(const ColumnEncoding& enc, int code) {
  if (!enc.categorical || code < 1 || static_cast<std::size_t>(code) > enc.levels.size()) {
    throw Error(ErrorCode::InvalidArgument, "code " + std::to_string(code) + " is not valid for '" + enc.name + "'");
  }
  return enc.levels[static_cast<std::size_t>(code - 1)];
}

}  // namespace bayesbin
