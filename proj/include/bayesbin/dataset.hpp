#pragma once

// Bank-marketing record tables: parsing, writing, and the seeded row
// selections used to build a balanced training set.

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "error.hpp"
#include "random.hpp"

namespace bayesbin {

inline constexpr std::size_t kFeatureCount = 20;
inline constexpr std::size_t kFieldCount = 21;

/// Column order of the public file; also the coefficient order of the fitted model.
inline constexpr std::array<std::string_view, kFieldCount> kSchema = {
    "age",      "job",          "marital",        "education",     "default",
    "housing",  "loan",         "contact",        "month",         "day_of_week",
    "duration", "campaign",     "pdays",          "previous",      "poutcome",
    "emp.var.rate", "cons.price.idx", "cons.conf.idx", "euribor3m", "nr.employed",
    "y"};

inline constexpr std::string_view kTargetColumn = "y";

inline bool is_categorical_feature(std::string_view name) {
  static constexpr std::array<std::string_view, 10> cats = {
      "job", "marital", "education", "default", "housing",
      "loan", "contact", "month", "day_of_week", "poutcome"};
  return std::find(cats.begin(), cats.end(), name) != cats.end();
}

struct Column {
  std::string name;
  bool categorical = false;
  std::vector<double> numbers;      // numeric columns
  std::vector<std::string> levels;  // categorical columns
};

/// Column-major table of the 20 features plus the 0/1 target.
struct RecordTable {
  std::vector<Column> columns;             // kFeatureCount entries, schema order
  std::vector<int> target;                 // 0 = no, 1 = yes
  std::vector<std::size_t> provenance;     // row index in the originally parsed file

  std::size_t size() const { return target.size(); }

  std::size_t positives() const {
    return static_cast<std::size_t>(std::count(target.begin(), target.end(), 1));
  }

  /// Rows in the given order (repeats allowed).
  RecordTable select(const std::vector<std::size_t>& rows) const {
    RecordTable out;
    out.columns.reserve(columns.size());
    for (const auto& c : columns) {
      Column nc{c.name, c.categorical, {}, {}};
      if (c.categorical) {
        nc.levels.reserve(rows.size());
        for (auto r : rows) nc.levels.push_back(c.levels[r]);
      } else {
        nc.numbers.reserve(rows.size());
        for (auto r : rows) nc.numbers.push_back(c.numbers[r]);
      }
      out.columns.push_back(std::move(nc));
    }
    out.target.reserve(rows.size());
    out.provenance.reserve(rows.size());
    for (auto r : rows) {
      out.target.push_back(target[r]);
      out.provenance.push_back(provenance[r]);
    }
    return out;
  }
};

inline RecordTable empty_table() {
  RecordTable t;
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    t.columns.push_back(Column{std::string(kSchema[j]), is_categorical_feature(kSchema[j]), {}, {}});
  }
  return t;
}

namespace detail {

/// Splits one delimited record. Quoted fields may contain the delimiter and "" escapes.
inline std::vector<std::string> split_record(std::string_view line, char delimiter) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == delimiter) {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace detail

/// Parses the delimited bank-marketing layout. Header names may appear in any
/// order but must be exactly the 21 schema columns.
inline RecordTable parse_dataset(std::istream& in, char delimiter = ';') {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::UnknownColumn, "missing header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  auto header = detail::split_record(line, delimiter);
  std::array<int, kFieldCount> slot{};  // schema index -> file column
  slot.fill(-1);
  for (std::size_t c = 0; c < header.size(); ++c) {
    auto name = detail::trim(header[c]);
    auto it = std::find(kSchema.begin(), kSchema.end(), name);
    if (it == kSchema.end()) {
      throw Error(ErrorCode::UnknownColumn, "unexpected column '" + std::string(name) + "'");
    }
    auto s = static_cast<std::size_t>(it - kSchema.begin());
    if (slot[s] != -1) throw Error(ErrorCode::UnknownColumn, "duplicate column '" + std::string(name) + "'");
    slot[s] = static_cast<int>(c);
  }
  for (std::size_t s = 0; s < kFieldCount; ++s) {
    if (slot[s] == -1) throw Error(ErrorCode::UnknownColumn, "missing column '" + std::string(kSchema[s]) + "'");
  }

  RecordTable table = empty_table();
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split_record(line, delimiter);
    if (fields.size() < kFieldCount) {
      throw Error(ErrorCode::MissingField, "line " + std::to_string(line_no) + " has " +
                                               std::to_string(fields.size()) + " fields, expected 21");
    }
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      std::string_view raw = detail::trim(fields[static_cast<std::size_t>(slot[j])]);
      Column& col = table.columns[j];
      if (col.categorical) {
        col.levels.emplace_back(raw);
      } else {
        auto v = detail::parse_number(raw);
        if (!v) {
          throw Error(ErrorCode::UnparseableNumber, "line " + std::to_string(line_no) + ", column '" +
                                                        col.name + "': '" + std::string(raw) + "'");
        }
        col.numbers.push_back(*v);
      }
    }
    std::string_view y = detail::trim(fields[static_cast<std::size_t>(slot[kFeatureCount])]);
    if (y == "yes") {
      table.target.push_back(1);
    } else if (y == "no") {
      table.target.push_back(0);
    } else {
      throw Error(ErrorCode::UnknownTargetLabel,
                  "line " + std::to_string(line_no) + ": '" + std::string(y) + "'");
    }
    table.provenance.push_back(table.target.size() - 1);
  }
  return table;
}

/// Writes the table in the public file layout (quoted strings, schema order).
inline void write_dataset(const RecordTable& table, std::ostream& out, char delimiter = ';') {
  for (std::size_t s = 0; s < kFieldCount; ++s) {
    if (s) out << delimiter;
    out << '"' << kSchema[s] << '"';
  }
  out << '\n';
  for (std::size_t r = 0; r < table.size(); ++r) {
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      const Column& c = table.columns[j];
      if (c.categorical) {
        out << '"' << c.levels[r] << '"';
      } else {
        out << detail::format_number(c.numbers[r]);
      }
      out << delimiter;
    }
    out << (table.target[r] ? "\"yes\"" : "\"no\"") << '\n';
  }
}

namespace detail {

/// First `n` entries of a seeded partial Fisher-Yates shuffle of [0, size).
inline std::vector<std::size_t> partial_shuffle(std::size_t size, std::size_t n, Engine& eng) {
  std::vector<std::size_t> idx(size);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < n; ++i) {
    auto j = i + static_cast<std::size_t>(uniform_index(eng, size - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(n);
  return idx;
}

}  // namespace detail

/// n rows uniformly without replacement, in draw order.
inline RecordTable subsample(const RecordTable& table, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "subsample size must be positive");
  if (n > table.size()) {
    throw Error(ErrorCode::SampleTooLarge,
                std::to_string(n) + " rows requested from a table of " + std::to_string(table.size()));
  }
  Engine eng = make_engine(seed, StreamTag::Subsample);
  return table.select(detail::partial_shuffle(table.size(), n, eng));
}

struct BalanceReport {
  std::size_t n_before = 0;
  std::size_t n_positive_before = 0;
  std::size_t n_after = 0;
  std::size_t n_positive_after = 0;
  std::vector<std::size_t> duplicated_indices;  // input rows copied, in append order
  std::uint64_t seed = 0;
};

inline void to_json(nlohmann::json& j, const BalanceReport& r) {
  j = nlohmann::json{{"n_before", r.n_before},
                     {"n_positive_before", r.n_positive_before},
                     {"n_after", r.n_after},
                     {"n_positive_after", r.n_positive_after},
                     {"duplicated_indices", r.duplicated_indices},
                     {"seed", r.seed}};
}

inline void from_json(const nlohmann::json& j, BalanceReport& r) {
  j.at("n_before").get_to(r.n_before);
  j.at("n_positive_before").get_to(r.n_positive_before);
  j.at("n_after").get_to(r.n_after);
  j.at("n_positive_after").get_to(r.n_positive_after);
  j.at("duplicated_indices").get_to(r.duplicated_indices);
  j.at("seed").get_to(r.seed);
}

/// Duplicates minority-class rows (with replacement) until both classes are
/// equally frequent. Input rows keep their positions; copies are appended.
inline std::pair<RecordTable, BalanceReport> balance_oversample(const RecordTable& table,
                                                                std::uint64_t seed) {
  const std::size_t pos = table.positives();
  const std::size_t neg = table.size() - pos;
  if (pos == 0 || neg == 0) {
    throw Error(ErrorCode::DegenerateClasses, "table contains " + std::to_string(pos) + " positive and " +
                                                  std::to_string(neg) + " negative rows");
  }
  const int minority = pos < neg ? 1 : 0;
  std::vector<std::size_t> pool;
  for (std::size_t r = 0; r < table.size(); ++r) {
    if (table.target[r] == minority) pool.push_back(r);
  }
  const std::size_t deficit = (pos > neg ? pos : neg) - pool.size();

  BalanceReport report;
  report.n_before = table.size();
  report.n_positive_before = pos;
  report.seed = seed;

  Engine eng = make_engine(seed, StreamTag::Balance);
  std::vector<std::size_t> rows(table.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  for (std::size_t d = 0; d < deficit; ++d) {
    auto r = pool[static_cast<std::size_t>(uniform_index(eng, pool.size()))];
    rows.push_back(r);
    report.duplicated_indices.push_back(r);
  }
  RecordTable out = table.select(rows);
  report.n_after = out.size();
  report.n_positive_after = out.positives();
  return {std::move(out), std::move(report)};
}

/// Keeps n/2 rows of each class, chosen without replacement, in input order.
inline RecordTable trim_balanced(const RecordTable& table, std::size_t n, std::uint64_t seed) {
  const std::size_t half = n / 2;
  std::vector<std::size_t> pos, neg;
  for (std::size_t r = 0; r < table.size(); ++r) (table.target[r] ? pos : neg).push_back(r);
  if (half > pos.size() || half > neg.size()) {
    throw Error(ErrorCode::SampleTooLarge, "cannot keep " + std::to_string(half) + " rows per class from " +
                                               std::to_string(pos.size()) + "/" + std::to_string(neg.size()));
  }
  Engine eng = make_engine(seed, StreamTag::Trim);
  std::vector<std::size_t> keep;
  keep.reserve(2 * half);
  for (auto* cls : {&pos, &neg}) {
    for (auto i : detail::partial_shuffle(cls->size(), half, eng)) keep.push_back((*cls)[i]);
  }
  std::sort(keep.begin(), keep.end());
  return table.select(keep);
}

/// Disjoint (train, holdout) partition; both keep input order.
inline std::pair<RecordTable, RecordTable> holdout_split(const RecordTable& table, std::size_t n_holdout,
                                                         std::uint64_t seed) {
  if (n_holdout == 0 || n_holdout >= table.size()) {
    throw Error(ErrorCode::SampleTooLarge, "holdout of " + std::to_string(n_holdout) +
                                               " rows needs 0 < n < " + std::to_string(table.size()));
  }
  Engine eng = make_engine(seed, StreamTag::Holdout);
  auto held = detail::partial_shuffle(table.size(), n_holdout, eng);
  std::sort(held.begin(), held.end());
  std::vector<std::size_t> train;
  train.reserve(table.size() - n_holdout);
  for (std::size_t r = 0, h = 0; r < table.size(); ++r) {
    if (h < held.size() && held[h] == r) {
      ++h;
    } else {
      train.push_back(r);
    }
  }
  return {table.select(train), table.select(held)};
}

enum class BalanceOrder { After, Before, Off };

inline std::string_view to_string(BalanceOrder b) {
  switch (b) {
    case BalanceOrder::After: return "after";
    case BalanceOrder::Before: return "before";
    case BalanceOrder::Off: return "off";
  }
  return "after";
}

inline BalanceOrder parse_balance_order(std::string_view s) {
  if (s == "after") return BalanceOrder::After;
  if (s == "before") return BalanceOrder::Before;
  if (s == "off") return BalanceOrder::Off;
  throw Error(ErrorCode::InvalidArgument, "balance must be one of after, before, off");
}

struct PipelineResult {
  RecordTable train;
  RecordTable holdout;
  std::optional<BalanceReport> balance;
};

/// subsample / balance / holdout as configured. `subsample_n == 0` keeps every row,
/// `holdout_n == 0` holds nothing out.
///   After:  subsample n, oversample the minority, keep n/2 per class.
///   Before: oversample the minority on the whole table, keep n/2 per class.
///   Off:    subsample n only.
inline PipelineResult run_pipeline(const RecordTable& full, std::size_t subsample_n, BalanceOrder order,
                                   std::size_t holdout_n, std::uint64_t seed) {
  PipelineResult res;
  const std::size_t n = subsample_n == 0 ? full.size() : subsample_n;
  RecordTable work;
  switch (order) {
    case BalanceOrder::Off:
      work = subsample_n == 0 ? full : subsample(full, n, seed);
      break;
    case BalanceOrder::After: {
      RecordTable sub = subsample_n == 0 ? full : subsample(full, n, seed);
      auto [bal, rep] = balance_oversample(sub, seed);
      res.balance = std::move(rep);
      work = trim_balanced(bal, n, seed);
      break;
    }
    case BalanceOrder::Before: {
      if (n > full.size()) {
        throw Error(ErrorCode::SampleTooLarge,
                    std::to_string(n) + " rows requested from a table of " + std::to_string(full.size()));
      }
      auto [bal, rep] = balance_oversample(full, seed);
      res.balance = std::move(rep);
      work = trim_balanced(bal, n, seed);
      break;
    }
  }
  if (holdout_n > 0) {
    auto [train, held] = holdout_split(work, holdout_n, seed);
    res.train = std::move(train);
    res.holdout = std::move(held);
  } else {
    res.train = std::move(work);
    res.holdout = full.select({});
  }
  return res;
}

}  // namespace bayesbin
