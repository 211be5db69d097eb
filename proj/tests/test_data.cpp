#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "support.hpp"

using namespace bayesbin;
using testing_support::kHeader;
using testing_support::parse;
using testing_support::row;
using testing_support::table_with_targets;

namespace {

std::multiset<std::size_t> provenance_of(const RecordTable& t) {
  return {t.provenance.begin(), t.provenance.end()};
}

const Column& col(const RecordTable& t, const std::string& name) {
  for (const auto& c : t.columns) {
    if (c.name == name) return c;
  }
  throw std::runtime_error("no column " + name);
}

}  // namespace

TEST(Parse, SingleRowYes) {
  auto t = parse(std::string(kHeader) + "\n" + row(41, "admin.", "yes") + "\n");
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t.target[0], 1);
  EXPECT_EQ(col(t, "age").numbers[0], 41.0);
  EXPECT_EQ(col(t, "job").levels[0], "admin.");
  EXPECT_EQ(col(t, "cons.conf.idx").numbers[0], -36.4);
}

TEST(Parse, UnknownTargetLabel) {
  try {
    parse(std::string(kHeader) + "\n" + row(41, "admin.", "maybe") + "\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownTargetLabel);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Parse, HeaderErrors) {
  std::string bad = kHeader;
  bad.replace(bad.find("\"job\""), 5, "\"jobs\"");
  EXPECT_THROW(
      {
        try {
          parse(bad + "\n");
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), ErrorCode::UnknownColumn);
          throw;
        }
      },
      Error);
  std::string missing = kHeader;
  missing.erase(missing.find(";\"loan\""), 7);
  EXPECT_THROW(parse(missing + "\n"), Error);
}

TEST(Parse, ShortRowAndBadNumber) {
  try {
    parse(std::string(kHeader) + "\n1;\"x\";\"y\"\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingField);
  }
  std::string r = row(41, "admin.", "no");
  r.replace(0, 2, "4x");
  try {
    parse(std::string(kHeader) + "\n" + r + "\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnparseableNumber);
    EXPECT_NE(std::string(e.what()).find("'age'"), std::string::npos);
  }
}

TEST(Parse, ColumnsInAnyOrderAndQuotedDelimiters) {
  // swap age and job in header and row
  std::string header = kHeader;
  header.replace(0, std::string("\"age\";\"job\"").size(), "\"job\";\"age\"");
  std::string r = row(30, "x", "no");
  r.replace(0, std::string("30;\"x\"").size(), "\"a;b\"\"c\";30");
  auto t = parse(header + "\n" + r + "\r\n");
  EXPECT_EQ(col(t, "job").levels[0], "a;b\"c");
  EXPECT_EQ(col(t, "age").numbers[0], 30.0);
}

TEST(Parse, EmptyBodyIsEmptyTable) {
  auto t = parse(std::string(kHeader) + "\n");
  EXPECT_EQ(t.size(), 0u);
  EXPECT_EQ(t.columns.size(), kFeatureCount);
}

TEST(Parse, WriteRoundTrip) {
  auto t = synthetic_bank(50, 3);
  std::ostringstream out;
  write_dataset(t, out);
  auto back = parse(out.str());
  ASSERT_EQ(back.size(), t.size());
  EXPECT_EQ(back.target, t.target);
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    EXPECT_EQ(back.columns[j].numbers, t.columns[j].numbers);
    EXPECT_EQ(back.columns[j].levels, t.columns[j].levels);
  }
}

TEST(Subsample, FullSizeIsPermutation) {
  auto t = table_with_targets({1, 0, 1, 0, 0, 1, 0});
  auto s = subsample(t, t.size(), 9);
  EXPECT_EQ(provenance_of(s), provenance_of(t));
}

TEST(Subsample, DeterministicAndSeedSensitive) {
  auto t = synthetic_bank(500, 1);
  auto a = subsample(t, 100, 5);
  auto b = subsample(t, 100, 5);
  auto c = subsample(t, 100, 6);
  EXPECT_EQ(a.provenance, b.provenance);
  EXPECT_NE(a.provenance, c.provenance);
  EXPECT_EQ(c.size(), 100u);
  std::set<std::size_t> distinct(a.provenance.begin(), a.provenance.end());
  EXPECT_EQ(distinct.size(), 100u);
}

TEST(Subsample, TooLarge) {
  auto t = table_with_targets({1, 0});
  try {
    subsample(t, 3, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SampleTooLarge);
  }
}

TEST(Balance, AlreadyBalancedUnchanged) {
  auto t = table_with_targets({1, 1, 1, 0, 0, 0});
  auto [out, rep] = balance_oversample(t, 1);
  EXPECT_EQ(out.provenance, t.provenance);
  EXPECT_TRUE(rep.duplicated_indices.empty());
  EXPECT_EQ(rep.n_after, 6u);
}

TEST(Balance, TwoVersusSix) {
  auto t = table_with_targets({1, 0, 0, 1, 0, 0, 0, 0});
  auto [out, rep] = balance_oversample(t, 4);
  EXPECT_EQ(out.size(), 12u);
  EXPECT_EQ(out.positives(), 6u);
  EXPECT_EQ(rep.duplicated_indices.size(), 4u);
  EXPECT_EQ(rep.n_positive_after, rep.n_after - rep.n_positive_after);
  for (auto d : rep.duplicated_indices) EXPECT_EQ(t.target[d], 1);
  // majority rows untouched, every row a copy of an input row
  for (std::size_t r = 0; r < t.size(); ++r) EXPECT_EQ(out.provenance[r], t.provenance[r]);
  for (auto p : out.provenance) EXPECT_LT(p, t.size());
  auto report = nlohmann::json(rep).get<BalanceReport>();
  EXPECT_EQ(report.duplicated_indices, rep.duplicated_indices);
}

TEST(Balance, OneClassIsDegenerate) {
  auto t = table_with_targets({0, 0, 0});
  try {
    balance_oversample(t, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateClasses);
  }
}

TEST(Holdout, PartitionContract) {
  auto t = table_with_targets({1, 0, 1, 0, 0, 1, 0, 1, 1, 0});
  auto [train, held] = holdout_split(t, 3, 2);
  EXPECT_EQ(train.size(), 7u);
  EXPECT_EQ(held.size(), 3u);
  auto all = provenance_of(train);
  for (auto p : held.provenance) {
    EXPECT_EQ(all.count(p), 0u);
    all.insert(p);
  }
  EXPECT_EQ(all, provenance_of(t));
  EXPECT_EQ(holdout_split(t, 3, 2).second.provenance, held.provenance);
  EXPECT_THROW(holdout_split(t, 10, 2), Error);
}

TEST(Pipeline, BalancedTenThousandShape) {
  // surrogate with the real row count; 10,000 balanced rows then 3 held out
  auto full = synthetic_bank(41188, 11);
  auto res = run_pipeline(full, 10000, BalanceOrder::After, 3, 1);
  EXPECT_EQ(res.train.size() + res.holdout.size(), 10000u);
  EXPECT_EQ(res.holdout.size(), 3u);
  ASSERT_TRUE(res.balance.has_value());
  EXPECT_EQ(res.balance->n_positive_after * 2, res.balance->n_after);
  auto no_holdout = run_pipeline(full, 10000, BalanceOrder::After, 0, 1);
  EXPECT_EQ(no_holdout.train.size(), 10000u);
  EXPECT_EQ(no_holdout.train.positives(), 5000u);
  auto before = run_pipeline(full, 10000, BalanceOrder::Before, 0, 1);
  EXPECT_EQ(before.train.positives(), 5000u);
  auto off = run_pipeline(full, 1000, BalanceOrder::Off, 0, 1);
  EXPECT_EQ(off.train.size(), 1000u);
  EXPECT_FALSE(off.balance.has_value());
}

TEST(Encode, LexicographicCodes) {
  auto t = table_with_targets({1, 0});  // job: services, admin.
  auto e = encode(t, false);
  const auto& job = e.design.meta.columns[1];
  EXPECT_EQ(job.levels, (std::vector<std::string>{"admin.", "services"}));
  EXPECT_EQ(e.design.values(0, 1), 2.0);
  EXPECT_EQ(e.design.values(1, 1), 1.0);
}

TEST(Encode, ConstantColumnAndZScores) {
  auto t = table_with_targets({1, 0, 1});
  t.columns[0].numbers = {20, 30, 40};
  auto e = encode(t, true);
  // sd with denominator n-1 is 10; population sd would give +-1.2247
  EXPECT_NEAR(e.design.values(0, 0), -1.0, 1e-15);
  EXPECT_NEAR(e.design.values(1, 0), 0.0, 1e-15);
  EXPECT_NEAR(e.design.values(2, 0), 1.0, 1e-15);
  const auto& marital = e.design.meta.columns[2];
  EXPECT_TRUE(marital.constant);
  EXPECT_EQ(marital.scale, 1.0);
  EXPECT_EQ(e.design.values(1, 2), 0.0);
  EXPECT_TRUE(e.design.meta.any_constant());
}

TEST(Encode, StandardizedMomentsAndDecodeRoundTrip) {
  auto t = synthetic_bank(300, 5);
  auto e = encode(t, true);
  for (Eigen::Index j = 0; j < e.design.cols(); ++j) {
    if (e.design.meta.columns[static_cast<std::size_t>(j)].constant) continue;
    const auto c = e.design.values.col(j);
    const double mean = c.mean();
    const double sd = std::sqrt((c.array() - mean).square().sum() / (c.size() - 1));
    EXPECT_NEAR(mean, 0.0, 1e-10);
    EXPECT_NEAR(sd, 1.0, 1e-10);
  }
  auto raw = encode(t, false);
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    const auto& enc = raw.design.meta.columns[j];
    if (!enc.categorical) continue;
    for (std::size_t r = 0; r < t.size(); ++r) {
      const int code = static_cast<int>(raw.design.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)));
      EXPECT_EQ(decode_level(enc, code), t.columns[j].levels[r]);
    }
  }
}

TEST(Encode, EmptyTableAndMetadataRoundTrip) {
  try {
    encode(empty_table());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyTable);
  }
  auto e = encode(synthetic_bank(100, 2));
  auto back = nlohmann::json::parse(nlohmann::json(e.design.meta).dump()).get<EncodingMeta>();
  EXPECT_TRUE(back == e.design.meta);
}

TEST(Encode, ApplyEncodingMatchesAndRejectsUnseenLevels) {
  auto t = synthetic_bank(200, 8);
  auto e = encode(t);
  auto again = apply_encoding(t, e.design.meta);
  EXPECT_EQ(again.values, e.design.values);
  auto other = table_with_targets({1});
  other.columns[1].levels[0] = "astronaut";
  try {
    apply_encoding(other, e.design.meta);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::UnseenLevel);
    EXPECT_NE(std::string(err.what()).find("astronaut"), std::string::npos);
    EXPECT_NE(std::string(err.what()).find("job"), std::string::npos);
  }
}
