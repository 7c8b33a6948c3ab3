#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dyntok/grouping.hpp"
#include "test_support.hpp"

namespace {

using dyntok::GridShape;
using dyntok::SimilarityGrid;
using dyntok::Threshold;
namespace oracle = dyntok::testing::oracle;

SimilarityGrid sims_row(std::vector<float> values) {
  SimilarityGrid s;
  s.shape = {1, 1, static_cast<std::uint32_t>(values.size() + 1)};
  s.values = std::move(values);
  return s;
}

std::vector<std::uint32_t> starts_of(const dyntok::GroupMap& m, std::uint32_t f = 0, std::uint32_t r = 0) {
  auto s = m.starts(f, r);
  return {s.begin(), s.end()};
}

TEST(Grouping, WorkedRowTieSplits) {
  // 0.8 > 0.6 joins, 0.6 is not > 0.6 so column 2 starts a group, 1.0 joins.
  auto map = dyntok::build_groups(sims_row({0.8f, 0.6f, 1.0f}), Threshold(0.6f));
  EXPECT_EQ(starts_of(map), (std::vector<std::uint32_t>{0, 2}));
  EXPECT_EQ(oracle::labels_from_starts(map.starts(0, 0), 4),
            oracle::group_labels(std::vector<float>{0.8f, 0.6f, 1.0f}, 4, 0.6f));
}

TEST(Grouping, AllOnesGiveOneGroup) {
  SimilarityGrid s;
  s.shape = {2, 3, 5};
  s.values.assign(2 * 3 * 4, 1.0f);
  auto map = dyntok::build_groups(s, Threshold(0.99f));
  EXPECT_EQ(dyntok::group_counts(map), std::vector<std::uint32_t>(6, 1));
}

TEST(Grouping, AllZerosGiveIdentity) {
  SimilarityGrid s;
  s.shape = {1, 2, 4};
  s.values.assign(2 * 3, 0.0f);
  auto map = dyntok::build_groups(s, Threshold(0.4f));
  EXPECT_EQ(dyntok::group_counts(map), (std::vector<std::uint32_t>{4, 4}));
  EXPECT_EQ(map, dyntok::identity_groups(s.shape, Threshold(0.4f)));
}

TEST(Grouping, GroupCountsFromStarts) {
  auto map = dyntok::build_groups(sims_row({0.8f, 0.6f, 1.0f}), Threshold(0.6f));
  EXPECT_EQ(dyntok::group_counts(map), std::vector<std::uint32_t>{2});
  EXPECT_EQ(map.total_groups(), 2u);
}

TEST(Grouping, ThresholdValidation) {
  EXPECT_THROW(Threshold(1.5f), dyntok::Error);
  EXPECT_THROW(Threshold(-1.0f), dyntok::Error);
  EXPECT_THROW(Threshold(std::nanf("")), dyntok::Error);
  EXPECT_NO_THROW(Threshold(1.0f));
  EXPECT_NO_THROW(Threshold(-0.999f));
}

TEST(Grouping, MalformedMapsRejected) {
  GridShape shape{1, 1, 4};
  EXPECT_THROW(dyntok::GroupMap(shape, Threshold(0.5f), {0, 1}, {1}), dyntok::Error);
  EXPECT_THROW(dyntok::GroupMap(shape, Threshold(0.5f), {0, 2}, {0, 4}), dyntok::Error);
  EXPECT_THROW(dyntok::GroupMap(shape, Threshold(0.5f), {0, 3}, {0, 2, 2}), dyntok::Error);
  EXPECT_THROW(dyntok::GroupMap(shape, Threshold(0.5f), {0}, {}), dyntok::Error);
}

// Every row up to w = 16 against the pairwise-relation oracle, with the
// threshold placed exactly on, one ulp either side of, and well around each
// similarity value.
TEST(Grouping, MatchesOracleAroundEverySimilarity) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<float> sim(-1.0f, 1.0f);
  std::uniform_int_distribution<int> pick(0, 3);
  for (std::uint32_t w = 1; w <= 16; ++w) {
    for (int trial = 0; trial < 40; ++trial) {
      std::vector<float> values(w - 1);
      // Include exact repeats so several boundaries tie at once.
      for (auto& v : values) v = pick(rng) == 0 && !values.empty() ? values[0] : sim(rng);
      auto sims = sims_row(values);
      std::vector<float> ths{0.4f, 0.6f, 1.0f};
      for (float v : values)
        for (float t : {v, std::nextafter(v, 2.0f), std::nextafter(v, -2.0f), v + 1e-4f, v - 1e-4f})
          if (t > -1.0f && t <= 1.0f) ths.push_back(t);
      for (float t : ths) {
        auto map = dyntok::build_groups(sims, Threshold(t));
        ASSERT_EQ(oracle::labels_from_starts(map.starts(0, 0), w), oracle::group_labels(values, w, t))
            << "w=" << w << " threshold=" << t;
        for (std::uint32_t k = 1; k < w; ++k) ASSERT_NE(map.is_start(0, 0, k), values[k - 1] > t);
      }
    }
  }
}

TEST(Grouping, RaisingThresholdNeverLowersGroupCount) {
  std::mt19937_64 rng(32);
  auto grid = dyntok::testing::correlated_grid(rng, {3, 6, 14}, 16, 1);
  auto sims = dyntok::adjacent_cosine(grid);
  std::vector<std::uint32_t> prev(grid.shape().row_count(), 0);
  for (float t = -0.95f; t <= 1.0f; t += 0.05f) {
    auto counts = dyntok::group_counts(dyntok::build_groups(sims, Threshold(t)));
    for (std::size_t i = 0; i < counts.size(); ++i) {
      EXPECT_GE(counts[i], prev[i]);
      EXPECT_GE(counts[i], 1u);
      EXPECT_LE(counts[i], 14u);
    }
    prev = counts;
  }
  EXPECT_EQ(dyntok::build_groups(sims, Threshold(1.0f)), dyntok::identity_groups(grid.shape()));
}

TEST(Grouping, JsonRoundTrip) {
  std::mt19937_64 rng(33);
  auto grid = dyntok::testing::correlated_grid(rng, {2, 3, 7}, 8, 1);
  auto map = dyntok::build_groups(dyntok::adjacent_cosine(grid), Threshold(0.55f));
  const auto doc = dyntok::groups_to_json(map);
  EXPECT_EQ(dyntok::groups_from_json(nlohmann::json::parse(doc.dump())), map);
  EXPECT_EQ(doc["starts"].size(), 2u);
  EXPECT_EQ(doc["starts"][0].size(), 3u);
  EXPECT_THROW(dyntok::groups_from_json(nlohmann::json::parse(R"({"frames":1,"rows":1,"cols":2,"threshold":0.5,"starts":[[[1]]]})")),
               dyntok::Error);
}

}  // namespace
