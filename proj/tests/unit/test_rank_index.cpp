#include <algorithm>
#include <cmath>
#include <fstream>

#include <gtest/gtest.h>

#include "mlsort/distributions.hpp"
#include "mlsort/error.hpp"
#include "mlsort/random.hpp"
#include "mlsort/rank_index.hpp"
#include "test_support.hpp"

using namespace mlsort;

namespace {

RankLookup full_search(std::span<const double> keys, double x) {
  const auto lo = std::lower_bound(keys.begin(), keys.end(), x);
  const auto hi = std::upper_bound(lo, keys.end(), x);
  return {lo != hi, static_cast<std::size_t>(lo - keys.begin()),
          static_cast<std::size_t>(hi - keys.begin())};
}

SortConfig index_config(std::size_t m) {
  SortConfig cfg;
  cfg.train.m = m;
  cfg.on_warning = nullptr;
  return cfg;
}

std::size_t exhaustive_deviation(const RankIndex& index) {
  const auto keys = index.keys();
  std::size_t worst = 0;
  for (std::size_t i = 0; i < keys.size();) {
    std::size_t j = i;
    while (j < keys.size() && keys[j] == keys[i]) ++j;
    const auto r = estimate_rank(index.model(), keys[i], keys.size()).rank;
    const std::size_t d = r < i ? i - r : r >= j ? r - (j - 1) : 0;
    worst = std::max(worst, d);
    i = j;
  }
  return worst;
}

}  // namespace

TEST(RankIndex, UniformHundredThousand) {
  const auto data = generate(preset("uniform", 4), 100'000);
  const auto index = RankIndex::build(data, index_config(10));
  EXPECT_EQ(index.size(), data.size());
  EXPECT_TRUE(std::is_sorted(index.keys().begin(), index.keys().end()));
  EXPECT_EQ(index.max_observed_deviation(), exhaustive_deviation(index));
  EXPECT_EQ(index.model().neuron_count(), 10u);
}

TEST(RankIndex, SingleKey) {
  const auto index = RankIndex::build(KeyVector{3.5}, index_config(10));
  EXPECT_EQ(index.max_observed_deviation(), 0u);
  EXPECT_EQ(index.query(3.5), (RankLookup{true, 0, 1}));
  EXPECT_EQ(index.query(1.0), (RankLookup{false, 0, 0}));
  EXPECT_EQ(index.query(9.0), (RankLookup{false, 1, 1}));
}

TEST(RankIndex, DuplicateOnlyBlock) {
  const auto index = RankIndex::build(KeyVector(100, 7.0), index_config(10));
  EXPECT_EQ(index.query(7.0), (RankLookup{true, 0, 100}));
  EXPECT_EQ(index.query(6.0), (RankLookup{false, 0, 0}));
  EXPECT_EQ(index.query(8.0), (RankLookup{false, 100, 100}));
}

TEST(RankIndex, QueryExamples) {
  const KeyVector data{5, 1, 3, 3, 9, 7};
  const auto index = RankIndex::build(data, index_config(4));
  EXPECT_EQ(index.query(3.0), (RankLookup{true, 1, 3}));
  EXPECT_EQ(index.query(9.0), (RankLookup{true, 5, 6}));
  EXPECT_EQ(index.query(-100.0), (RankLookup{false, 0, 0}));
  EXPECT_EQ(index.query(6.0), (RankLookup{false, 4, 4}));
  EXPECT_THROW(index.query(NAN), KeyError);
}

TEST(RankIndex, ProbesMatchFullBinarySearch) {
  for (const auto name : preset_names()) {
    const auto data = generate(preset(name, 6), 20000);
    const auto index = RankIndex::build(data, index_config(name == std::string("uniform") ? 10 : 50));
    Rng rng(8);
    for (int i = 0; i < 10000; ++i) {
      const double x = i % 2 ? index.keys()[rng.below(index.size())] : rng.uniform(-1100, 1100);
      ASSERT_EQ(index.query(x), full_search(index.keys(), x)) << name << " " << x;
    }
  }
}

TEST(RankIndex, WindowHoldsEveryStoredKey) {
  const auto data = generate(preset("trimodal", 2), 30000);
  const auto index = RankIndex::build(data, index_config(50));
  for (double k : index.keys()) {
    const auto [first, last] = index.search_window(k);
    const auto expect = full_search(index.keys(), k);
    ASSERT_LE(first, expect.first);
    ASSERT_GT(last, expect.first);
  }
}

TEST(RankIndex, DeterministicBuild) {
  const auto data = generate(preset("bimodal", 3), 5000);
  const auto a = RankIndex::build(data, index_config(20));
  const auto b = RankIndex::build(data, index_config(20));
  EXPECT_EQ(a.model().to_json(), b.model().to_json());
  EXPECT_EQ(a.max_observed_deviation(), b.max_observed_deviation());
}

TEST(RankIndex, SaveLoadRoundTrip) {
  mlsort::testing::TempDir dir("index");
  const auto data = generate(preset("comb5", 5), 8000);
  const auto index = RankIndex::build(data, index_config(30));
  index.save(dir / "idx");
  ASSERT_TRUE(std::filesystem::exists(dir / "idx.model.json"));
  ASSERT_EQ(std::filesystem::file_size(dir / "idx.keys"), 7u + 1u + 8u + 8u * data.size());
  const auto back = RankIndex::load(dir / "idx");
  EXPECT_TRUE(std::equal(back.keys().begin(), back.keys().end(), index.keys().begin(),
                         index.keys().end()));
  EXPECT_EQ(back.max_observed_deviation(), index.max_observed_deviation());
  Rng rng(1);
  for (int i = 0; i < 2000; ++i) {
    const double x = rng.uniform(-1000, 1000);
    ASSERT_EQ(back.query(x), index.query(x));
  }
}

TEST(RankIndex, LoadRejectsCorruptArtifacts) {
  mlsort::testing::TempDir dir("index-bad");
  const auto index = RankIndex::build(generate(preset("uniform", 1), 500), index_config(5));
  index.save(dir / "idx");
  EXPECT_THROW(RankIndex::load(dir / "missing"), IoError);
  {
    std::fstream f(dir / "idx.keys", std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.put('X');
  }
  EXPECT_THROW(RankIndex::load(dir / "idx"), Error);
  index.save(dir / "idx");
  std::filesystem::resize_file(dir / "idx.keys", 100);
  EXPECT_THROW(RankIndex::load(dir / "idx"), Error);
}

TEST(RankIndex, RejectsBadInput) {
  EXPECT_THROW(RankIndex::build(KeyVector{}, index_config(5)), ValidationError);
  EXPECT_THROW(RankIndex::build(KeyVector{1.0, NAN}, index_config(5)), KeyError);
}
