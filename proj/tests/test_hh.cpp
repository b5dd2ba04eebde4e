#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <nlohmann/json.hpp>

#include "l2hh/hh.hpp"

using namespace l2hh;

namespace {

Config small_config(std::uint64_t seed, double eps = 0.5) {
  Config c;
  c.n = 512;
  c.epsilon = eps;
  c.master_seed = seed;
  return c;
}

std::vector<ItemId> uniform_stream(std::uint64_t n, std::size_t m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<ItemId> s(m);
  for (auto& x : s) x = rng() % n;
  return s;
}

}  // namespace

TEST(HeavyHitters, EachUpdateReachesOneSievePerRow) {
  HeavyHittersState hh(small_config(1));
  const auto& c = hh.config();
  EXPECT_EQ(c.Q, 5u);
  EXPECT_EQ(c.B, 128u);
  hh.update(300);
  for (std::uint32_t q = 0; q < c.Q; ++q) {
    std::uint64_t total = 0;
    for (std::uint32_t b = 0; b < c.B; ++b) total += hh.sieve(q, b).update_count();
    EXPECT_EQ(total, 1u);
    EXPECT_EQ(hh.sieve(q, hh.bucket(q, 300)).update_count(), 1u);
  }
}

TEST(HeavyHitters, SingleItemIsReportedExactly) {
  HeavyHittersState hh(small_config(2));
  for (int i = 0; i < 200; ++i) hh.update(321);
  const auto r = hh.report();
  ASSERT_EQ(r.items.size(), 1u);
  EXPECT_EQ(r.items[0].id, 321u);
  EXPECT_EQ(r.items[0].est, 200.0);
  EXPECT_EQ(r.f2_hat, 40000.0);
  EXPECT_EQ(HeavyHittersState::linf_estimate(r), 200.0);
}

TEST(HeavyHitters, EmptyStreamReportsNothing) {
  HeavyHittersState hh(small_config(3));
  const auto r = hh.report();
  EXPECT_TRUE(r.items.empty());
  EXPECT_EQ(r.candidate_count, 0u);
  EXPECT_EQ(hh.linf_estimate(), 0.0);
}

// f_i ~ 10 everywhere: ||f||_2 ~ 240, nothing is 0.5-heavy
TEST(HeavyHitters, UniformStreamUsuallyEmpty) {
  int empty = 0;
  constexpr int kSeeds = 12;
  for (int s = 0; s < kSeeds; ++s) {
    HeavyHittersState hh(small_config(100 + s));
    for (ItemId x : uniform_stream(512, 5000, s)) hh.update(x);
    empty += hh.report().items.empty() ? 1 : 0;
  }
  EXPECT_GE(empty, 11);
}

TEST(HeavyHitters, PlantedItemsFoundAndReportInvariants) {
  int ok = 0;
  constexpr int kSeeds = 6;
  for (int s = 0; s < kSeeds; ++s) {
    HeavyHittersState hh(small_config(200 + s));
    auto stream = uniform_stream(512, 3000, 50 + s);
    stream.insert(stream.end(), 600, ItemId{17});
    stream.insert(stream.end(), 500, ItemId{400});
    std::shuffle(stream.begin(), stream.end(), std::mt19937_64(s));
    FrequencyOracle oracle(512);
    for (ItemId x : stream) {
      hh.update(x);
      oracle.update(x);
    }
    const auto cands = hh.candidates();
    EXPECT_LE(cands.size(), static_cast<std::size_t>(hh.config().Q) * hh.config().B);
    EXPECT_TRUE(std::is_sorted(cands.begin(), cands.end()));

    const auto r = hh.report();
    for (const auto& it : r.items) {
      EXPECT_GT(oracle.count(it.id), 0u) << it.id;
      EXPECT_NE(std::find(cands.begin(), cands.end(), it.id), cands.end());
    }
    ok += (r.contains(17) && r.contains(400)) ? 1 : 0;

    // larger epsilon only removes items
    auto prev = hh.report(0.05);
    for (double eps : {0.1, 0.3, 0.5, 0.8}) {
      const auto cur = hh.report(eps);
      for (const auto& it : cur.items) EXPECT_TRUE(prev.contains(it.id)) << eps;
      prev = cur;
    }
  }
  EXPECT_GE(ok, 5);
}

TEST(HeavyHitters, JsonShapeAndRoundTrip) {
  HeavyHittersReport r;
  r.epsilon = 0.25;
  r.f2_hat = 1234.5;
  r.items = {{7, 40.0}, {9, -3.0}};
  const nlohmann::json j = r;
  EXPECT_EQ(j.size(), 3u);
  EXPECT_EQ(j.at("items").size(), 2u);
  EXPECT_EQ(j.at("items")[0].at("id"), 7);
  const auto back = j.get<HeavyHittersReport>();
  EXPECT_EQ(back.epsilon, 0.25);
  EXPECT_EQ(back.f2_hat, 1234.5);
  ASSERT_EQ(back.items.size(), 2u);
  EXPECT_EQ(back.items[1].id, 9u);
  EXPECT_EQ(back.items[1].est, -3.0);
}

TEST(HeavyHitters, SpaceComponents) {
  HeavyHittersState hh(small_config(4));
  SpaceMeter m;
  hh.account(m);
  const auto& c = hh.config();
  EXPECT_EQ(m.total("hh.countsketch").words, static_cast<std::uint64_t>(c.Q) * c.B);
  EXPECT_EQ(m.total("hh.ams").words, static_cast<std::uint64_t>(c.ams_rows) * c.ams_cols);
  EXPECT_EQ(m.total("hh.bucket_hashes").random_words, 4u * c.Q);
  EXPECT_GT(m.total("hh.countsieve.").words, 0u);
  EXPECT_EQ(m.total("hh.countsieve.embedding").total(), 0u);
  EXPECT_EQ(m.total().total(), m.total("hh.").total());
}

TEST(HeavyHitters, OutOfRangeItemRejected) {
  HeavyHittersState hh(small_config(5));
  EXPECT_THROW(hh.update(512), RangeError);
}
