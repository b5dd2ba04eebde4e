#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "l2hh/sketches.hpp"

using namespace l2hh;

TEST(Median, OddEvenAndEmpty) {
  std::vector<double> odd{5, 1, 3};
  EXPECT_EQ(median_in_place(std::span<double>(odd)), 3.0);
  std::vector<double> even{4, 1, 3, 2};
  EXPECT_EQ(median_in_place(std::span<double>(even)), 2.5);
  std::vector<std::int64_t> neg{-7, 2, -1};
  EXPECT_EQ(median_in_place(std::span<std::int64_t>(neg)), -1.0);
  std::vector<double> none;
  EXPECT_EQ(median_in_place(std::span<double>(none)), 0.0);
}

TEST(CountSketch, OneSparseIsExact) {
  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 100; ++rep) {
    const ItemId item = rng() % 100000;
    const int f = 1 + static_cast<int>(rng() % 500);
    CountSketchTable cs(EntrySeed::from_master(rep), 5, 16);
    AmsSketch ams(EntrySeed::from_master(rep).child("ams"), 3, 4);
    for (int i = 0; i < f; ++i) {
      cs.update(item);
      ams.update(item);
    }
    ASSERT_EQ(cs.estimate(item), f);
    ASSERT_EQ(cs.abs_median(item), f);
    ASSERT_EQ(ams.estimate(), static_cast<double>(f) * f);
  }
}

TEST(CountSketch, ErrorWithinL2Bound) {
  // zipf-like frequencies f_i = 2000 / (i+1) over 2000 items
  constexpr std::uint64_t n = 2000;
  std::vector<std::int64_t> f(n);
  double f2 = 0;
  for (ItemId i = 0; i < n; ++i) {
    f[i] = 2000 / static_cast<std::int64_t>(i + 1);
    f2 += static_cast<double>(f[i]) * f[i];
  }
  CountSketchTable cs(EntrySeed::from_master(11), 7, 256);
  for (ItemId i = 0; i < n; ++i)
    for (std::int64_t r = 0; r < f[i]; ++r) cs.update(i);
  const double bound = 2.0 * std::sqrt(f2 / 256);
  int within = 0;
  for (ItemId i = 0; i < n; ++i) within += std::abs(cs.estimate(i) - f[i]) <= bound ? 1 : 0;
  EXPECT_GE(within, static_cast<int>(0.99 * n));
  for (ItemId i = 0; i < 5; ++i) EXPECT_NEAR(cs.estimate(i), f[i], bound);
}

TEST(CountSketch, AccessorsAgreeWithCounters) {
  CountSketchTable cs(EntrySeed::from_master(2), 3, 8);
  cs.update(42);
  for (std::uint32_t q = 0; q < 3; ++q) EXPECT_EQ(cs.counter(q, cs.bucket(q, 42)), cs.sign(q, 42));
  std::int64_t total = 0;
  for (auto c : cs.cells()) total += std::abs(c);
  EXPECT_EQ(total, 3);
  EXPECT_THROW(CountSketchTable(EntrySeed{}, 0, 4), ParameterError);
}

TEST(Ams, TwoItemStreamConcentrates) {
  // f = (3, 4): F2 = 25
  int close = 0;
  for (int s = 0; s < 100; ++s) {
    AmsSketch ams(EntrySeed::from_master(300 + s), 7, 128);
    for (int i = 0; i < 3; ++i) ams.update(ItemId{10});
    for (int i = 0; i < 4; ++i) ams.update(ItemId{20});
    close += std::abs(ams.estimate() - 25.0) <= 0.25 * 25.0 ? 1 : 0;
  }
  EXPECT_GE(close, 95);
}

TEST(Ams, UnbiasedCellsOverSeeds) {
  // per-cell E[S^2] = F2 = 25
  double sum = 0;
  std::size_t cells = 0;
  for (int s = 0; s < 200; ++s) {
    AmsSketch ams(EntrySeed::from_master(900 + s), 1, 16);
    for (int i = 0; i < 3; ++i) ams.update(ItemId{1});
    for (int i = 0; i < 4; ++i) ams.update(ItemId{2});
    for (auto c : ams.cells()) {
      sum += static_cast<double>(c * c);
      ++cells;
    }
  }
  // cell sd = 24, 3200 cells
  EXPECT_NEAR(sum / static_cast<double>(cells), 25.0, 2.0);
}

TEST(Sketches, ReorderInvariantAndEmptyIsZero) {
  std::vector<ItemId> s{1, 2, 2, 3, 3, 3, 9, 1};
  AmsSketch a(EntrySeed::from_master(4), 5, 8), b(EntrySeed::from_master(4), 5, 8);
  for (ItemId x : s) a.update(x);
  std::reverse(s.begin(), s.end());
  for (ItemId x : s) b.update(x);
  EXPECT_EQ(a.estimate(), b.estimate());
  const CountSketchTable empty(EntrySeed::from_master(4), 5, 8);
  EXPECT_EQ(empty.estimate(123), 0.0);
}

TEST(Ams, RekeyClearsState) {
  AmsSketch a(EntrySeed::from_master(1), 2, 3);
  a.update(ItemId{5});
  a.rekey(EntrySeed::from_master(2));
  for (auto c : a.cells()) EXPECT_EQ(c, 0);
  EXPECT_EQ(a.estimate(), 0.0);
  EXPECT_THROW(AmsSketch(EntrySeed{}, 0, 1), ParameterError);
}

// every stream of length <= 6 over 3 items, split at every point
TEST(Sketches, LinearOverAllShortStreams) {
  const EntrySeed key = EntrySeed::from_master(17);
  for (int len = 0; len <= 6; ++len) {
    int total = 1;
    for (int i = 0; i < len; ++i) total *= 3;
    for (int code = 0; code < total; ++code) {
      std::vector<ItemId> s;
      for (int i = 0, c = code; i < len; ++i, c /= 3) s.push_back(static_cast<ItemId>(c % 3));
      for (int split = 0; split <= len; ++split) {
        CountSketchTable whole(key, 3, 4), left(key, 3, 4), right(key, 3, 4);
        AmsSketch aw(key, 2, 2), al(key, 2, 2), ar(key, 2, 2);
        for (int i = 0; i < len; ++i) {
          whole.update(s[i]);
          aw.update(s[i]);
          (i < split ? left : right).update(s[i]);
          (i < split ? al : ar).update(s[i]);
        }
        left += right;
        al += ar;
        ASSERT_TRUE(std::equal(left.cells().begin(), left.cells().end(), whole.cells().begin()));
        ASSERT_TRUE(std::equal(al.cells().begin(), al.cells().end(), aw.cells().begin()));
      }
    }
  }
  CountSketchTable a(key, 3, 4), b(EntrySeed::from_master(18), 3, 4);
  EXPECT_THROW(a += b, ParameterError);
}
