#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "l2hh/bernoulli.hpp"
#include "l2hh/config.hpp"
#include "l2hh/hashing.hpp"
#include "l2hh/sketches.hpp"
#include "l2hh/stream_core.hpp"

namespace l2hh {

/// F2 at every stream position: an N x R_med grid of JLBP processes sharing
/// one T; estimate = median over columns r of the mean of ||X_{i,r}||^2.
///
/// With `memoize` set, Z T e_i is cached per item after its first arrival.
/// The cache is an evaluation aid outside the sketch and is not metered.
class F2AlwaysState {
 public:
  explicit F2AlwaysState(const Config& config, bool memoize = true)
      : config_(config.resolve()),
        means_(config_.f2_N),
        medians_(config_.f2_R_med),
        t_(EntrySeed::from_master(config_.master_seed).child("f2T"), config_.f2_k, config_.n),
        column_sums_(medians_, 0) {
    const EntrySeed z = EntrySeed::from_master(config_.master_seed).child("f2Z");
    grid_.reserve(static_cast<std::size_t>(means_) * medians_);
    for (std::uint32_t r = 0; r < medians_; ++r) {
      for (std::uint32_t i = 0; i < means_; ++i) {
        grid_.emplace_back(t_, z.child(static_cast<std::uint64_t>(r) * means_ + i), config_.d);
      }
    }
    const double bytes = static_cast<double>(config_.n) * grid_.size() * config_.d * sizeof(std::int16_t);
    memoize_ = memoize && bytes <= 1024.0 * 1024.0 * 1024.0;
    if (memoize_) memo_.resize(config_.n);
  }

  void update(ItemId item) {
    const JlColumn col = t_.column(item);
    const std::uint32_t d = config_.d;
    const std::int16_t* cached = memoize_ ? cached_projection(item, col) : nullptr;
    for (std::size_t c = 0; c < grid_.size(); ++c) {
      JlbpState& cell = grid_[c];
      ColumnProjection p{};
      if (cached != nullptr) {
        for (std::uint32_t r = 0; r < d; ++r) p[r] = cached[c * d + r];
      } else {
        p = cell.project(col);
      }
      const unsigned __int128 before = cell.squared_norm_units();
      cell.apply(col, p, 1);
      column_sums_[c / means_] += cell.squared_norm_units() - before;
    }
    ++count_;
  }

  /// Mean squared norm of column r.
  double column_estimate(std::uint32_t r) const {
    const double s = grid_.front().scale();
    return static_cast<double>(column_sums_.at(r)) * s * s / means_;
  }

  double f2_current() const {
    std::vector<double> ys(medians_);
    for (std::uint32_t r = 0; r < medians_; ++r) ys[r] = column_estimate(r);
    return median_in_place(std::span<double>(ys));
  }

  std::uint64_t update_count() const { return count_; }
  std::uint32_t means() const { return means_; }
  std::uint32_t medians() const { return medians_; }
  const JlbpState& cell(std::uint32_t i, std::uint32_t r) const { return grid_.at(static_cast<std::size_t>(r) * means_ + i); }
  const Config& config() const { return config_; }
  bool memoized() const { return memoize_; }

  void account(SpaceMeter& meter) const {
    for (const auto& cell : grid_) cell.account(meter, "f2track.grid");
    meter.add("f2track.embedding", 0, 2);
  }

 private:
  const std::int16_t* cached_projection(ItemId item, const JlColumn& col) {
    auto& slot = memo_[item];
    if (!slot) {
      const std::uint32_t d = config_.d;
      slot = std::make_unique<std::int16_t[]>(grid_.size() * d);
      for (std::size_t c = 0; c < grid_.size(); ++c) {
        const ColumnProjection p = grid_[c].project(col);
        for (std::uint32_t r = 0; r < d; ++r) slot[c * d + r] = static_cast<std::int16_t>(p[r]);
      }
    }
    return slot.get();
  }

  Config config_;
  std::uint32_t means_;
  std::uint32_t medians_;
  JlEmbedding t_;
  std::vector<JlbpState> grid_;
  std::vector<unsigned __int128> column_sums_;
  bool memoize_ = false;
  std::vector<std::unique_ptr<std::int16_t[]>> memo_;
  std::uint64_t count_ = 0;
};

}  // namespace l2hh
