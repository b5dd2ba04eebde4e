#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "l2hh/errors.hpp"
#include "l2hh/hashing.hpp"
#include "l2hh/stream_core.hpp"

namespace l2hh {

/// Median of a scratch buffer (reordered); mean of the middle pair when even.
template <class T>
double median_in_place(std::span<T> values) {
  if (values.empty()) return 0.0;
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = static_cast<double>(values[mid]);
  if (values.size() % 2 == 1) return upper;
  const double lower = static_cast<double>(*std::max_element(values.begin(), values.begin() + mid));
  return 0.5 * (lower + upper);
}

/// AMS F2 estimator: rows x cols independent sums sum_j S_j f_j with 4-wise
/// independent signs; estimate = median over rows of the mean squared sum.
class AmsSketch {
 public:
  AmsSketch(EntrySeed key, std::uint32_t rows, std::uint32_t cols)
      : rows_(rows), cols_(cols), sums_(static_cast<std::size_t>(rows) * cols, 0), seeds_(sums_.size()) {
    if (rows == 0 || cols == 0) throw ParameterError("AmsSketch: rows and cols must be positive");
    rekey(key);
  }

  /// Fresh seeds from `key` and zeroed sums, keeping the shape.
  void rekey(EntrySeed key) {
    for (std::size_t cell = 0; cell < sums_.size(); ++cell) seeds_[cell] = PolyHashSeed::from(key.child(cell));
    std::fill(sums_.begin(), sums_.end(), 0);
  }

  void update(const PolyPowers& p) {
    for (std::size_t cell = 0; cell < sums_.size(); ++cell) sums_[cell] += sign_of(seeds_[cell], p);
  }
  void update(ItemId item) { update(PolyPowers(item)); }

  double estimate() const {
    std::array<double, 32> small{};
    std::vector<double> big;
    std::span<double> row_means(small.data(), rows_);
    if (rows_ > small.size()) {
      big.resize(rows_);
      row_means = big;
    }
    for (std::uint32_t r = 0; r < rows_; ++r) {
      double acc = 0.0;
      for (std::uint32_t c = 0; c < cols_; ++c) {
        const double s = static_cast<double>(sums_[static_cast<std::size_t>(r) * cols_ + c]);
        acc += s * s;
      }
      row_means[r] = acc / cols_;
    }
    return median_in_place(row_means);
  }

  std::uint32_t rows() const { return rows_; }
  std::uint32_t cols() const { return cols_; }
  std::span<const std::int64_t> cells() const { return sums_; }

  AmsSketch& operator+=(const AmsSketch& other) {
    if (other.seeds_ != seeds_) throw ParameterError("AmsSketch: merge requires identical seeds");
    for (std::size_t i = 0; i < sums_.size(); ++i) sums_[i] += other.sums_[i];
    return *this;
  }

  void account(SpaceMeter& meter, std::string_view component) const {
    meter.add(component, sums_.size(), 4 * seeds_.size());
  }

 private:
  std::uint32_t rows_;
  std::uint32_t cols_;
  std::vector<std::int64_t> sums_;
  std::vector<PolyHashSeed> seeds_;
};

/// CountSketch: Q rows of B signed counters with per-row bucket hash h'_q and
/// sign hash sigma_q.
class CountSketchTable {
 public:
  CountSketchTable(EntrySeed key, std::uint32_t rows, std::uint32_t buckets)
      : rows_(rows), buckets_(buckets), counters_(static_cast<std::size_t>(rows) * buckets, 0) {
    if (rows == 0 || buckets == 0) throw ParameterError("CountSketchTable: rows and buckets must be positive");
    for (std::uint32_t q = 0; q < rows; ++q) {
      bucket_seeds_.push_back(PolyHashSeed::from(key.child("bucket").child(q)));
      sign_seeds_.push_back(PolyHashSeed::from(key.child("sign").child(q)));
    }
  }

  void update(const PolyPowers& p) {
    for (std::uint32_t q = 0; q < rows_; ++q) {
      counters_[index(q, bucket_of(bucket_seeds_[q], p, buckets_))] += sign_of(sign_seeds_[q], p);
    }
  }
  void update(ItemId item) { update(PolyPowers(item)); }

  /// median_q sigma_q(i) c_{q, h'_q(i)}
  double estimate(ItemId item) const {
    const PolyPowers p(item);
    std::vector<std::int64_t> v(rows_);
    for (std::uint32_t q = 0; q < rows_; ++q) {
      v[q] = sign_of(sign_seeds_[q], p) * counters_[index(q, bucket_of(bucket_seeds_[q], p, buckets_))];
    }
    return median_in_place(std::span<std::int64_t>(v));
  }

  /// median_q |c_{q, h'_q(i)}|
  double abs_median(ItemId item) const {
    const PolyPowers p(item);
    std::vector<std::int64_t> v(rows_);
    for (std::uint32_t q = 0; q < rows_; ++q) {
      const std::int64_t c = counters_[index(q, bucket_of(bucket_seeds_[q], p, buckets_))];
      v[q] = c < 0 ? -c : c;
    }
    return median_in_place(std::span<std::int64_t>(v));
  }

  std::uint32_t rows() const { return rows_; }
  std::uint32_t buckets() const { return buckets_; }
  std::span<const std::int64_t> cells() const { return counters_; }
  std::int64_t counter(std::uint32_t q, std::uint32_t b) const { return counters_[index(q, b)]; }
  std::uint32_t bucket(std::uint32_t q, ItemId item) const { return bucket_of(bucket_seeds_[q], item, buckets_); }
  int sign(std::uint32_t q, ItemId item) const { return sign_of(sign_seeds_[q], item); }

  CountSketchTable& operator+=(const CountSketchTable& other) {
    if (other.bucket_seeds_ != bucket_seeds_ || other.sign_seeds_ != sign_seeds_ || other.buckets_ != buckets_) {
      throw ParameterError("CountSketchTable: merge requires identical seeds");
    }
    for (std::size_t i = 0; i < counters_.size(); ++i) counters_[i] += other.counters_[i];
    return *this;
  }

  void account(SpaceMeter& meter, std::string_view component) const {
    meter.add(component, counters_.size(), 8ULL * rows_);
  }

 private:
  std::size_t index(std::uint32_t q, std::uint32_t b) const { return static_cast<std::size_t>(q) * buckets_ + b; }

  std::uint32_t rows_;
  std::uint32_t buckets_;
  std::vector<PolyHashSeed> bucket_seeds_;
  std::vector<PolyHashSeed> sign_seeds_;
  std::vector<std::int64_t> counters_;
};

}  // namespace l2hh
