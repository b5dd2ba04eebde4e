#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "l2hh/config.hpp"
#include "l2hh/errors.hpp"
#include "l2hh/hashing.hpp"
#include "l2hh/stream_core.hpp"

namespace l2hh {

inline constexpr std::uint32_t kMaxProcessDim = 16;

/// Z T e_i for one process, in integer units (one row per process dimension).
using ColumnProjection = std::array<std::int32_t, kMaxProcessDim>;

/// The compressed Bernoulli process y_t = d^{-1/2} Z T f^(t).
///
/// The state is the d-vector Z (sqrt(k) T) f held in exact integers; Z is
/// regenerated from its key on every update and never stored. Optionally the
/// k-vector sqrt(k) T f is retained as well, for diagnostics.
class JlbpState {
 public:
  JlbpState(const JlEmbedding& t, EntrySeed z_key, std::uint32_t d, bool keep_embedding = false)
      : z_key_(z_key), d_(d), k_(t.k()), identity_(t.is_identity()) {
    if (d == 0 || d > kMaxProcessDim) throw ParameterError("JlbpState: d must lie in [1, 16]");
    scale_ = t.entry_scale() / std::sqrt(static_cast<double>(d));
    if (keep_embedding) tf_.emplace(k_, 0);
  }

  std::uint32_t d() const { return d_; }
  std::uint32_t k() const { return k_; }
  const EntrySeed& z_key() const { return z_key_; }
  std::uint64_t update_count() const { return count_; }

  /// Integer entry Z_{row, col}.
  int z_sign(std::uint32_t row, std::uint32_t col) const { return sign_entry(z_key_, k_, row, col); }

  /// Z (sqrt(k) T e_i): d integers, each a sum of k signs.
  ColumnProjection project(const JlColumn& col) const {
    ColumnProjection out{};
    if (col.identity) {
      for (std::uint32_t r = 0; r < d_; ++r) out[r] = z_sign(r, static_cast<std::uint32_t>(col.item));
      return out;
    }
    // row r, word w of Z is counter r*W + w; the tail of the last word is
    // masked (the column's tail bits are already zero)
    const std::uint32_t words = col.words;
    const std::uint64_t tail = (k_ % 64 == 0) ? ~std::uint64_t{0} : (std::uint64_t{1} << (k_ % 64)) - 1;
    std::uint64_t ctr = 0;
    for (std::uint32_t r = 0; r < d_; ++r) {
      std::int32_t mismatches = 0;
      for (std::uint32_t w = 0; w + 1 < words; ++w) mismatches += std::popcount(prf(z_key_, ctr++) ^ col.bits[w]);
      mismatches += std::popcount((prf(z_key_, ctr++) & tail) ^ col.bits[words - 1]);
      out[r] = static_cast<std::int32_t>(k_) - 2 * mismatches;
    }
    return out;
  }

  void update(const JlColumn& col) {
    if (col.identity || tf_) {
      apply(col, project(col), 1);
      return;
    }
    // project() and apply() fused for the common path
    const std::uint32_t words = col.words;
    const std::uint64_t tail = (k_ % 64 == 0) ? ~std::uint64_t{0} : (std::uint64_t{1} << (k_ % 64)) - 1;
    std::uint64_t ctr = 0;
    __int128 delta = 0;
    for (std::uint32_t r = 0; r < d_; ++r) {
      std::int64_t mismatches = 0;
      for (std::uint32_t w = 0; w + 1 < words; ++w) mismatches += std::popcount(prf(z_key_, ctr++) ^ col.bits[w]);
      mismatches += std::popcount((prf(z_key_, ctr++) & tail) ^ col.bits[words - 1]);
      const std::int64_t step = static_cast<std::int64_t>(k_) - 2 * mismatches;
      delta += static_cast<__int128>(step) * (2 * proj_[r] + step);
      proj_[r] += step;
    }
    sq_ += static_cast<unsigned __int128>(delta);
    ++count_;
  }
  void update(const JlEmbedding& t, ItemId item) { update(t.column(item)); }

  /// Adds weight * (precomputed projection); weight -1 realizes deletions for
  /// the signed counterexample process.
  void apply(const JlColumn& col, const ColumnProjection& p, std::int64_t weight) {
    // ||v + w p||^2 - ||v||^2 = w p (2v + w p), kept exactly
    __int128 delta = 0;
    for (std::uint32_t r = 0; r < d_; ++r) {
      const std::int64_t step = weight * p[r];
      delta += static_cast<__int128>(step) * (2 * proj_[r] + step);
      proj_[r] += step;
    }
    sq_ += static_cast<unsigned __int128>(delta);
    if (tf_) {
      auto& tf = *tf_;
      if (col.identity) {
        tf[col.item] += weight;
      } else {
        for (std::uint32_t r = 0; r < k_; ++r) {
          tf[r] += ((col.bits[r / 64] >> (r % 64)) & 1U) ? -weight : weight;
        }
      }
    }
    ++count_;
  }

  /// Z (sqrt(k) T f) in integer units.
  std::span<const std::int64_t> projection() const { return {proj_.data(), d_}; }

  /// sqrt(k) T f in integer units, when retained.
  const std::optional<std::vector<std::int64_t>>& embedding() const { return tf_; }

  /// Sum of squared projection entries; exact, comparable across processes
  /// sharing (d, T).
  unsigned __int128 squared_norm_units() const { return sq_; }

  double scale() const { return scale_; }
  double squared_norm() const { return static_cast<double>(squared_norm_units()) * scale_ * scale_; }
  double norm() const { return std::sqrt(static_cast<double>(squared_norm_units())) * scale_; }

  std::vector<double> value() const {
    std::vector<double> y(d_);
    for (std::uint32_t r = 0; r < d_; ++r) y[r] = static_cast<double>(proj_[r]) * scale_;
    return y;
  }

  JlbpState& operator+=(const JlbpState& other) {
    if (!(other.z_key_ == z_key_) || other.d_ != d_ || other.k_ != k_) {
      throw ParameterError("JlbpState: merge requires identical seeds and shape");
    }
    sq_ = 0;
    for (std::uint32_t r = 0; r < d_; ++r) {
      proj_[r] += other.proj_[r];
      const unsigned __int128 a = static_cast<unsigned __int128>(proj_[r] < 0 ? -proj_[r] : proj_[r]);
      sq_ += a * a;
    }
    if (tf_ && other.tf_) {
      for (std::uint32_t r = 0; r < k_; ++r) (*tf_)[r] += (*other.tf_)[r];
    }
    count_ += other.count_;
    return *this;
  }

  void account(SpaceMeter& meter, std::string_view component) const {
    meter.add(component, d_ + (tf_ ? k_ : 0), 2);
  }

 private:
  // hot fields first: key, norm and shape share a cache line, proj_ the next
  EntrySeed z_key_;
  unsigned __int128 sq_ = 0;  // sum of proj_[r]^2
  double scale_ = 1.0;
  std::uint32_t d_;
  std::uint32_t k_;
  std::uint64_t count_ = 0;
  bool identity_;
  std::array<std::int64_t, kMaxProcessDim> proj_{};
  std::optional<std::vector<std::int64_t>> tf_;
};

/// Full-dimension reference process X_t = <Z, f^(t)> with n stored signs.
/// Z_j is entry (0, j) of the sign matrix keyed by `z_key` with n columns, the
/// same entries an identity-embedded JlbpState with d = 1 reads.
class BpRefState {
 public:
  BpRefState(EntrySeed z_key, std::uint64_t n) : signs_(n) {
    if (n == 0 || n > kMaxJlDim) throw ParameterError("BpRefState: n must lie in [1, 4096]");
    for (std::uint32_t j = 0; j < n; ++j) {
      signs_[j] = static_cast<std::int8_t>(sign_entry(z_key, static_cast<std::uint32_t>(n), 0, j));
    }
  }

  void update(ItemId item) {
    if (item >= signs_.size()) throw RangeError("BpRefState: item out of range");
    sum_ += signs_[item];
  }

  std::int64_t value() const { return sum_; }

 private:
  std::vector<std::int8_t> signs_;
  std::int64_t sum_ = 0;
};

struct TamenessRecord {
  double sup_ratio = 0.0;
  bool tame = false;
};

/// Runs JLBP over `stream` and compares sup_t ||y_t|| with C ||f^(m)||_2.
inline TamenessRecord tameness_trial(std::span<const ItemId> stream, const Config& config) {
  if (stream.empty()) throw ParameterError("tameness_trial: stream must be nonempty");
  const Config c = config.resolve();
  const EntrySeed root = EntrySeed::from_master(c.master_seed);
  const JlEmbedding t(root.child("T"), c.k, c.n);
  JlbpState y(t, root.child("Z"), c.d);
  FrequencyOracle oracle(c.n);
  unsigned __int128 sup = 0;
  for (ItemId item : stream) {
    oracle.update(item);
    y.update(t, item);
    sup = std::max(sup, y.squared_norm_units());
  }
  TamenessRecord rec;
  rec.sup_ratio = std::sqrt(static_cast<double>(sup)) * y.scale() / oracle.l2();
  rec.tame = rec.sup_ratio <= c.C;
  return rec;
}

/// Signed process on the deletion stream (e_0, -e_0, e_1, -e_1, ..., e_{n-1}, -e_{n-1}).
/// Returns sup_t ||y_t|| / max_t ||f^(t)||_2; the denominator is 1.
inline double deletion_counterexample_ratio(std::uint64_t n, const Config& config) {
  Config c = config;
  c.n = n;
  c = c.resolve();
  const EntrySeed root = EntrySeed::from_master(c.master_seed);
  const JlEmbedding t(root.child("T"), c.k, c.n);
  JlbpState y(t, root.child("Z"), c.d);
  unsigned __int128 sup = 0;
  for (ItemId i = 0; i < n; ++i) {
    const JlColumn col = t.column(i);
    const ColumnProjection p = y.project(col);
    y.apply(col, p, +1);
    sup = std::max(sup, y.squared_norm_units());
    y.apply(col, p, -1);
  }
  return std::sqrt(static_cast<double>(sup)) * y.scale();
}

}  // namespace l2hh
