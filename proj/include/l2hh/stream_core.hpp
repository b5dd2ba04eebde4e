#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "l2hh/errors.hpp"

namespace l2hh {

/// 0-based item identifier in [0, n).
using ItemId = std::uint64_t;

/// Exact frequencies of an insertion-only stream, with F2 maintained in O(1)
/// per update. Ground truth for every probabilistic check in the library.
class FrequencyOracle {
 public:
  explicit FrequencyOracle(std::uint64_t n) : counts_(n, 0) {}

  void update(ItemId item) {
    if (item >= counts_.size()) {
      throw RangeError("item " + std::to_string(item) + " outside universe of size " +
                       std::to_string(counts_.size()));
    }
    std::uint64_t& c = counts_[item];
    f2_ += 2 * c + 1;
    ++c;
    ++t_;
  }

  void update(std::span<const ItemId> items) {
    for (ItemId i : items) update(i);
  }

  std::uint64_t universe() const { return counts_.size(); }
  std::uint64_t count(ItemId item) const { return counts_.at(item); }
  const std::vector<std::uint64_t>& counts() const { return counts_; }
  std::uint64_t f2() const { return f2_; }
  double l2() const { return std::sqrt(static_cast<double>(f2_)); }
  std::uint64_t updates() const { return t_; }

  std::uint64_t max_count() const {
    std::uint64_t best = 0;
    for (std::uint64_t c : counts_) best = c > best ? c : best;
    return best;
  }

  /// Items with f_i >= theta * sqrt(F2); empty when F2 = 0.
  std::vector<ItemId> heavy_set(double theta) const {
    if (!(theta > 0.0)) throw ParameterError("heavy_set: theta must be positive");
    std::vector<ItemId> out;
    if (f2_ == 0) return out;
    const double cut = theta * l2();
    for (ItemId i = 0; i < counts_.size(); ++i) {
      if (counts_[i] > 0 && static_cast<double>(counts_[i]) >= cut) out.push_back(i);
    }
    return out;
  }

 private:
  std::vector<std::uint64_t> counts_;
  std::uint64_t f2_ = 0;
  std::uint64_t t_ = 0;
};

/// Per-component storage accounting in machine words. "random" words are the
/// stored seed material; the remainder are counters and bookkeeping.
class SpaceMeter {
 public:
  struct Entry {
    std::uint64_t words = 0;
    std::uint64_t random_words = 0;
    std::uint64_t total() const { return words + random_words; }
  };

  void add(std::string_view component, std::uint64_t words, std::uint64_t random_words = 0) {
    Entry& e = entries_[std::string(component)];
    e.words += words;
    e.random_words += random_words;
  }

  const std::map<std::string, Entry>& report() const { return entries_; }

  Entry total() const {
    Entry t;
    for (const auto& [name, e] : entries_) {
      t.words += e.words;
      t.random_words += e.random_words;
    }
    return t;
  }

  /// Sum over components whose name starts with `prefix`.
  Entry total(std::string_view prefix) const {
    Entry t;
    for (const auto& [name, e] : entries_) {
      if (std::string_view(name).starts_with(prefix)) {
        t.words += e.words;
        t.random_words += e.random_words;
      }
    }
    return t;
  }

 private:
  std::map<std::string, Entry> entries_;
};

}  // namespace l2hh
