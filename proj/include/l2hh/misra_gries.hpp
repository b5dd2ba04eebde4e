#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <unordered_map>

#include "l2hh/errors.hpp"
#include "l2hh/stream_core.hpp"

namespace l2hh {

/// Misra-Gries frequent items with k counters. Every item with f > m/(k+1)
/// survives, with a count in [f - m/(k+1), f].
class MisraGriesState {
 public:
  explicit MisraGriesState(std::size_t k) : k_(k) {
    if (k == 0) throw ParameterError("MisraGries: k must be at least 1");
  }

  void update(ItemId item) {
    ++m_;
    if (auto it = counters_.find(item); it != counters_.end()) {
      ++it->second;
      return;
    }
    if (counters_.size() < k_) {
      counters_.emplace(item, 1);
      return;
    }
    for (auto it = counters_.begin(); it != counters_.end();) {
      if (--it->second == 0) {
        it = counters_.erase(it);
      } else {
        ++it;
      }
    }
  }

  std::map<ItemId, std::uint64_t> counts() const { return {counters_.begin(), counters_.end()}; }
  std::size_t k() const { return k_; }
  std::uint64_t updates() const { return m_; }

  void account(SpaceMeter& meter, std::string_view component) const { meter.add(component, 2 * k_, 0); }

 private:
  std::size_t k_;
  std::uint64_t m_ = 0;
  std::unordered_map<ItemId, std::uint64_t> counters_;
};

inline std::map<ItemId, std::uint64_t> misra_gries(std::span<const ItemId> stream, std::size_t k) {
  MisraGriesState state(k);
  for (ItemId item : stream) state.update(item);
  return state.counts();
}

}  // namespace l2hh
