#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "l2hh/bernoulli.hpp"
#include "l2hh/config.hpp"
#include "l2hh/hashing.hpp"
#include "l2hh/sketches.hpp"
#include "l2hh/stream_core.hpp"

namespace l2hh {

/// Side 1 wins ties.
inline bool side_one_wins(const JlbpState& one, const JlbpState& zero) {
  return one.squared_norm_units() >= zero.squared_norm_units();
}
inline bool side_one_wins(const AmsSketch& one, const AmsSketch& zero) { return one.estimate() >= zero.estimate(); }

/// Splits the universe by a hash bit A_j and runs one process per side; the
/// output bit names the side with the larger norm (JLBP) or F2 estimate (AMS).
template <class Process>
class Pair {
 public:
  Pair(PolyHashSeed split, Process side0, Process side1)
      : split_(split), sides_{std::move(side0), std::move(side1)} {}

  int route(const PolyPowers& p) const { return bit_of(split_, p); }
  int route(ItemId item) const { return bit_of(split_, item); }

  /// `input` is whatever the side process consumes: a JlColumn for JLBP,
  /// PolyPowers for AMS. Returns the side the item was routed to.
  template <class Input>
  int update(const PolyPowers& p, const Input& input) {
    const int side = route(p);
    sides_[side].update(input);
    return side;
  }

  /// New split and side seeds, state cleared (AMS mode).
  void rekey(PolyHashSeed split, EntrySeed key0, EntrySeed key1) {
    split_ = split;
    sides_[0].rekey(key0);
    sides_[1].rekey(key1);
  }

  int bit() const { return side_one_wins(sides_[1], sides_[0]) ? 1 : 0; }

  const PolyHashSeed& split() const { return split_; }
  const Process& side(int b) const { return sides_[b]; }

  void account(SpaceMeter& meter, std::string_view component) const {
    meter.add(component, 0, 4);
    sides_[0].account(meter, component);
    sides_[1].account(meter, component);
  }

 private:
  PolyHashSeed split_;
  std::array<Process, 2> sides_;
};

using JlbpPair = Pair<JlbpState>;
using AmsPair = Pair<AmsSketch>;

inline JlbpPair make_jlbp_pair(const JlEmbedding& t, EntrySeed key, std::uint32_t d) {
  return JlbpPair(PolyHashSeed::from(key.child("A")), JlbpState(t, key.child("Z0"), d),
                  JlbpState(t, key.child("Z1"), d));
}

inline AmsPair make_ams_pair(EntrySeed key, std::uint32_t rows, std::uint32_t cols) {
  return AmsPair(PolyHashSeed::from(key.child("B")), AmsSketch(key.child("R0"), rows, cols),
                 AmsSketch(key.child("R1"), rows, cols));
}

/// L independent JLBP pairs. An update is accepted into the amplified
/// substream when at least ceil(0.9 L) pairs currently favour the item's side.
class Amplifier {
 public:
  Amplifier(const JlEmbedding& t, EntrySeed key, std::uint32_t L, std::uint32_t d) : bits_(L, 1) {
    if (L == 0) throw ParameterError("Amplifier: L must be positive");
    pairs_.reserve(L);
    for (std::uint32_t l = 0; l < L; ++l) pairs_.push_back(make_jlbp_pair(t, key.child(l), d));
    threshold_ = (9 * L + 9) / 10;
  }

  bool update(const PolyPowers& p, const JlColumn& col) {
    std::uint32_t agree = 0;
    for (std::size_t l = 0; l < pairs_.size(); ++l) {
      const int side = pairs_[l].update(p, col);
      bits_[l] = static_cast<std::uint8_t>(pairs_[l].bit());
      agree += side == bits_[l] ? 1 : 0;
    }
    return agree >= threshold_;
  }

  /// M_{j,t}: pairs whose current bit matches A_{l,j}.
  std::uint32_t matches(ItemId j) const {
    const PolyPowers p(j);
    std::uint32_t agree = 0;
    for (std::size_t l = 0; l < pairs_.size(); ++l) agree += pairs_[l].route(p) == bits_[l] ? 1 : 0;
    return agree;
  }

  std::uint32_t size() const { return static_cast<std::uint32_t>(pairs_.size()); }
  std::uint32_t threshold() const { return threshold_; }
  std::span<const std::uint8_t> bits() const { return bits_; }
  const JlbpPair& pair(std::size_t l) const { return pairs_[l]; }

  void account(SpaceMeter& meter, std::string_view component) const {
    for (const auto& pr : pairs_) pr.account(meter, component);
    meter.add(component, 1, 0);  // the L current bits pack into one word
  }

 private:
  std::vector<JlbpPair> pairs_;
  std::vector<std::uint8_t> bits_;
  std::uint32_t threshold_ = 1;
};

struct RoundBoundary {
  std::uint64_t position = 0;  // index in the timed substream, 1-based
  std::uint64_t round = 0;     // threshold exponent reached
};

/// Emits a round boundary whenever the process norm first exceeds
/// (1 + 1/tau)^r. Several thresholds crossed by one update yield one event.
class Timer {
 public:
  Timer(const JlEmbedding& t, EntrySeed z_key, std::uint32_t d, std::uint64_t tau)
      : process_(t, z_key, d), growth_(1.0 + 1.0 / static_cast<double>(tau)), threshold_(growth_) {
    if (tau == 0) throw ParameterError("Timer: tau must be positive");
  }

  std::optional<RoundBoundary> update(const JlColumn& col) {
    process_.update(col);
    ++position_;
    const double norm = process_.norm();
    if (!(norm > threshold_)) return std::nullopt;
    while (norm > threshold_) {
      threshold_ *= growth_;
      ++next_round_;
    }
    return RoundBoundary{position_, next_round_ - 1};
  }

  std::uint64_t position() const { return position_; }
  /// Smallest r >= 1 not yet crossed.
  std::uint64_t next_round() const { return next_round_; }
  double threshold() const { return threshold_; }
  const JlbpState& process() const { return process_; }

  void account(SpaceMeter& meter, std::string_view component) const {
    process_.account(meter, component);
    meter.add(component, 2, 0);  // round index, threshold
  }

 private:
  JlbpState process_;
  double growth_;
  double threshold_;
  std::uint64_t next_round_ = 1;
  std::uint64_t position_ = 0;
};

/// A closed sieve round: the round's seed word (from which B_{r,.} is
/// rederived) and the final bit of its pair.
struct RoundRecord {
  std::uint64_t seed_word = 0;
  int bit = 1;

  static EntrySeed key_of(std::uint64_t seed_word) { return EntrySeed{seed_word, 0x726f756e64ULL}; }
  PolyHashSeed split() const { return PolyHashSeed::from(key_of(seed_word).child("B")); }
};

/// Rolling window of the last R closed rounds plus one open round running an
/// AMS-mode pair.
class Sieve {
 public:
  Sieve(EntrySeed key, std::uint32_t R, std::uint32_t ams_rows, std::uint32_t ams_cols)
      : key_(key), capacity_(R), ams_rows_(ams_rows), ams_cols_(ams_cols), open_(open_round(0)) {
    if (R == 0) throw ParameterError("Sieve: R must be positive");
  }

  void update(const PolyPowers& p) {
    open_.update(p, p);
    ++open_updates_;
  }

  void close_round() {
    closed_.push_back(RoundRecord{open_seed_, open_.bit()});
    if (closed_.size() > capacity_) closed_.pop_front();
    ++rounds_closed_;
    open_seed_ = prf(key_, rounds_closed_);
    const EntrySeed k = RoundRecord::key_of(open_seed_);
    open_.rekey(PolyHashSeed::from(k.child("B")), k.child("R0"), k.child("R1"));
    open_updates_ = 0;
  }

  const std::deque<RoundRecord>& closed() const { return closed_; }
  RoundRecord open_record() const { return RoundRecord{open_seed_, open_.bit()}; }
  std::uint64_t open_updates() const { return open_updates_; }
  std::uint64_t rounds_closed() const { return rounds_closed_; }
  std::uint32_t capacity() const { return capacity_; }
  const AmsPair& open_pair() const { return open_; }

  /// Metered at capacity: R closed records of two words each.
  void account(SpaceMeter& meter, std::string_view component) const {
    meter.add(component, capacity_, capacity_);
    meter.add(component, 1, 1);  // open round seed word, update count
    open_.account(meter, component);
  }

 private:
  AmsPair open_round(std::uint64_t index) {
    open_seed_ = prf(key_, index);
    return make_ams_pair(RoundRecord::key_of(open_seed_), ams_rows_, ams_cols_);
  }

  EntrySeed key_;
  std::uint32_t capacity_;
  std::uint32_t ams_rows_;
  std::uint32_t ams_cols_;
  std::uint64_t open_seed_ = 0;
  AmsPair open_;
  std::uint64_t open_updates_ = 0;
  std::uint64_t rounds_closed_ = 0;
  std::deque<RoundRecord> closed_;
};

/// argmax_j #{r : B_{r,j} = b_r} over `domain`; ties go to the smallest id.
inline std::optional<ItemId> selector_select(std::span<const RoundRecord> records, std::span<const ItemId> domain) {
  if (records.empty() || domain.empty()) return std::nullopt;
  std::vector<PolyHashSeed> splits;
  splits.reserve(records.size());
  for (const auto& r : records) splits.push_back(r.split());
  std::optional<ItemId> best;
  std::size_t best_matches = 0;
  for (ItemId j : domain) {
    const PolyPowers p(j);
    std::size_t matches = 0;
    for (std::size_t r = 0; r < records.size(); ++r) matches += bit_of(splits[r], p) == records[r].bit ? 1 : 0;
    if (!best || matches > best_matches || (matches == best_matches && j < *best)) {
      best = j;
      best_matches = matches;
    }
  }
  return best;
}

/// Selector over the full universe [0, n).
inline std::optional<ItemId> selector_select(std::span<const RoundRecord> records, std::uint64_t n) {
  if (records.empty() || n == 0) return std::nullopt;
  std::vector<PolyHashSeed> splits;
  splits.reserve(records.size());
  for (const auto& r : records) splits.push_back(r.split());
  ItemId best = 0;
  std::size_t best_matches = 0;
  for (ItemId j = 0; j < n; ++j) {
    const PolyPowers p(j);
    std::size_t matches = 0;
    for (std::size_t r = 0; r < records.size(); ++r) matches += bit_of(splits[r], p) == records[r].bit ? 1 : 0;
    if (j == 0 || matches > best_matches) {
      best = j;
      best_matches = matches;
    }
  }
  return best;
}

/// Single heavy-hitter finder: Amplifier filters the stream, Timer cuts the
/// amplified substream into rounds, Sieve extracts one bit per round, and
/// Selector decodes the item from the last R rounds.
class CountSieve {
 public:
  /// `config` must be resolved. `t` is shared by every process; its key is
  /// metered by the owner when `owns_embedding` is false.
  CountSieve(const Config& config, const JlEmbedding& t, EntrySeed key, bool owns_embedding = true)
      : t_(t),
        n_(config.n),
        owns_embedding_(owns_embedding),
        amplifier_(t, key.child("amp"), config.L, config.d),
        timer_(t, key.child("timer"), config.d, config.tau),
        sieve_(key.child("sieve"), config.R, config.sieve_ams_rows, config.sieve_ams_cols) {}

  void update(ItemId item) { update(t_.column(item), PolyPowers(item)); }

  void update(const JlColumn& col, const PolyPowers& p) {
    ++count_;
    if (!amplifier_.update(p, col)) return;
    ++accepted_;
    const auto boundary = timer_.update(col);
    sieve_.update(p);
    if (boundary) {
      ++boundaries_;
      sieve_.close_round();
    }
  }

  std::optional<ItemId> finalize() const {
    return finalize_with([this](std::span<const RoundRecord> r) { return selector_select(r, n_); });
  }

  /// Selector restricted to `domain`, the items that can reach this instance.
  std::optional<ItemId> finalize(std::span<const ItemId> domain) const {
    return finalize_with([domain](std::span<const RoundRecord> r) { return selector_select(r, domain); });
  }

  std::uint64_t update_count() const { return count_; }
  std::uint64_t accepted_count() const { return accepted_; }
  std::uint64_t boundary_count() const { return boundaries_; }
  const Amplifier& amplifier() const { return amplifier_; }
  const Timer& timer() const { return timer_; }
  const Sieve& sieve() const { return sieve_; }

  void account(SpaceMeter& meter, std::string_view prefix) const {
    const std::string p(prefix);
    amplifier_.account(meter, p + "amplifier");
    timer_.account(meter, p + "timer");
    sieve_.account(meter, p + "sieve");
    if (owns_embedding_) meter.add(p + "embedding", 0, 2);
  }

 private:
  template <class Select>
  std::optional<ItemId> finalize_with(Select select) const {
    const auto& closed = sieve_.closed();
    if (!closed.empty()) {
      const std::vector<RoundRecord> records(closed.begin(), closed.end());
      return select(records);
    }
    if (sieve_.open_updates() == 0) return std::nullopt;
    const RoundRecord open = sieve_.open_record();
    return select(std::span<const RoundRecord>(&open, 1));
  }

  JlEmbedding t_;
  std::uint64_t n_;
  bool owns_embedding_;
  Amplifier amplifier_;
  Timer timer_;
  Sieve sieve_;
  std::uint64_t count_ = 0;
  std::uint64_t accepted_ = 0;
  std::uint64_t boundaries_ = 0;
};

}  // namespace l2hh
