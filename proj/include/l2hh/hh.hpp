#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include <nlohmann/json.hpp>

#include "l2hh/config.hpp"
#include "l2hh/countsieve.hpp"
#include "l2hh/hashing.hpp"
#include "l2hh/sketches.hpp"
#include "l2hh/stream_core.hpp"

namespace l2hh {

struct ReportedItem {
  ItemId id = 0;
  double est = 0.0;
};

struct HeavyHittersReport {
  double epsilon = 0.0;
  double f2_hat = 0.0;
  std::vector<ReportedItem> items;
  std::size_t candidate_count = 0;  // |H-hat| before filtering; not serialized

  bool contains(ItemId id) const {
    return std::any_of(items.begin(), items.end(), [id](const ReportedItem& r) { return r.id == id; });
  }
};

inline void to_json(nlohmann::json& j, const HeavyHittersReport& r) {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& it : r.items) items.push_back({{"id", it.id}, {"est", it.est}});
  j = nlohmann::json{{"epsilon", r.epsilon}, {"f2_hat", r.f2_hat}, {"items", std::move(items)}};
}

inline void from_json(const nlohmann::json& j, HeavyHittersReport& r) {
  j.at("epsilon").get_to(r.epsilon);
  j.at("f2_hat").get_to(r.f2_hat);
  r.items.clear();
  for (const auto& it : j.at("items")) r.items.push_back({it.at("id").get<ItemId>(), it.at("est").get<double>()});
}

/// l2 heavy hitters: a Q x B grid of CountSieve instances fed by bucket hashes
/// h_q, a CountSketch on independent hashes h'_q for filtering, and an AMS
/// sketch for the F2 estimate.
class HeavyHittersState {
 public:
  explicit HeavyHittersState(const Config& config)
      : config_(config.resolve()),
        root_(EntrySeed::from_master(config_.master_seed)),
        t_(root_.child("T"), config_.k, config_.n),
        countsketch_(root_.child("countsketch"), config_.Q, config_.B),
        ams_(root_.child("ams"), config_.ams_rows, config_.ams_cols) {
    for (std::uint32_t q = 0; q < config_.Q; ++q) bucket_seeds_.push_back(PolyHashSeed::from(root_.child("h").child(q)));
    sieves_.reserve(static_cast<std::size_t>(config_.Q) * config_.B);
    for (std::uint32_t q = 0; q < config_.Q; ++q) {
      for (std::uint32_t b = 0; b < config_.B; ++b) {
        sieves_.emplace_back(config_, t_, root_.child("countsieve").child(static_cast<std::uint64_t>(q) * config_.B + b),
                             false);
      }
    }
  }

  void update(ItemId item) {
    const JlColumn col = t_.column(item);
    const PolyPowers p(item);
    for (std::uint32_t q = 0; q < config_.Q; ++q) {
      sieves_[index(q, bucket_of(bucket_seeds_[q], p, config_.B))].update(col, p);
    }
    countsketch_.update(p);
    ams_.update(p);
  }

  /// Distinct items returned by the per-bucket CountSieves, before filtering.
  std::vector<ItemId> candidates() const {
    std::set<ItemId> out;
    for (std::uint32_t q = 0; q < config_.Q; ++q) {
      std::vector<std::vector<ItemId>> preimage(config_.B);
      for (ItemId j = 0; j < config_.n; ++j) preimage[bucket_of(bucket_seeds_[q], j, config_.B)].push_back(j);
      for (std::uint32_t b = 0; b < config_.B; ++b) {
        const CountSieve& cs = sieves_[index(q, b)];
        if (cs.update_count() == 0) continue;
        if (auto h = cs.finalize(preimage[b])) out.insert(*h);
      }
    }
    return {out.begin(), out.end()};
  }

  HeavyHittersReport report() const { return report(config_.epsilon); }

  /// Keeps candidates with median_q |c_{q,h'_q(i)}| > (3 eps / 4) sqrt(F2_hat).
  HeavyHittersReport report(double epsilon) const {
    HeavyHittersReport r;
    r.epsilon = epsilon;
    r.f2_hat = ams_.estimate();
    const double cut = 0.75 * epsilon * std::sqrt(r.f2_hat);
    const auto cands = candidates();
    r.candidate_count = cands.size();
    for (ItemId i : cands) {
      if (countsketch_.abs_median(i) > cut) r.items.push_back({i, countsketch_.estimate(i)});
    }
    return r;
  }

  /// Additive +-eps sqrt(F2) estimate of max_i f_i; 0 when nothing is reported.
  double linf_estimate() const { return linf_estimate(report()); }

  static double linf_estimate(const HeavyHittersReport& r) {
    if (r.items.empty()) return 0.0;
    double best = r.items.front().est;
    for (const auto& it : r.items) best = std::max(best, it.est);
    return best;
  }

  const Config& config() const { return config_; }
  const CountSieve& sieve(std::uint32_t q, std::uint32_t b) const { return sieves_[index(q, b)]; }
  std::uint32_t bucket(std::uint32_t q, ItemId item) const { return bucket_of(bucket_seeds_[q], item, config_.B); }
  const CountSketchTable& countsketch() const { return countsketch_; }
  const AmsSketch& ams() const { return ams_; }

  void account(SpaceMeter& meter) const {
    for (const auto& cs : sieves_) cs.account(meter, "hh.countsieve.");
    countsketch_.account(meter, "hh.countsketch");
    ams_.account(meter, "hh.ams");
    meter.add("hh.bucket_hashes", 0, 4ULL * bucket_seeds_.size());
    meter.add("hh.embedding", 0, 2);
  }

 private:
  std::size_t index(std::uint32_t q, std::uint32_t b) const { return static_cast<std::size_t>(q) * config_.B + b; }

  Config config_;
  EntrySeed root_;
  JlEmbedding t_;
  std::vector<PolyHashSeed> bucket_seeds_;
  std::vector<CountSieve> sieves_;
  CountSketchTable countsketch_;
  AmsSketch ams_;
};

}  // namespace l2hh
