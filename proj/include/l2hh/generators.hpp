#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "l2hh/errors.hpp"
#include "l2hh/hashing.hpp"
#include "l2hh/stream_core.hpp"

namespace l2hh {

enum class StreamKind { uniform, zipf, planted, single, distinct };
enum class StreamOrder { shuffled, adversarial_heavy_last };

struct PlantedItem {
  ItemId item = 0;
  std::uint64_t frequency = 0;
};

/// Synthetic stream description. For `planted`, the m - sum(planted) other
/// updates come from `background` over the non-planted ids. `distinct` emits
/// each id at most once, in increasing order before shuffling.
struct GeneratorSpec {
  StreamKind kind = StreamKind::uniform;
  std::uint64_t n = 1024;
  std::uint64_t m = 0;
  double zipf_s = 1.0;
  std::vector<PlantedItem> planted;
  StreamKind background = StreamKind::uniform;
  ItemId single_item = 0;
  StreamOrder order = StreamOrder::shuffled;
  std::uint64_t seed = 0;
};

inline StreamKind parse_stream_kind(std::string_view s) {
  if (s == "uniform") return StreamKind::uniform;
  if (s == "zipf") return StreamKind::zipf;
  if (s == "planted") return StreamKind::planted;
  if (s == "single") return StreamKind::single;
  if (s == "distinct") return StreamKind::distinct;
  throw UsageError("unknown stream kind: " + std::string(s));
}

inline StreamOrder parse_stream_order(std::string_view s) {
  if (s == "shuffled") return StreamOrder::shuffled;
  if (s == "adversarial-heavy-last") return StreamOrder::adversarial_heavy_last;
  throw UsageError("unknown stream order: " + std::string(s));
}

/// Normalized zipf(s) weights over ranks 0..count-1.
inline std::vector<double> zipf_weights(std::uint64_t count, double s) {
  std::vector<double> w(count);
  double total = 0.0;
  for (std::uint64_t r = 0; r < count; ++r) total += (w[r] = std::pow(static_cast<double>(r + 1), -s));
  for (double& x : w) x /= total;
  return w;
}

namespace detail {

inline void draw_background(StreamKind kind, const std::vector<ItemId>& ids, std::uint64_t count, double s,
                            std::mt19937_64& rng, std::vector<ItemId>& out) {
  if (count == 0) return;
  if (ids.empty()) throw ParameterError("gen_stream: no ids left for the background");
  switch (kind) {
    case StreamKind::uniform: {
      std::uniform_int_distribution<std::size_t> pick(0, ids.size() - 1);
      for (std::uint64_t i = 0; i < count; ++i) out.push_back(ids[pick(rng)]);
      break;
    }
    case StreamKind::zipf: {
      const auto w = zipf_weights(ids.size(), s);
      std::vector<double> cdf(w.size());
      std::partial_sum(w.begin(), w.end(), cdf.begin());
      std::uniform_real_distribution<double> u(0.0, cdf.back());
      for (std::uint64_t i = 0; i < count; ++i) {
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u(rng));
        out.push_back(ids[std::min<std::size_t>(it - cdf.begin(), ids.size() - 1)]);
      }
      break;
    }
    case StreamKind::distinct: {
      if (count > ids.size()) throw ParameterError("gen_stream: distinct background longer than the id pool");
      out.insert(out.end(), ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(count));
      break;
    }
    case StreamKind::single:
      out.insert(out.end(), count, ids.front());
      break;
    case StreamKind::planted:
      throw ParameterError("gen_stream: background cannot itself be planted");
  }
}

}  // namespace detail

/// Deterministic in `spec`. Length is exactly m; planted items occur exactly
/// their planted frequency.
inline std::vector<ItemId> gen_stream(const GeneratorSpec& spec) {
  if (spec.n == 0) throw ParameterError("gen_stream: n must be positive");
  std::mt19937_64 rng(spec.seed);
  std::vector<ItemId> out;
  out.reserve(spec.m);

  std::uint64_t heavy_total = 0;
  std::unordered_set<ItemId> planted_ids;
  if (spec.kind == StreamKind::planted) {
    for (const auto& p : spec.planted) {
      if (p.item >= spec.n) throw ParameterError("gen_stream: planted item out of range");
      if (!planted_ids.insert(p.item).second) throw ParameterError("gen_stream: planted item listed twice");
      heavy_total += p.frequency;
    }
    if (heavy_total > spec.m) throw ParameterError("gen_stream: planted frequencies exceed m");
  }
  if (spec.kind == StreamKind::single && spec.single_item >= spec.n) {
    throw ParameterError("gen_stream: single item out of range");
  }

  std::vector<ItemId> ids;
  ids.reserve(spec.n);
  for (ItemId j = 0; j < spec.n; ++j) {
    if (!planted_ids.count(j)) ids.push_back(j);
  }

  std::vector<ItemId> background;
  switch (spec.kind) {
    case StreamKind::planted:
      detail::draw_background(spec.background, ids, spec.m - heavy_total, spec.zipf_s, rng, background);
      break;
    case StreamKind::single:
      background.assign(spec.m, spec.single_item);
      break;
    default:
      detail::draw_background(spec.kind, ids, spec.m, spec.zipf_s, rng, background);
  }

  std::vector<ItemId> heavy;
  heavy.reserve(heavy_total);
  for (const auto& p : spec.planted) {
    if (spec.kind == StreamKind::planted) heavy.insert(heavy.end(), p.frequency, p.item);
  }

  if (spec.order == StreamOrder::shuffled) {
    out = std::move(background);
    out.insert(out.end(), heavy.begin(), heavy.end());
    std::shuffle(out.begin(), out.end(), rng);
    return out;
  }

  if (spec.kind != StreamKind::planted) {
    throw ParameterError("gen_stream: adversarial-heavy-last needs planted items");
  }
  const std::uint64_t tail = spec.m - (3 * spec.m) / 4;
  if (heavy_total > tail) throw ParameterError("gen_stream: planted mass does not fit in the final quarter");
  std::shuffle(background.begin(), background.end(), rng);
  const std::uint64_t head = spec.m - tail;
  out.assign(background.begin(), background.begin() + static_cast<std::ptrdiff_t>(head));
  std::vector<ItemId> last(background.begin() + static_cast<std::ptrdiff_t>(head), background.end());
  last.insert(last.end(), heavy.begin(), heavy.end());
  std::shuffle(last.begin(), last.end(), rng);
  out.insert(out.end(), last.begin(), last.end());
  return out;
}

/// Frequency p such that `count` items planted at p over a zipf(s)
/// background on the remaining ids satisfy p = fraction * sqrt(E[F2]).
/// Solved by fixed-point iteration on the expected background F2.
inline std::uint64_t planted_frequency_for_fraction(std::uint64_t n, std::uint64_t m, std::uint64_t count, double s,
                                                    double fraction) {
  if (count == 0 || count >= n) throw ParameterError("planted_frequency_for_fraction: bad planted count");
  if (!(fraction > 0.0) || count * fraction * fraction >= 1.0) {
    throw ParameterError("planted_frequency_for_fraction: planted items cannot all reach the fraction");
  }
  const auto w = zipf_weights(n - count, s);
  double p = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mb = static_cast<double>(m) - static_cast<double>(count) * p;
    double bg = 0.0;
    for (double x : w) bg += mb * mb * x * x + mb * x * (1.0 - x);
    const double next = fraction * std::sqrt(bg / (1.0 - static_cast<double>(count) * fraction * fraction));
    if (std::abs(next - p) < 1e-6) break;
    p = next;
  }
  const auto out = static_cast<std::uint64_t>(std::llround(p));
  if (out * count > m) throw ParameterError("planted_frequency_for_fraction: infeasible for this m");
  return out;
}

/// Seed for trial `trial` under `master`; independent of scheduling.
inline std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial) {
  return mix64(master ^ mix64(trial + 0x9e3779b97f4a7c15ULL));
}

}  // namespace l2hh
