#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "l2hh/bernoulli.hpp"
#include "l2hh/config.hpp"
#include "l2hh/countsieve.hpp"
#include "l2hh/errors.hpp"
#include "l2hh/f2track.hpp"
#include "l2hh/generators.hpp"
#include "l2hh/hh.hpp"
#include "l2hh/sketches.hpp"
#include "l2hh/stream_core.hpp"

namespace l2hh {

enum class ExperimentKind { hh, countsieve, f2, chaining, space };

inline ExperimentKind parse_experiment_kind(std::string_view s) {
  if (s == "hh") return ExperimentKind::hh;
  if (s == "countsieve") return ExperimentKind::countsieve;
  if (s == "f2") return ExperimentKind::f2;
  if (s == "chaining") return ExperimentKind::chaining;
  if (s == "space") return ExperimentKind::space;
  throw UsageError("unknown experiment kind: " + std::string(s));
}

inline std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::hh: return "hh";
    case ExperimentKind::countsieve: return "countsieve";
    case ExperimentKind::f2: return "f2";
    case ExperimentKind::chaining: return "chaining";
    case ExperimentKind::space: return "space";
  }
  return "?";
}

struct ExperimentOptions {
  std::uint64_t trials = 1;
  std::optional<std::vector<ItemId>> stream;  // same stream every trial
  std::optional<GeneratorSpec> generator;     // seed is replaced per trial
  std::uint64_t m = 0;                        // 0: kind default
  std::vector<std::uint64_t> m_values{1000, 10000, 100000};
  std::vector<std::uint64_t> deletion_n;  // empty: no deletion section
  std::uint32_t deletion_d = 1;
  std::vector<std::uint64_t> n_values{1ULL << 10, 1ULL << 14, 1ULL << 18};
  std::uint64_t checkpoint_every = 0;  // f2, first trial only
  unsigned threads = 1;
};

struct TrialOutcome {
  std::uint64_t trial = 0;
  std::uint64_t seed = 0;
  bool success = false;
  std::map<std::string, double> metrics;
};

struct ChainingRow {
  std::uint64_t m = 0;
  std::uint64_t trials = 0;
  double mean_sup_ratio = 0.0;
  double max_sup_ratio = 0.0;
  double tame_fraction = 0.0;
};

struct DeletionRow {
  std::uint64_t n = 0;
  std::uint64_t trials = 0;
  double mean_sup_ratio = 0.0;
};

struct SpaceRow {
  std::uint64_t n = 0;
  std::uint64_t countsieve_words = 0;
  std::uint64_t hh_words = 0;
  std::uint64_t countsketch_words = 0;  // ceil(log2 n) x B baseline
  double fit_ratio = 1.0;               // (hh / (lg n lglg n)) relative to the first row
};

struct F2Checkpoint {
  std::uint64_t t = 0;
  double estimate = 0.0;
  std::uint64_t oracle_f2 = 0;
};

struct ExperimentReport {
  std::string kind;
  Config config;  // resolved
  std::uint64_t trials = 0;
  std::vector<TrialOutcome> outcomes;
  std::uint64_t successes = 0;
  double success_rate = 0.0;
  std::map<std::string, double> aggregates;
  SpaceMeter space;
  std::vector<ChainingRow> chaining;
  std::vector<DeletionRow> deletion;
  std::vector<SpaceRow> space_rows;
  std::vector<F2Checkpoint> checkpoints;
};

/// Runs fn(0..count-1) on up to `threads` workers; results stay in index order.
template <class Fn>
auto run_indexed(std::uint64_t count, unsigned threads, Fn fn) -> std::vector<decltype(fn(std::uint64_t{}))> {
  std::vector<decltype(fn(std::uint64_t{}))> out(count);
  threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::uint64_t>(count, 1))));
  if (threads == 1) {
    for (std::uint64_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::uint64_t> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::uint64_t i = next++; i < count; i = next++) out[i] = fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
        next = count;
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

namespace detail {

inline std::uint64_t stream_seed(std::uint64_t trial_seed) { return mix64(trial_seed ^ 0x73747265616dULL); }

struct TrialStream {
  std::vector<ItemId> items;
  std::vector<ItemId> planted;  // empty when unknown
};

/// 3 items at 0.3 sqrt(F2) over zipf(1.0) on the remaining ids.
inline GeneratorSpec default_hh_family(std::uint64_t n, std::uint64_t m) {
  GeneratorSpec g;
  g.kind = StreamKind::planted;
  g.n = n;
  g.m = m;
  g.background = StreamKind::zipf;
  g.zipf_s = 1.0;
  const std::uint64_t p = planted_frequency_for_fraction(n, m, 3, 1.0, 0.3);
  for (ItemId id : {n / 3 + 1, n / 2 + 3, (3 * n) / 4 + 5}) g.planted.push_back({id % n, p});
  return g;
}

/// One item at frequency 4000 plus up to 1000 distinct singletons.
inline GeneratorSpec default_countsieve_family(std::uint64_t n) {
  GeneratorSpec g;
  g.kind = StreamKind::planted;
  g.n = n;
  g.background = StreamKind::distinct;
  const std::uint64_t bg = std::min<std::uint64_t>(1000, n - 1);
  g.m = 4000 + bg;
  g.planted.push_back({n / 2 + 7 < n ? n / 2 + 7 : 0, 4000});
  return g;
}

inline GeneratorSpec uniform_family(std::uint64_t n, std::uint64_t m) {
  GeneratorSpec g;
  g.kind = StreamKind::uniform;
  g.n = n;
  g.m = m;
  return g;
}

template <class Fallback>
TrialStream make_stream(const ExperimentOptions& opts, Fallback fallback, std::uint64_t seed) {
  TrialStream s;
  if (opts.stream) {
    s.items = *opts.stream;
    return s;
  }
  GeneratorSpec g = opts.generator ? *opts.generator : fallback();
  g.seed = stream_seed(seed);
  s.items = gen_stream(g);
  if (g.kind == StreamKind::planted) {
    for (const auto& p : g.planted) s.planted.push_back(p.item);
  }
  return s;
}

inline std::uint64_t pick_m(const ExperimentOptions& opts, const Config& c, std::uint64_t fallback) {
  if (opts.m != 0) return opts.m;
  if (c.m_hint != 0) return c.m_hint;
  return fallback;
}

inline Config trial_config(const Config& c, std::uint64_t trial) {
  Config t = c;
  t.master_seed = trial_seed(c.master_seed, trial);
  return t;
}

inline TrialOutcome hh_trial(const Config& c, const ExperimentOptions& opts, std::uint64_t trial) {
  const Config tc = trial_config(c, trial);
  const TrialStream s = make_stream(opts, [&] { return default_hh_family(c.n, pick_m(opts, c, 500000)); }, tc.master_seed);
  HeavyHittersState state(tc);
  FrequencyOracle oracle(c.n);
  for (ItemId item : s.items) {
    state.update(item);
    oracle.update(item);
  }
  const HeavyHittersReport r = state.report();
  const double l2 = oracle.l2();
  const double eps = c.epsilon;

  bool no_light = true;
  for (const auto& it : r.items) {
    if (static_cast<double>(oracle.count(it.id)) <= 0.5 * eps * l2) no_light = false;
  }
  const auto heavy = oracle.heavy_set(eps);
  const bool all_heavy = std::all_of(heavy.begin(), heavy.end(), [&](ItemId i) { return r.contains(i); });
  bool planted_ok = true;
  for (ItemId p : s.planted.empty() ? heavy : s.planted) {
    if (static_cast<double>(oracle.count(p)) >= eps * l2 && !r.contains(p)) planted_ok = false;
  }
  const double linf = HeavyHittersState::linf_estimate(r);
  const double linf_err = std::abs(linf - static_cast<double>(oracle.max_count()));

  TrialOutcome o;
  o.trial = trial;
  o.seed = tc.master_seed;
  o.success = planted_ok && no_light;
  o.metrics = {{"theorem_ok", (all_heavy && no_light) ? 1.0 : 0.0},
               {"linf_ok", linf_err <= eps * l2 ? 1.0 : 0.0},
               {"linf_error_over_l2", l2 > 0 ? linf_err / l2 : 0.0},
               {"reported", static_cast<double>(r.items.size())},
               {"candidates", static_cast<double>(r.candidate_count)},
               {"f2_hat_ratio", oracle.f2() > 0 ? r.f2_hat / static_cast<double>(oracle.f2()) : 0.0},
               {"max_f_over_l2", l2 > 0 ? static_cast<double>(oracle.max_count()) / l2 : 0.0}};
  return o;
}

inline TrialOutcome countsieve_trial(const Config& c, const ExperimentOptions& opts, std::uint64_t trial) {
  const Config tc = trial_config(c, trial);
  const TrialStream s = make_stream(opts, [&] { return default_countsieve_family(c.n); }, tc.master_seed);
  const EntrySeed root = EntrySeed::from_master(tc.master_seed);
  const JlEmbedding t(root.child("T"), tc.k, tc.n);
  CountSieve cs(tc, t, root.child("countsieve"));
  FrequencyOracle oracle(c.n);
  for (ItemId item : s.items) {
    cs.update(item);
    oracle.update(item);
  }
  ItemId top = 0;
  for (ItemId j = 0; j < c.n; ++j) {
    if (oracle.count(j) > oracle.count(top)) top = j;
  }
  const double top_sq = std::pow(static_cast<double>(oracle.count(top)), 2);
  const double rest = static_cast<double>(oracle.f2()) - top_sq;
  const auto got = cs.finalize();

  TrialOutcome o;
  o.trial = trial;
  o.seed = tc.master_seed;
  o.success = got && *got == top;
  o.metrics = {{"returned", got ? 1.0 : 0.0},
               {"rounds", static_cast<double>(cs.boundary_count())},
               {"accepted_fraction", s.items.empty() ? 0.0 : static_cast<double>(cs.accepted_count()) / s.items.size()},
               {"heaviness_ratio", rest > 0 ? top_sq / rest : INFINITY}};
  return o;
}

struct F2TrialResult {
  TrialOutcome outcome;
  std::vector<F2Checkpoint> checkpoints;
};

inline F2TrialResult f2_trial(const Config& c, const ExperimentOptions& opts, std::uint64_t trial, bool checkpoints) {
  const Config tc = trial_config(c, trial);
  const TrialStream s = make_stream(opts, [&] { return uniform_family(c.n, pick_m(opts, c, 100000)); }, tc.master_seed);
  F2AlwaysState state(tc);
  FrequencyOracle oracle(c.n);
  F2TrialResult res;
  double worst = 0.0;
  for (ItemId item : s.items) {
    state.update(item);
    oracle.update(item);
    const double est = state.f2_current();
    const double f2 = static_cast<double>(oracle.f2());
    worst = std::max(worst, std::abs(est - f2) / f2);
    if (checkpoints && opts.checkpoint_every != 0 && oracle.updates() % opts.checkpoint_every == 0) {
      res.checkpoints.push_back({oracle.updates(), est, oracle.f2()});
    }
  }
  TrialOutcome& o = res.outcome;
  o.trial = trial;
  o.seed = tc.master_seed;
  o.success = worst <= c.epsilon;
  const double final_err =
      oracle.f2() > 0 ? std::abs(state.f2_current() - static_cast<double>(oracle.f2())) / static_cast<double>(oracle.f2())
                      : 0.0;
  o.metrics = {{"max_rel_error", worst}, {"final_rel_error", final_err}};
  return res;
}

inline void finish(ExperimentReport& r) {
  r.successes = static_cast<std::uint64_t>(
      std::count_if(r.outcomes.begin(), r.outcomes.end(), [](const TrialOutcome& o) { return o.success; }));
  r.success_rate = r.trials == 0 ? 0.0 : static_cast<double>(r.successes) / static_cast<double>(r.trials);
}

inline double metric_rate(const std::vector<TrialOutcome>& outcomes, const std::string& key) {
  if (outcomes.empty()) return 0.0;
  double s = 0.0;
  for (const auto& o : outcomes) s += o.metrics.at(key);
  return s / static_cast<double>(outcomes.size());
}

}  // namespace detail

/// Words and random words of a single CountSieve, an HH state and a
/// ceil(log2 n)-row CountSketch at each n.
inline std::vector<SpaceRow> measure_space(const Config& base, const std::vector<std::uint64_t>& n_values) {
  std::vector<SpaceRow> rows;
  for (std::uint64_t n : n_values) {
    Config c = base;
    c.n = n;
    c.L = c.R = c.d = c.k = 0;
    c.tau = 0;
    c = c.resolve();
    const EntrySeed root = EntrySeed::from_master(c.master_seed);
    const JlEmbedding t(root.child("T"), c.k, c.n);
    SpaceMeter cs_meter;
    CountSieve(c, t, root.child("countsieve")).account(cs_meter, "countsieve.");
    SpaceMeter hh_meter;
    HeavyHittersState(c).account(hh_meter);
    SpaceMeter base_meter;
    CountSketchTable(root.child("baseline"), ceil_log2(n), c.B).account(base_meter, "countsketch");

    SpaceRow row;
    row.n = n;
    row.countsieve_words = cs_meter.total().total();
    row.hh_words = hh_meter.total().total();
    row.countsketch_words = base_meter.total().total();
    rows.push_back(row);
  }
  if (!rows.empty()) {
    auto shape = [](std::uint64_t n) {
      const double lg = std::log2(static_cast<double>(n));
      return lg * std::log2(lg);
    };
    const double c0 = static_cast<double>(rows.front().hh_words) / shape(rows.front().n);
    for (auto& row : rows) row.fit_ratio = static_cast<double>(row.hh_words) / shape(row.n) / c0;
  }
  return rows;
}

/// Trial i runs under master seed trial_seed(config.master_seed, i); the report
/// depends only on (config, options minus threads).
inline ExperimentReport run_experiment(ExperimentKind kind, const Config& config, const ExperimentOptions& opts) {
  if (opts.trials == 0) throw ParameterError("run_experiment: trials must be at least 1");
  const Config c = config.resolve();
  ExperimentReport r;
  r.kind = to_string(kind);
  r.config = c;
  r.trials = opts.trials;

  switch (kind) {
    case ExperimentKind::hh: {
      r.outcomes = run_indexed(opts.trials, opts.threads, [&](std::uint64_t i) { return detail::hh_trial(c, opts, i); });
      r.aggregates["linf_rate"] = detail::metric_rate(r.outcomes, "linf_ok");
      r.aggregates["theorem_rate"] = detail::metric_rate(r.outcomes, "theorem_ok");
      HeavyHittersState(c).account(r.space);
      break;
    }
    case ExperimentKind::countsieve: {
      r.outcomes =
          run_indexed(opts.trials, opts.threads, [&](std::uint64_t i) { return detail::countsieve_trial(c, opts, i); });
      const EntrySeed root = EntrySeed::from_master(c.master_seed);
      const JlEmbedding t(root.child("T"), c.k, c.n);
      CountSieve(c, t, root.child("countsieve")).account(r.space, "countsieve.");
      break;
    }
    case ExperimentKind::f2: {
      auto res = run_indexed(opts.trials, opts.threads,
                             [&](std::uint64_t i) { return detail::f2_trial(c, opts, i, i == 0); });
      for (auto& x : res) r.outcomes.push_back(std::move(x.outcome));
      r.checkpoints = std::move(res.front().checkpoints);
      r.aggregates["mean_max_rel_error"] = detail::metric_rate(r.outcomes, "max_rel_error");
      F2AlwaysState(c, false).account(r.space);
      break;
    }
    case ExperimentKind::chaining: {
      for (std::uint64_t m : opts.m_values) {
        auto sup = run_indexed(opts.trials, opts.threads, [&](std::uint64_t i) {
          const Config tc = detail::trial_config(c, i);
          GeneratorSpec g = opts.generator ? *opts.generator : detail::uniform_family(c.n, m);
          g.m = m;
          g.seed = detail::stream_seed(tc.master_seed);
          const auto stream = opts.stream ? *opts.stream : gen_stream(g);
          return tameness_trial(stream, tc);
        });
        ChainingRow row;
        row.m = m;
        row.trials = opts.trials;
        for (std::uint64_t i = 0; i < sup.size(); ++i) {
          row.mean_sup_ratio += sup[i].sup_ratio;
          row.max_sup_ratio = std::max(row.max_sup_ratio, sup[i].sup_ratio);
          row.tame_fraction += sup[i].tame ? 1.0 : 0.0;
          TrialOutcome o;
          o.trial = i;
          o.seed = trial_seed(c.master_seed, i);
          o.success = sup[i].tame;
          o.metrics = {{"m", static_cast<double>(m)}, {"sup_ratio", sup[i].sup_ratio}};
          r.outcomes.push_back(std::move(o));
        }
        row.mean_sup_ratio /= static_cast<double>(opts.trials);
        row.tame_fraction /= static_cast<double>(opts.trials);
        r.chaining.push_back(row);
      }
      for (std::uint64_t n : opts.deletion_n) {
        auto sup = run_indexed(opts.trials, opts.threads, [&](std::uint64_t i) {
          Config dc = detail::trial_config(config, i);
          dc.d = opts.deletion_d;
          dc.k = 0;
          return deletion_counterexample_ratio(n, dc);
        });
        DeletionRow row;
        row.n = n;
        row.trials = opts.trials;
        for (double s : sup) row.mean_sup_ratio += s;
        row.mean_sup_ratio /= static_cast<double>(opts.trials);
        r.deletion.push_back(row);
      }
      r.trials = r.outcomes.size();
      {
        const JlEmbedding t(EntrySeed::from_master(c.master_seed).child("T"), c.k, c.n);
        JlbpState(t, EntrySeed::from_master(c.master_seed).child("Z"), c.d).account(r.space, "jlbp");
      }
      break;
    }
    case ExperimentKind::space: {
      r.space_rows = measure_space(config, opts.n_values);
      for (std::size_t i = 0; i < r.space_rows.size(); ++i) {
        const SpaceRow& row = r.space_rows[i];
        bool ok = row.fit_ratio >= 0.5 && row.fit_ratio <= 2.0;
        if (i > 0) {
          const SpaceRow& prev = r.space_rows[i - 1];
          const double hh_growth = static_cast<double>(row.hh_words) / static_cast<double>(prev.hh_words);
          const double cs_growth = static_cast<double>(row.countsketch_words) / static_cast<double>(prev.countsketch_words);
          ok = ok && cs_growth > hh_growth;
        }
        TrialOutcome o;
        o.trial = i;
        o.seed = c.master_seed;
        o.success = ok;
        o.metrics = {{"n", static_cast<double>(row.n)},
                     {"countsieve_words", static_cast<double>(row.countsieve_words)},
                     {"hh_words", static_cast<double>(row.hh_words)},
                     {"countsketch_words", static_cast<double>(row.countsketch_words)},
                     {"fit_ratio", row.fit_ratio}};
        r.outcomes.push_back(std::move(o));
      }
      r.trials = r.outcomes.size();
      HeavyHittersState(c).account(r.space);
      break;
    }
  }
  detail::finish(r);
  return r;
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

/// Acceptance thresholds applied by `--assert`.
inline Verdict assess(const ExperimentReport& r) {
  char buf[256];
  if (r.kind == "hh") {
    const double linf = r.aggregates.at("linf_rate");
    std::snprintf(buf, sizeof buf, "success %.3f (>= 0.60), linf %.3f (>= 0.60)", r.success_rate, linf);
    return {r.success_rate >= 0.6 && linf >= 0.6, buf};
  }
  if (r.kind == "countsieve") {
    std::snprintf(buf, sizeof buf, "success %.3f (>= 0.85)", r.success_rate);
    return {r.success_rate >= 0.85, buf};
  }
  if (r.kind == "f2") {
    std::snprintf(buf, sizeof buf, "success %.3f (>= 0.60)", r.success_rate);
    return {r.success_rate >= 0.6, buf};
  }
  if (r.kind == "chaining") {
    if (r.chaining.empty()) return {false, "no chaining rows"};
    double lo = INFINITY, hi = 0.0;
    for (const auto& row : r.chaining) {
      lo = std::min(lo, row.mean_sup_ratio);
      hi = std::max(hi, row.mean_sup_ratio);
    }
    std::snprintf(buf, sizeof buf, "max mean sup_ratio %.3f (<= 3), spread %.3f (<= 1.5)", hi, hi / lo);
    return {hi <= 3.0 && hi / lo <= 1.5, buf};
  }
  if (r.kind == "space") {
    std::snprintf(buf, sizeof buf, "%llu of %llu sizes within 2x fit and below baseline growth",
                  static_cast<unsigned long long>(r.successes), static_cast<unsigned long long>(r.trials));
    return {r.successes == r.trials && r.trials > 0, buf};
  }
  return {false, "unknown kind"};
}

/// Growth of the deletion-stream sup_ratio from the first to the last n.
inline Verdict assess_deletion(const ExperimentReport& r, double factor = 1.5) {
  if (r.deletion.size() < 2) return {false, "need two deletion rows"};
  const double g = r.deletion.back().mean_sup_ratio / r.deletion.front().mean_sup_ratio;
  char buf[160];
  std::snprintf(buf, sizeof buf, "n=%llu: %.3f, n=%llu: %.3f, growth %.3f (>= %.2f)",
                static_cast<unsigned long long>(r.deletion.front().n), r.deletion.front().mean_sup_ratio,
                static_cast<unsigned long long>(r.deletion.back().n), r.deletion.back().mean_sup_ratio, g, factor);
  return {g >= factor, buf};
}

inline void to_json(nlohmann::json& j, const TrialOutcome& o) {
  j = nlohmann::json{{"trial", o.trial}, {"seed", o.seed}, {"success", o.success}, {"metrics", o.metrics}};
}

inline void to_json(nlohmann::json& j, const ExperimentReport& r) {
  nlohmann::json space = nlohmann::json::object();
  for (const auto& [name, e] : r.space.report()) space[name] = {{"words", e.words}, {"random_words", e.random_words}};
  j = nlohmann::json{{"kind", r.kind},
                     {"config", r.config},
                     {"trials", r.trials},
                     {"successes", r.successes},
                     {"success_rate", r.success_rate},
                     {"aggregates", r.aggregates},
                     {"outcomes", r.outcomes},
                     {"space", space},
                     {"space_total", {{"words", r.space.total().words}, {"random_words", r.space.total().random_words}}}};
  if (!r.chaining.empty()) {
    auto& rows = j["chaining"] = nlohmann::json::array();
    for (const auto& c : r.chaining) {
      rows.push_back({{"m", c.m},
                      {"trials", c.trials},
                      {"mean_sup_ratio", c.mean_sup_ratio},
                      {"max_sup_ratio", c.max_sup_ratio},
                      {"tame_fraction", c.tame_fraction}});
    }
  }
  if (!r.deletion.empty()) {
    auto& rows = j["deletion"] = nlohmann::json::array();
    for (const auto& d : r.deletion) rows.push_back({{"n", d.n}, {"trials", d.trials}, {"mean_sup_ratio", d.mean_sup_ratio}});
  }
  if (!r.space_rows.empty()) {
    auto& rows = j["space_rows"] = nlohmann::json::array();
    for (const auto& s : r.space_rows) {
      rows.push_back({{"n", s.n},
                      {"countsieve_words", s.countsieve_words},
                      {"hh_words", s.hh_words},
                      {"countsketch_words", s.countsketch_words},
                      {"fit_ratio", s.fit_ratio}});
    }
  }
  if (!r.checkpoints.empty()) {
    auto& rows = j["checkpoints"] = nlohmann::json::array();
    for (const auto& c : r.checkpoints) rows.push_back({{"t", c.t}, {"estimate", c.estimate}, {"oracle_f2", c.oracle_f2}});
  }
}

/// Kind-specific CSV: chaining and space emit their row tables, the rest one
/// line per trial with metric columns in key order.
inline void write_csv(std::ostream& out, const ExperimentReport& r) {
  if (r.kind == "chaining") {
    out << "section,m_or_n,trials,mean_sup_ratio,max_sup_ratio,tame_fraction\n";
    for (const auto& c : r.chaining) {
      out << "chaining," << c.m << ',' << c.trials << ',' << c.mean_sup_ratio << ',' << c.max_sup_ratio << ','
          << c.tame_fraction << '\n';
    }
    for (const auto& d : r.deletion) out << "deletion," << d.n << ',' << d.trials << ',' << d.mean_sup_ratio << ",,\n";
    return;
  }
  if (r.kind == "space") {
    out << "n,countsieve_words,hh_words,countsketch_words,fit_ratio\n";
    for (const auto& s : r.space_rows) {
      out << s.n << ',' << s.countsieve_words << ',' << s.hh_words << ',' << s.countsketch_words << ',' << s.fit_ratio
          << '\n';
    }
    return;
  }
  std::set<std::string> keys;
  for (const auto& o : r.outcomes) {
    for (const auto& [k, v] : o.metrics) keys.insert(k);
  }
  out << "trial,seed,success";
  for (const auto& k : keys) out << ',' << k;
  out << '\n';
  for (const auto& o : r.outcomes) {
    out << o.trial << ',' << o.seed << ',' << (o.success ? 1 : 0);
    for (const auto& k : keys) {
      out << ',';
      if (auto it = o.metrics.find(k); it != o.metrics.end()) out << it->second;
    }
    out << '\n';
  }
}

inline void write_checkpoints_csv(std::ostream& out, const std::vector<F2Checkpoint>& rows) {
  out << "t,estimate,oracle_f2\n";
  for (const auto& c : rows) out << c.t << ',' << c.estimate << ',' << c.oracle_f2 << '\n';
}

}  // namespace l2hh
