#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "l2hh/errors.hpp"

namespace l2hh {

inline std::uint32_t ceil_log2(std::uint64_t x) {
  std::uint32_t r = 0;
  while ((std::uint64_t{1} << r) < x && r < 63) ++r;
  return r;
}

/// Algorithm parameters. Zero-valued size fields mean "derive from n and
/// epsilon"; call resolve() to obtain a fully populated copy.
struct Config {
  std::uint64_t n = 1024;
  std::uint64_t m_hint = 0;
  double epsilon = 0.25;
  double delta = 1.0 / 200.0;

  std::uint32_t L = 0;    // amplifier pairs
  std::uint32_t R = 0;    // sieve round window
  std::uint64_t tau = 0;  // round expansion, 100(R+1) when 0
  std::uint32_t d = 0;    // Bernoulli process dimension
  std::uint32_t k = 0;    // JL dimension
  double C = 3.0;         // tameness constant

  std::uint32_t Q = 0;  // heavy-hitter rows
  std::uint32_t B = 0;  // heavy-hitter buckets

  std::uint32_t ams_rows = 0;
  std::uint32_t ams_cols = 0;
  std::uint32_t sieve_ams_rows = 0;
  std::uint32_t sieve_ams_cols = 0;

  std::uint32_t f2_N = 0;
  std::uint32_t f2_R_med = 0;
  std::uint32_t f2_k = 0;

  std::uint64_t master_seed = 0x5eed;

  Config resolve() const {
    Config c = *this;
    if (c.n < 2) throw ParameterError("config: n must be at least 2");
    if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) throw ParameterError("config: epsilon must lie in (0,1)");
    if (!(c.delta > 0.0 && c.delta < 1.0)) throw ParameterError("config: delta must lie in (0,1)");
    if (!(c.C > 0.0)) throw ParameterError("config: C must be positive");

    const double lg = std::max(1.0, std::log2(static_cast<double>(c.n)));
    const std::uint32_t clg = ceil_log2(c.n);
    if (c.L == 0) c.L = std::max<std::uint32_t>(4, static_cast<std::uint32_t>(std::ceil(4.0 * std::log2(std::max(2.0, lg)))));
    if (c.R == 0) c.R = 4 * clg;
    if (c.tau == 0) c.tau = 100ULL * (c.R + 1);
    if (c.d == 0) c.d = 6;
    if (c.k == 0) c.k = std::max<std::uint32_t>(32, 8 * clg);

    const double inv_eps2 = 1.0 / (c.epsilon * c.epsilon);
    if (c.Q == 0) c.Q = static_cast<std::uint32_t>(std::ceil(4.0 * std::log2(1.0 / c.epsilon))) + 1;
    if (c.B == 0) c.B = static_cast<std::uint32_t>(std::ceil(32.0 * inv_eps2));

    if (c.ams_rows == 0) c.ams_rows = 7;
    if (c.ams_cols == 0) c.ams_cols = static_cast<std::uint32_t>(std::ceil(8.0 * inv_eps2));
    if (c.sieve_ams_rows == 0) c.sieve_ams_rows = 3;
    if (c.sieve_ams_cols == 0) c.sieve_ams_cols = 2;

    if (c.f2_N == 0) c.f2_N = static_cast<std::uint32_t>(std::ceil(8.0 * inv_eps2));
    if (c.f2_R_med == 0) c.f2_R_med = 9;
    if (c.f2_k == 0) {
      c.f2_k = std::min<std::uint32_t>(4096, std::max<std::uint32_t>(64, static_cast<std::uint32_t>(std::ceil(64.0 * inv_eps2))));
    }

    if (c.B < 2) throw ParameterError("config: B must be at least 2");
    if (c.tau == 0) throw ParameterError("config: tau must be positive");
    return c;
  }

  /// Smallest number of matching amplifier bits that accepts an update.
  std::uint32_t acceptance_threshold() const { return (9 * L + 9) / 10; }
};

inline void to_json(nlohmann::json& j, const Config& c) {
  j = nlohmann::json{{"n", c.n},
                     {"m_hint", c.m_hint},
                     {"epsilon", c.epsilon},
                     {"delta", c.delta},
                     {"L", c.L},
                     {"R", c.R},
                     {"tau", c.tau},
                     {"d", c.d},
                     {"k", c.k},
                     {"C", c.C},
                     {"Q", c.Q},
                     {"B", c.B},
                     {"ams_rows", c.ams_rows},
                     {"ams_cols", c.ams_cols},
                     {"sieve_ams_rows", c.sieve_ams_rows},
                     {"sieve_ams_cols", c.sieve_ams_cols},
                     {"f2_N", c.f2_N},
                     {"f2_R_med", c.f2_R_med},
                     {"f2_k", c.f2_k},
                     {"master_seed", c.master_seed}};
}

inline void from_json(const nlohmann::json& j, Config& c) {
  if (!j.is_object()) throw ParameterError("config: expected a JSON object");
  auto get = [&j](const char* key, auto& field) {
    if (auto it = j.find(key); it != j.end() && !it->is_null()) {
      it->get_to(field);
    }
  };
  get("n", c.n);
  get("m_hint", c.m_hint);
  get("epsilon", c.epsilon);
  get("delta", c.delta);
  get("L", c.L);
  get("R", c.R);
  get("tau", c.tau);
  get("d", c.d);
  get("k", c.k);
  get("C", c.C);
  get("Q", c.Q);
  get("B", c.B);
  get("ams_rows", c.ams_rows);
  get("ams_cols", c.ams_cols);
  get("sieve_ams_rows", c.sieve_ams_rows);
  get("sieve_ams_cols", c.sieve_ams_cols);
  get("f2_N", c.f2_N);
  get("f2_R_med", c.f2_R_med);
  get("f2_k", c.f2_k);
  get("master_seed", c.master_seed);
}

}  // namespace l2hh
