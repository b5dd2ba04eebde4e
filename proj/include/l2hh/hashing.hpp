#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "l2hh/errors.hpp"
#include "l2hh/stream_core.hpp"

namespace l2hh {

inline constexpr std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

/// Arithmetic modulo the Mersenne prime 2^61 - 1.
struct Mersenne61 {
  static constexpr std::uint64_t P = (std::uint64_t{1} << 61) - 1;

  static constexpr std::uint64_t reduce(std::uint64_t x) {
    std::uint64_t r = (x & P) + (x >> 61);
    return r >= P ? r - P : r;
  }
  static constexpr std::uint64_t add(std::uint64_t a, std::uint64_t b) {
    std::uint64_t r = a + b;
    return r >= P ? r - P : r;
  }
  static constexpr std::uint64_t mul(std::uint64_t a, std::uint64_t b) {
    const unsigned __int128 z = static_cast<unsigned __int128>(a) * b;
    std::uint64_t r = (static_cast<std::uint64_t>(z) & P) + static_cast<std::uint64_t>(z >> 61);
    return r >= P ? r - P : r;
  }
};

/// Generic small prime field; used by tests to check polynomial independence
/// exhaustively over a tiny modulus.
template <std::uint64_t Prime>
struct SmallPrimeField {
  static constexpr std::uint64_t P = Prime;
  static constexpr std::uint64_t reduce(std::uint64_t x) { return x % P; }
  static constexpr std::uint64_t add(std::uint64_t a, std::uint64_t b) { return (a + b) % P; }
  static constexpr std::uint64_t mul(std::uint64_t a, std::uint64_t b) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % P);
  }
};

/// 128-bit key naming one pseudorandom object. Keys form a tree: children are
/// derived from a parent key and a role label or index.
struct EntrySeed {
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;

  static EntrySeed from_master(std::uint64_t master_seed) {
    const std::uint64_t a = mix64(master_seed ^ 0x6a09e667f3bcc908ULL);
    return EntrySeed{a, mix64(a ^ master_seed ^ 0xbb67ae8584caa73bULL)};
  }

  EntrySeed child(std::uint64_t tag) const {
    const std::uint64_t a = mix64(hi ^ mix64(tag + 0x3c6ef372fe94f82bULL));
    const std::uint64_t b = mix64(lo + 0xa54ff53a5f1d36f1ULL * (tag + 1) + a);
    return EntrySeed{mix64(a ^ (b << 1)), b};
  }

  EntrySeed child(std::string_view label) const {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char ch : label) {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
    return child(mix64(h) ^ 0x510e527fade682d1ULL);
  }

  friend bool operator==(const EntrySeed&, const EntrySeed&) = default;
};

/// Counter-based pseudorandom function: 64 random bits for (key, counter).
/// wyrand-style: one 64x64->128 multiply folded to 64 bits.
inline std::uint64_t prf(const EntrySeed& key, std::uint64_t counter) {
  const std::uint64_t s = key.lo + counter * 0xa0761d6478bd642fULL;
  const unsigned __int128 t = static_cast<unsigned __int128>(s ^ key.hi) * (s ^ 0xe7037ed1a0b428dbULL);
  return static_cast<std::uint64_t>(t >> 64) ^ static_cast<std::uint64_t>(t);
}

/// Degree-3 polynomial over GF(2^61 - 1); coefficients ordered (a3, a2, a1, a0).
/// Evaluations at distinct points are 4-wise independent.
struct PolyHashSeed {
  std::array<std::uint64_t, 4> coefficients{};

  static PolyHashSeed from(const EntrySeed& key) {
    PolyHashSeed s;
    for (std::uint64_t i = 0; i < 4; ++i) {
      s.coefficients[i] = Mersenne61::reduce(prf(key, i) >> 3);
    }
    return s;
  }

  friend bool operator==(const PolyHashSeed&, const PolyHashSeed&) = default;
};

template <class Field = Mersenne61>
std::uint64_t eval_poly(const PolyHashSeed& seed, std::uint64_t x) {
  const std::uint64_t xr = Field::reduce(x);
  std::uint64_t acc = Field::reduce(seed.coefficients[0]);
  for (std::size_t i = 1; i < 4; ++i) {
    acc = Field::add(Field::mul(acc, xr), Field::reduce(seed.coefficients[i]));
  }
  return acc;
}

/// x, x^2, x^3 modulo 2^61 - 1, computed once per update and shared by every
/// polynomial hash evaluated on that item.
struct PolyPowers {
  std::uint64_t x1 = 0, x2 = 0, x3 = 0;

  PolyPowers() = default;
  explicit PolyPowers(ItemId item) {
    x1 = Mersenne61::reduce(item);
    x2 = Mersenne61::mul(x1, x1);
    x3 = Mersenne61::mul(x2, x1);
  }
};

inline std::uint64_t eval_poly(const PolyHashSeed& seed, const PolyPowers& p) {
  using u128 = unsigned __int128;
  const auto& a = seed.coefficients;
  // every term is below 2^122, so the sum fits and one fold suffices
  const u128 z = static_cast<u128>(a[0]) * p.x3 + static_cast<u128>(a[1]) * p.x2 + static_cast<u128>(a[2]) * p.x1 + a[3];
  const u128 f = (z & Mersenne61::P) + (z >> 61);  // < 2^64
  return Mersenne61::reduce(static_cast<std::uint64_t>(f & Mersenne61::P) + static_cast<std::uint64_t>(f >> 61));
}

inline int bit_of(const PolyHashSeed& seed, ItemId x) { return static_cast<int>(eval_poly(seed, x) & 1U); }
inline int bit_of(const PolyHashSeed& seed, const PolyPowers& p) { return static_cast<int>(eval_poly(seed, p) & 1U); }
inline int sign_of(const PolyHashSeed& seed, ItemId x) { return 1 - 2 * bit_of(seed, x); }
inline int sign_of(const PolyHashSeed& seed, const PolyPowers& p) { return 1 - 2 * bit_of(seed, p); }

inline std::uint32_t bucket_of(const PolyHashSeed& seed, ItemId x, std::uint32_t buckets) {
  return static_cast<std::uint32_t>(eval_poly(seed, x) % buckets);
}
inline std::uint32_t bucket_of(const PolyHashSeed& seed, const PolyPowers& p, std::uint32_t buckets) {
  return static_cast<std::uint32_t>(eval_poly(seed, p) % buckets);
}

inline constexpr std::uint32_t words_for_bits(std::uint32_t bits) { return (bits + 63) / 64; }

/// Packed sign matrix with rows of `cols` entries; bit set means -1. Row r,
/// word w lives at counter r * words_for_bits(cols) + w of the key.
inline std::uint64_t sign_word(const EntrySeed& key, std::uint32_t cols, std::uint64_t row, std::uint32_t word) {
  const std::uint32_t words = words_for_bits(cols);
  std::uint64_t bits = prf(key, row * words + word);
  const std::uint32_t tail = cols % 64;
  if (tail != 0 && word + 1 == words) bits &= (std::uint64_t{1} << tail) - 1;
  return bits;
}

inline int sign_entry(const EntrySeed& key, std::uint32_t cols, std::uint64_t row, std::uint32_t col) {
  return ((sign_word(key, cols, row, col / 64) >> (col % 64)) & 1U) ? -1 : 1;
}

/// Entry (row, col) of the dense k x n random-sign JL matrix, +-1/sqrt(k).
/// Column `col` is stored contiguously, so a whole column is ceil(k/64) PRF calls.
inline double jl_entry(const EntrySeed& key, std::uint32_t k, std::uint32_t row, ItemId col) {
  if (row >= k) throw ParameterError("jl_entry: row " + std::to_string(row) + " >= k");
  return sign_entry(key, k, col, row) / std::sqrt(static_cast<double>(k));
}

/// Maximum supported JL dimension.
inline constexpr std::uint32_t kMaxJlDim = 4096;

/// One column T e_i in packed sign form.
struct JlColumn {
  ItemId item = 0;
  bool identity = false;
  std::uint32_t words = 0;
  std::array<std::uint64_t, words_for_bits(kMaxJlDim)> bits{};

  std::span<const std::uint64_t> span() const { return {bits.data(), words}; }
};

/// The shared JL transformation T. A pure function of (key, k, n); nothing but
/// the key is stored. Identity mode (k = n, T = I) reproduces the unreduced
/// Bernoulli process.
class JlEmbedding {
 public:
  JlEmbedding(EntrySeed key, std::uint32_t k, std::uint64_t n) : key_(key), k_(k), n_(n) {
    if (k == 0 || k > kMaxJlDim) throw ParameterError("JlEmbedding: k must lie in [1, 4096]");
    if (n == 0) throw ParameterError("JlEmbedding: n must be positive");
  }

  static JlEmbedding identity(std::uint64_t n) {
    if (n > kMaxJlDim) throw ParameterError("JlEmbedding::identity: n too large");
    JlEmbedding t(EntrySeed{}, static_cast<std::uint32_t>(n), n);
    t.identity_ = true;
    return t;
  }

  std::uint32_t k() const { return k_; }
  std::uint64_t n() const { return n_; }
  bool is_identity() const { return identity_; }
  const EntrySeed& key() const { return key_; }

  /// Scale mapping integer sign sums to entries of T f.
  double entry_scale() const { return identity_ ? 1.0 : 1.0 / std::sqrt(static_cast<double>(k_)); }

  void check(ItemId item) const {
    if (item >= n_) {
      throw RangeError("item " + std::to_string(item) + " outside universe of size " + std::to_string(n_));
    }
  }

  JlColumn column(ItemId item) const {
    check(item);
    JlColumn c;
    c.item = item;
    c.words = words_for_bits(k_);
    c.identity = identity_;
    if (identity_) return c;
    for (std::uint32_t w = 0; w < c.words; ++w) c.bits[w] = sign_word(key_, k_, item, w);
    return c;
  }

  double entry(std::uint32_t row, ItemId col) const {
    if (row >= k_) throw ParameterError("JlEmbedding::entry: row out of range");
    check(col);
    if (identity_) return row == col ? 1.0 : 0.0;
    return jl_entry(key_, k_, row, col);
  }

  /// Integer form of entry(): +-1 (or 0/1 in identity mode).
  int sign(std::uint32_t row, ItemId col) const {
    if (identity_) return row == col ? 1 : 0;
    return sign_entry(key_, k_, col, row);
  }

 private:
  EntrySeed key_;
  std::uint32_t k_;
  std::uint64_t n_;
  bool identity_ = false;
};

}  // namespace l2hh
