#pragma once

// Digit alphabet, fixed-length overlay keys, prefixes and longest-common-prefix
// arithmetic. Keys are stored digit-wise; every routing decision in the
// overlay works on one digit at a time.

#include <algorithm>
#include <compare>
#include <concepts>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "prefixcast/error.hpp"

namespace prefixcast {

using Digit = std::uint8_t;
using Rng = std::mt19937_64;

struct KeyspaceParams {
  int bits_per_digit = 4;
  int key_bits = 128;

  constexpr int alphabet_size() const { return 1 << bits_per_digit; }
  constexpr int digits_per_key() const { return key_bits / bits_per_digit; }

  void validate() const {
    if (bits_per_digit < 1 || bits_per_digit > 8)
      throw ParameterError("bits_per_digit must lie in [1, 8]");
    if (key_bits <= 0 || key_bits % bits_per_digit != 0)
      throw ParameterError("key_bits must be a positive multiple of bits_per_digit");
  }

  friend bool operator==(const KeyspaceParams&, const KeyspaceParams&) = default;
};

namespace detail {

inline void require_same_params(const KeyspaceParams& a, const KeyspaceParams& b) {
  if (a != b) throw ParameterError("digit strings use different keyspace parameters");
}

inline void check_digits(const KeyspaceParams& params, std::span<const Digit> digits) {
  const int k = params.alphabet_size();
  for (Digit d : digits)
    if (d >= k) throw ParameterError("digit outside alphabet");
}

}  // namespace detail

// A digit string of length [0, l]. The empty prefix is a prefix of every key.
class Prefix {
 public:
  explicit Prefix(KeyspaceParams params) : params_(params) { params_.validate(); }

  Prefix(KeyspaceParams params, std::vector<Digit> digits)
      : params_(params), digits_(std::move(digits)) {
    params_.validate();
    if (digits_.size() > static_cast<std::size_t>(params_.digits_per_key()))
      throw ParameterError("prefix longer than key length");
    detail::check_digits(params_, digits_);
  }

  const KeyspaceParams& params() const { return params_; }
  std::span<const Digit> digits() const { return digits_; }
  int length() const { return static_cast<int>(digits_.size()); }
  bool empty() const { return digits_.empty(); }

  friend bool operator==(const Prefix&, const Prefix&) = default;

 private:
  KeyspaceParams params_;
  std::vector<Digit> digits_;
};

// A full-length overlay identifier. Ordering is digit-lexicographic, which is
// the numeric order of the key read as a base-k integer.
class Key {
 public:
  Key(KeyspaceParams params, std::vector<Digit> digits)
      : params_(params), digits_(std::move(digits)) {
    params_.validate();
    if (digits_.size() != static_cast<std::size_t>(params_.digits_per_key()))
      throw ParameterError("key must have exactly digits_per_key digits");
    detail::check_digits(params_, digits_);
  }

  static Key zero(KeyspaceParams params) {
    params.validate();
    return Key(params, std::vector<Digit>(static_cast<std::size_t>(params.digits_per_key()), 0));
  }

  const KeyspaceParams& params() const { return params_; }
  std::span<const Digit> digits() const { return digits_; }
  int length() const { return static_cast<int>(digits_.size()); }

  Digit digit_at(int i) const {
    if (i < 0 || i >= length()) throw IndexError("digit index out of range");
    return digits_[static_cast<std::size_t>(i)];
  }

  Prefix prefix(int len) const {
    if (len < 0 || len > length()) throw IndexError("prefix length out of range");
    return Prefix(params_, std::vector<Digit>(digits_.begin(), digits_.begin() + len));
  }

  operator Prefix() const { return Prefix(params_, digits_); }

  friend bool operator==(const Key& a, const Key& b) {
    return a.params_ == b.params_ && a.digits_ == b.digits_;
  }
  friend std::strong_ordering operator<=>(const Key& a, const Key& b) {
    return std::lexicographical_compare_three_way(a.digits_.begin(), a.digits_.end(),
                                                  b.digits_.begin(), b.digits_.end());
  }

 private:
  KeyspaceParams params_;
  std::vector<Digit> digits_;
};

template <typename T>
concept DigitSequence = requires(const T& t) {
  { t.params() } -> std::convertible_to<const KeyspaceParams&>;
  { t.digits() } -> std::convertible_to<std::span<const Digit>>;
};

inline Digit digit_at(const Key& x, int i) { return x.digit_at(i); }

// Length of the longest common prefix; no allocation.
template <DigitSequence A, DigitSequence B>
int lcp_length(const A& a, const B& b) {
  detail::require_same_params(a.params(), b.params());
  auto da = a.digits();
  auto db = b.digits();
  auto [ia, ib] = std::mismatch(da.begin(), da.end(), db.begin(), db.end());
  return static_cast<int>(ia - da.begin());
}

template <DigitSequence A, DigitSequence B>
Prefix lcp(const A& a, const B& b) {
  const int len = lcp_length(a, b);
  auto da = a.digits();
  return Prefix(a.params(), std::vector<Digit>(da.begin(), da.begin() + len));
}

template <DigitSequence X>
bool is_prefix_of(const Prefix& p, const X& x) {
  detail::require_same_params(p.params(), x.params());
  auto dp = p.digits();
  auto dx = x.digits();
  if (dp.size() > dx.size()) return false;
  return std::equal(dp.begin(), dp.end(), dx.begin());
}

// |a - b| as a base-k digit string of key length; compare lexicographically.
inline std::vector<Digit> numeric_distance(const Key& a, const Key& b) {
  detail::require_same_params(a.params(), b.params());
  const Key& hi = a < b ? b : a;
  const Key& lo = a < b ? a : b;
  const int k = a.params().alphabet_size();
  std::vector<Digit> out(static_cast<std::size_t>(a.length()));
  int borrow = 0;
  for (int i = a.length() - 1; i >= 0; --i) {
    int d = int(hi.digits()[static_cast<std::size_t>(i)]) - int(lo.digits()[static_cast<std::size_t>(i)]) - borrow;
    borrow = d < 0 ? 1 : 0;
    if (d < 0) d += k;
    out[static_cast<std::size_t>(i)] = static_cast<Digit>(d);
  }
  return out;
}

// Uniform integer in [0, n) from raw generator output. Avoids
// std::uniform_int_distribution so sequences are identical on every standard
// library.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  if (n == 0) throw ParameterError("uniform_index over empty range");
  const std::uint64_t limit = Rng::max() - (Rng::max() % n + 1) % n;
  for (;;) {
    std::uint64_t v = rng();
    if (v <= limit) return v % n;
  }
}

inline Key random_key(Rng& rng, const KeyspaceParams& params) {
  params.validate();
  const int b = params.bits_per_digit;
  const Digit mask = static_cast<Digit>((1u << b) - 1u);
  std::vector<Digit> digits(static_cast<std::size_t>(params.digits_per_key()));
  std::uint64_t word = 0;
  int bits_left = 0;
  for (auto& d : digits) {
    if (bits_left < b) {
      word = rng();
      bits_left = 64;
    }
    d = static_cast<Digit>(word & mask);
    word >>= b;
    bits_left -= b;
  }
  return Key(params, std::move(digits));
}

// Deterministic key for a textual label: 64-bit FNV-1a, its digits repeated
// until the key is full.
inline Key key_from_label(std::string_view label, const KeyspaceParams& params) {
  params.validate();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  const int b = params.bits_per_digit;
  const int per_word = 64 / b;
  const std::uint64_t mask = (1ull << b) - 1ull;
  std::vector<Digit> digits(static_cast<std::size_t>(params.digits_per_key()));
  for (std::size_t i = 0; i < digits.size(); ++i) {
    const int shift = 64 - b * (static_cast<int>(i % static_cast<std::size_t>(per_word)) + 1);
    digits[i] = static_cast<Digit>((h >> shift) & mask);
  }
  return Key(params, std::move(digits));
}

// Lowercase hex when b == 4, otherwise dash-separated decimal digits.
template <DigitSequence X>
std::string to_string(const X& x) {
  std::string out;
  if (x.params().bits_per_digit == 4) {
    static constexpr char kHex[] = "0123456789abcdef";
    for (Digit d : x.digits()) out.push_back(kHex[d]);
    return out;
  }
  bool first = true;
  for (Digit d : x.digits()) {
    if (!first) out.push_back('-');
    out += std::to_string(d);
    first = false;
  }
  return out;
}

inline Key parse_key(std::string_view text, const KeyspaceParams& params) {
  params.validate();
  std::vector<Digit> digits;
  if (params.bits_per_digit == 4) {
    for (char c : text) {
      if (c >= '0' && c <= '9') digits.push_back(static_cast<Digit>(c - '0'));
      else if (c >= 'a' && c <= 'f') digits.push_back(static_cast<Digit>(c - 'a' + 10));
      else throw ParameterError("invalid hex digit in key literal");
    }
  } else {
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const std::size_t dash = std::min(text.find('-', pos), text.size());
      const auto token = text.substr(pos, dash - pos);
      if (token.empty() || token.size() > 3 ||
          !std::all_of(token.begin(), token.end(), [](char c) { return c >= '0' && c <= '9'; }))
        throw ParameterError("invalid digit in key literal");
      const int v = std::stoi(std::string(token));
      if (v >= params.alphabet_size()) throw ParameterError("digit outside alphabet");
      digits.push_back(static_cast<Digit>(v));
      pos = dash + 1;
    }
  }
  if (digits.size() != static_cast<std::size_t>(params.digits_per_key()))
    throw ParameterError("key literal has wrong length");
  return Key(params, std::move(digits));
}

}  // namespace prefixcast
