#pragma once

#include <gmpxx.h>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bcast {

using Rational = mpq_class;

enum class Arithmetic { rational, floating };

inline std::string to_string(Arithmetic mode) {
  return mode == Arithmetic::rational ? "rational" : "float";
}

inline Arithmetic parse_arithmetic(std::string_view s) {
  if (s == "rational") return Arithmetic::rational;
  if (s == "float") return Arithmetic::floating;
  throw std::invalid_argument("unknown arithmetic mode '" + std::string(s) + "'");
}

// Parses "p/q", integers and finite decimals ("0.125", "-3.5e-2") exactly.
inline Rational parse_rational(std::string_view text) {
  auto fail = [&]() -> Rational {
    throw std::invalid_argument("not a rational number: '" + std::string(text) + "'");
  };
  if (text.empty()) return fail();
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    Rational r;
    if (r.set_str(std::string(text), 10) != 0) return fail();
    if (r.get_den() == 0) return fail();
    r.canonicalize();
    return r;
  }
  std::string_view mant = text;
  long exp10 = 0;
  if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
    mant = text.substr(0, e);
    auto ex = text.substr(e + 1);
    if (!ex.empty() && ex.front() == '+') ex.remove_prefix(1);
    auto [p, ec] = std::from_chars(ex.data(), ex.data() + ex.size(), exp10);
    if (ec != std::errc{} || p != ex.data() + ex.size()) return fail();
  }
  bool negative = false;
  if (!mant.empty() && (mant.front() == '-' || mant.front() == '+')) {
    negative = mant.front() == '-';
    mant.remove_prefix(1);
  }
  std::string digits;
  bool seen_point = false, seen_digit = false;
  for (char c : mant) {
    if (c == '.' && !seen_point) {
      seen_point = true;
    } else if (c >= '0' && c <= '9') {
      digits.push_back(c);
      seen_digit = true;
      if (seen_point) --exp10;
    } else {
      return fail();
    }
  }
  if (!seen_digit) return fail();
  mpz_class num(digits, 10);
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(exp10)));
  Rational r = exp10 >= 0 ? Rational(num * scale) : Rational(num, scale);
  r.canonicalize();
  return negative ? Rational(-r) : r;
}

// Exact value of the shortest decimal that round-trips `x`, so 0.1 becomes 1/10.
inline Rational rational_from_double(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("non-finite number");
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) throw std::invalid_argument("unprintable number");
  return parse_rational(std::string_view(buf, end));
}

template <class S>
struct scalar_traits;

template <>
struct scalar_traits<Rational> {
  static constexpr bool exact = true;
  static constexpr Arithmetic mode = Arithmetic::rational;
  using key_type = Rational;
  static Rational from_rational(const Rational& r) { return r; }
  static double to_double(const Rational& r) { return r.get_d(); }
  static std::string to_string(const Rational& r) { return r.get_str(); }
  static key_type key(const Rational& r) { return r; }
};

template <>
struct scalar_traits<double> {
  static constexpr bool exact = false;
  static constexpr Arithmetic mode = Arithmetic::floating;
  // Coordinates are quantized to 12 decimal digits for atom identity.
  using key_type = std::int64_t;
  static constexpr double key_scale = 1e12;
  static double from_rational(const Rational& r) { return r.get_d(); }
  static double to_double(double x) { return x; }
  static std::string to_string(double x) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return ec == std::errc{} ? std::string(buf, end) : std::string("nan");
  }
  static key_type key(double x) { return std::llround(x * key_scale); }
};

template <class S>
using Key = std::vector<typename scalar_traits<S>::key_type>;

template <class S>
Key<S> make_key(std::span<const S> values) {
  Key<S> k;
  k.reserve(values.size());
  for (const auto& v : values) k.push_back(scalar_traits<S>::key(v));
  return k;
}

template <class S>
double to_double(const S& x) {
  return scalar_traits<S>::to_double(x);
}

template <class S>
double linf_distance(std::span<const S> a, std::span<const S> b) {
  if (a.size() != b.size()) return INFINITY;
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    S d = a[i] - b[i];
    worst = std::max(worst, std::fabs(to_double(d)));
  }
  return worst;
}

template <class S>
S sum(std::span<const S> values) {
  S total = 0;
  for (const auto& v : values) total += v;
  return total;
}

inline std::string decimal(double x, int digits = 12) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed, digits);
  return ec == std::errc{} ? std::string(buf, end) : std::string("nan");
}

}  // namespace bcast
