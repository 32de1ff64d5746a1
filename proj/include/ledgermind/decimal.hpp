#pragma once

// Exact decimal arithmetic for accounting values.
//
// Decimal is an arbitrary-precision fixed-point number (integer mantissa and
// a count of fractional digits). Money is a Decimal pinned to two fractional
// digits. Rounding is half-up in the commercial sense: ties move away from
// zero, so -0.005 becomes -0.01.

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include "ledgermind/error.hpp"

namespace ledgermind {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

namespace detail {

inline BigInt pow10(unsigned exponent) {
  BigInt result = 1;
  for (unsigned i = 0; i < exponent; ++i) result *= 10;
  return result;
}

// round(num / den) with ties away from zero; den must be positive.
inline BigInt divide_half_up(const BigInt& num, const BigInt& den) {
  if (num >= 0) return (2 * num + den) / (2 * den);
  return -((-2 * num + den) / (2 * den));
}

}  // namespace detail

class Decimal {
 public:
  Decimal() = default;
  Decimal(long long value) : units_(value) {}  // NOLINT: implicit by intent
  Decimal(BigInt units, unsigned scale) : units_(std::move(units)), scale_(scale) {}

  // Accepts [+-]digits[.digits]. Anything else is InvalidNumber.
  static Decimal parse(std::string_view text) {
    std::string_view s = text;
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    bool negative = false;
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
      negative = s.front() == '-';
      s.remove_prefix(1);
    }
    BigInt units = 0;
    unsigned scale = 0;
    bool seen_point = false;
    bool seen_digit = false;
    for (char c : s) {
      if (c == '.' && !seen_point) {
        seen_point = true;
      } else if (c >= '0' && c <= '9') {
        units = units * 10 + (c - '0');
        seen_digit = true;
        if (seen_point) ++scale;
      } else {
        throw Error(Errc::invalid_number, "not a decimal number: '" + std::string(text) + "'");
      }
    }
    if (!seen_digit) throw Error(Errc::invalid_number, "not a decimal number: '" + std::string(text) + "'");
    return Decimal(negative ? BigInt(-units) : units, scale);
  }

  static Decimal from_rational(const Rational& value, unsigned scale) {
    BigInt num = boost::multiprecision::numerator(value) * detail::pow10(scale);
    BigInt den = boost::multiprecision::denominator(value);
    return Decimal(detail::divide_half_up(num, den), scale);
  }

  const BigInt& units() const { return units_; }
  unsigned scale() const { return scale_; }

  Rational to_rational() const { return Rational(units_, detail::pow10(scale_)); }

  double to_double() const { return static_cast<double>(to_rational()); }

  int sign() const { return units_ > 0 ? 1 : (units_ < 0 ? -1 : 0); }
  bool is_zero() const { return units_ == 0; }

  Decimal rescaled(unsigned scale) const {
    if (scale >= scale_) return Decimal(units_ * detail::pow10(scale - scale_), scale);
    return Decimal(detail::divide_half_up(units_, detail::pow10(scale_ - scale)), scale);
  }

  // Drops trailing fractional zeros; value is unchanged.
  Decimal normalized() const {
    Decimal out = *this;
    while (out.scale_ > 0 && out.units_ % 10 == 0) {
      out.units_ /= 10;
      --out.scale_;
    }
    return out;
  }

  std::string to_string() const {
    BigInt magnitude = units_ < 0 ? BigInt(-units_) : units_;
    std::string digits = magnitude.str();
    if (digits.size() <= scale_) digits.insert(0, scale_ - digits.size() + 1, '0');
    if (scale_ > 0) digits.insert(digits.size() - scale_, 1, '.');
    if (units_ < 0) digits.insert(0, 1, '-');
    return digits;
  }

  friend Decimal operator+(const Decimal& a, const Decimal& b) {
    unsigned scale = std::max(a.scale_, b.scale_);
    return Decimal(a.rescaled(scale).units_ + b.rescaled(scale).units_, scale);
  }
  friend Decimal operator-(const Decimal& a, const Decimal& b) {
    unsigned scale = std::max(a.scale_, b.scale_);
    return Decimal(a.rescaled(scale).units_ - b.rescaled(scale).units_, scale);
  }
  friend Decimal operator*(const Decimal& a, const Decimal& b) {
    return Decimal(a.units_ * b.units_, a.scale_ + b.scale_).normalized();
  }
  Decimal operator-() const { return Decimal(-units_, scale_); }
  Decimal& operator+=(const Decimal& other) { return *this = *this + other; }
  Decimal& operator-=(const Decimal& other) { return *this = *this - other; }

  friend bool operator==(const Decimal& a, const Decimal& b) { return (a <=> b) == 0; }
  friend std::strong_ordering operator<=>(const Decimal& a, const Decimal& b) {
    unsigned scale = std::max(a.scale_, b.scale_);
    const BigInt lhs = a.rescaled(scale).units_;
    const BigInt rhs = b.rescaled(scale).units_;
    if (lhs < rhs) return std::strong_ordering::less;
    if (lhs > rhs) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

 private:
  BigInt units_ = 0;
  unsigned scale_ = 0;
};

// Two-digit currency-agnostic amount. Values are held as integer cents.
class Money {
 public:
  Money() = default;

  static Money from_cents(std::int64_t cents) {
    Money m;
    m.cents_ = cents;
    return m;
  }
  static Money from_decimal(const Decimal& value) {
    return from_cents(value.rescaled(2).units().convert_to<std::int64_t>());
  }
  static Money from_rational(const Rational& value) {
    return from_decimal(Decimal::from_rational(value, 2));
  }
  static Money parse(std::string_view text) { return from_decimal(Decimal::parse(text)); }

  std::int64_t cents() const { return cents_; }
  Decimal to_decimal() const { return Decimal(BigInt(cents_), 2); }
  Rational to_rational() const { return Rational(cents_, 100); }
  bool is_negative() const { return cents_ < 0; }

  std::string to_string() const { return to_decimal().to_string(); }

  friend Money operator+(Money a, Money b) { return from_cents(a.cents_ + b.cents_); }
  friend Money operator-(Money a, Money b) { return from_cents(a.cents_ - b.cents_); }
  Money& operator+=(Money other) { cents_ += other.cents_; return *this; }
  Money& operator-=(Money other) { cents_ -= other.cents_; return *this; }

  friend bool operator==(Money, Money) = default;
  friend auto operator<=>(Money, Money) = default;

 private:
  std::int64_t cents_ = 0;
};

}  // namespace ledgermind
