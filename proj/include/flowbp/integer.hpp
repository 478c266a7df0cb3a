#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "flowbp/error.hpp"

namespace flowbp {

using Int = std::int64_t;
using BigInt = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<>,
                                             boost::multiprecision::et_off>;

// 64-bit integer whose arithmetic throws Errc::kOverflow instead of wrapping.
// Used as the fast path for exact message arithmetic; callers that catch the
// overflow rerun the computation with BigInt.
class CheckedInt {
 public:
  constexpr CheckedInt() noexcept = default;
  constexpr CheckedInt(Int v) noexcept : v_(v) {}  // NOLINT(implicit)

  constexpr Int get() const noexcept { return v_; }

  friend CheckedInt operator+(CheckedInt a, CheckedInt b) {
    Int r;
    if (__builtin_add_overflow(a.v_, b.v_, &r)) overflow("add");
    return r;
  }
  friend CheckedInt operator-(CheckedInt a, CheckedInt b) {
    Int r;
    if (__builtin_sub_overflow(a.v_, b.v_, &r)) overflow("sub");
    return r;
  }
  friend CheckedInt operator*(CheckedInt a, CheckedInt b) {
    Int r;
    if (__builtin_mul_overflow(a.v_, b.v_, &r)) overflow("mul");
    return r;
  }
  // Truncating division, as for built-in integers.
  friend CheckedInt operator/(CheckedInt a, CheckedInt b) {
    if (b.v_ == 0) throw Error(Errc::kOverflow, "division by zero");
    if (a.v_ == std::numeric_limits<Int>::min() && b.v_ == -1) overflow("div");
    return a.v_ / b.v_;
  }
  friend CheckedInt operator%(CheckedInt a, CheckedInt b) {
    if (b.v_ == 0) throw Error(Errc::kOverflow, "division by zero");
    if (b.v_ == -1) return 0;
    return a.v_ % b.v_;
  }
  CheckedInt operator-() const {
    if (v_ == std::numeric_limits<Int>::min()) overflow("neg");
    return -v_;
  }
  CheckedInt& operator+=(CheckedInt o) { return *this = *this + o; }
  CheckedInt& operator-=(CheckedInt o) { return *this = *this - o; }
  CheckedInt& operator*=(CheckedInt o) { return *this = *this * o; }

  friend constexpr bool operator==(CheckedInt, CheckedInt) = default;
  friend constexpr std::strong_ordering operator<=>(CheckedInt, CheckedInt) = default;

 private:
  [[noreturn]] static void overflow(const char* op) {
    throw Error(Errc::kOverflow, std::string("64-bit overflow in ") + op);
  }

  Int v_ = 0;
};

// Conversions used by templated code that must work for CheckedInt and BigInt.

inline BigInt to_big(CheckedInt v) { return BigInt(v.get()); }
inline BigInt to_big(const BigInt& v) { return v; }

inline Int to_int64(CheckedInt v) { return v.get(); }
inline Int to_int64(const BigInt& v) {
  if (v > std::numeric_limits<Int>::max() || v < std::numeric_limits<Int>::min()) {
    throw Error(Errc::kOverflow, "value does not fit in 64 bits: " + v.str());
  }
  return static_cast<Int>(v);
}

inline bool fits_int64(CheckedInt) { return true; }
inline bool fits_int64(const BigInt& v) {
  return v <= std::numeric_limits<Int>::max() && v >= std::numeric_limits<Int>::min();
}

template <class I>
I int_from(const BigInt& v) {
  if constexpr (std::is_same_v<I, BigInt>) {
    return v;
  } else {
    return I(to_int64(v));
  }
}

inline std::string to_string(CheckedInt v) { return std::to_string(v.get()); }
inline std::string to_string(const BigInt& v) { return v.str(); }

template <class I>
I abs_value(const I& v) {
  return v < I(0) ? -v : v;
}

// Floor division for exact integer types (rounds toward negative infinity).
template <class I>
I floor_div(const I& a, const I& b) {
  I q = a / b;
  if ((a % b != I(0)) && ((a < I(0)) != (b < I(0)))) q = q - I(1);
  return q;
}

// Exact rational p/q with q > 0. Not kept in lowest terms; comparisons
// cross-multiply.
template <class I>
struct Rational {
  I num{0};
  I den{1};

  Rational() = default;
  Rational(I n) : num(std::move(n)), den(1) {}  // NOLINT(implicit)
  Rational(I n, I d) : num(std::move(n)), den(std::move(d)) {
    if (den == I(0)) throw Error(Errc::kOverflow, "rational with zero denominator");
    if (den < I(0)) {
      num = -num;
      den = -den;
    }
  }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return Rational(a.num * b.den + b.num * a.den, a.den * b.den);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return Rational(a.num * b.den - b.num * a.den, a.den * b.den);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return Rational(a.num * b.num, a.den * b.den);
  }
  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num * b.den == b.num * a.den;
  }
  friend bool operator<(const Rational& a, const Rational& b) {
    return a.num * b.den < b.num * a.den;
  }
  friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
  friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
  friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }
};

}  // namespace flowbp
