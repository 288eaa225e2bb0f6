#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>

namespace odl::numerics {

// Signed Q16.16 fixed-point scalar. Addition and subtraction are exact unless
// they overflow; multiplication and division round to nearest. Every
// operation saturates at the int32 bounds instead of wrapping.
class Fixed32 {
 public:
  static constexpr int kFracBits = 16;
  static constexpr std::int32_t kOneRaw = std::int32_t{1} << kFracBits;
  static constexpr std::int32_t kMaxRaw = std::numeric_limits<std::int32_t>::max();
  static constexpr std::int32_t kMinRaw = std::numeric_limits<std::int32_t>::min();

  constexpr Fixed32() = default;

  static constexpr Fixed32 from_raw(std::int32_t raw) {
    Fixed32 f;
    f.raw_ = raw;
    return f;
  }

  // NaN maps to zero; out-of-range values saturate.
  static Fixed32 from_double(double v) {
    if (std::isnan(v)) return Fixed32{};
    const double scaled = v * static_cast<double>(kOneRaw);
    if (scaled >= static_cast<double>(kMaxRaw)) return max();
    if (scaled <= static_cast<double>(kMinRaw)) return min();
    return from_raw(static_cast<std::int32_t>(std::llround(scaled)));
  }

  static constexpr Fixed32 max() { return from_raw(kMaxRaw); }
  static constexpr Fixed32 min() { return from_raw(kMinRaw); }
  static constexpr Fixed32 one() { return from_raw(kOneRaw); }
  static constexpr Fixed32 epsilon() { return from_raw(1); }

  constexpr std::int32_t raw() const { return raw_; }
  constexpr double to_double() const {
    return static_cast<double>(raw_) / static_cast<double>(kOneRaw);
  }
  constexpr bool saturated() const { return raw_ == kMaxRaw || raw_ == kMinRaw; }

  // Clamp a wide intermediate into the representable raw range.
  static constexpr Fixed32 saturate(std::int64_t wide) {
    if (wide > kMaxRaw) return max();
    if (wide < kMinRaw) return min();
    return from_raw(static_cast<std::int32_t>(wide));
  }

  // Round-half-up shift of a Q32.32 product back to Q16.16.
  static constexpr Fixed32 from_wide_product(std::int64_t q32) {
    constexpr std::int64_t kHalf = std::int64_t{1} << (kFracBits - 1);
    if (q32 > std::numeric_limits<std::int64_t>::max() - kHalf) return max();
    return saturate((q32 + kHalf) >> kFracBits);
  }

  friend constexpr Fixed32 operator+(Fixed32 a, Fixed32 b) {
    return saturate(std::int64_t{a.raw_} + b.raw_);
  }
  friend constexpr Fixed32 operator-(Fixed32 a, Fixed32 b) {
    return saturate(std::int64_t{a.raw_} - b.raw_);
  }
  constexpr Fixed32 operator-() const { return saturate(-std::int64_t{raw_}); }

  friend constexpr Fixed32 operator*(Fixed32 a, Fixed32 b) {
    return from_wide_product(std::int64_t{a.raw_} * b.raw_);
  }

  // Division by zero saturates toward the sign of the numerator (0/0 == 0).
  friend constexpr Fixed32 operator/(Fixed32 a, Fixed32 b) {
    if (b.raw_ == 0) {
      if (a.raw_ == 0) return Fixed32{};
      return a.raw_ > 0 ? max() : min();
    }
    const std::int64_t num = std::int64_t{a.raw_} * kOneRaw;
    const std::int64_t den = b.raw_;
    std::int64_t q = num / den;
    const std::int64_t r = num % den;
    const std::int64_t abs_r = r < 0 ? -r : r;
    const std::int64_t abs_d = den < 0 ? -den : den;
    if (2 * abs_r >= abs_d) q += ((num < 0) != (den < 0)) ? -1 : 1;
    return saturate(q);
  }

  Fixed32& operator+=(Fixed32 o) { return *this = *this + o; }
  Fixed32& operator-=(Fixed32 o) { return *this = *this - o; }
  Fixed32& operator*=(Fixed32 o) { return *this = *this * o; }
  Fixed32& operator/=(Fixed32 o) { return *this = *this / o; }

  friend constexpr auto operator<=>(Fixed32, Fixed32) = default;

 private:
  std::int32_t raw_ = 0;
};

inline Fixed32 fp_mul(Fixed32 a, Fixed32 b) { return a * b; }

}  // namespace odl::numerics
