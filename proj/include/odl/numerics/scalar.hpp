#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

#include "odl/numerics/fixed_point.hpp"

namespace odl::numerics {

enum class ScalarMode : std::uint8_t { Float64 = 0, Float32 = 1, Fixed32 = 2 };

inline std::string_view to_string(ScalarMode mode) {
  switch (mode) {
    case ScalarMode::Float64: return "float64";
    case ScalarMode::Float32: return "float32";
    case ScalarMode::Fixed32: return "fixed32";
  }
  return "unknown";
}

inline ScalarMode parse_scalar_mode(std::string_view text) {
  if (text == "float64" || text == "double") return ScalarMode::Float64;
  if (text == "float32" || text == "float") return ScalarMode::Float32;
  if (text == "fixed32" || text == "fixed" || text == "q16.16") return ScalarMode::Fixed32;
  throw std::invalid_argument("unknown scalar mode '" + std::string(text) + "'");
}

// Per-scalar arithmetic policy. `Accum` is the multiply-accumulate register
// used for dot products: fixed-point sums products in a 64-bit Q32.32
// accumulator and rounds once at the end, like a hardware MAC unit.
template <class T>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
  using Accum = double;
  static constexpr ScalarMode mode = ScalarMode::Float64;
  static double from_double(double v) { return v; }
  static double to_double(double v) { return v; }
  static Accum zero() { return 0.0; }
  static void mac(Accum& acc, double a, double b) { acc += a * b; }
  static double finish(Accum acc) { return acc; }
  static bool valid(double v) { return std::isfinite(v); }
  // Wire form is IEEE binary32.
  static std::uint32_t to_bits(double v) { return std::bit_cast<std::uint32_t>(static_cast<float>(v)); }
  static double from_bits(std::uint32_t b) { return std::bit_cast<float>(b); }
  static constexpr std::size_t storage_bytes = 8;
  static std::uint64_t store(double v) { return std::bit_cast<std::uint64_t>(v); }
  static double load(std::uint64_t b) { return std::bit_cast<double>(b); }
};

template <>
struct ScalarTraits<float> {
  using Accum = float;
  static constexpr ScalarMode mode = ScalarMode::Float32;
  static float from_double(double v) { return static_cast<float>(v); }
  static double to_double(float v) { return v; }
  static Accum zero() { return 0.0F; }
  static void mac(Accum& acc, float a, float b) { acc += a * b; }
  static float finish(Accum acc) { return acc; }
  static bool valid(float v) { return std::isfinite(v); }
  static std::uint32_t to_bits(float v) { return std::bit_cast<std::uint32_t>(v); }
  static float from_bits(std::uint32_t b) { return std::bit_cast<float>(b); }
  static constexpr std::size_t storage_bytes = 4;
  static std::uint64_t store(float v) { return std::bit_cast<std::uint32_t>(v); }
  static float load(std::uint64_t b) { return std::bit_cast<float>(static_cast<std::uint32_t>(b)); }
};

template <>
struct ScalarTraits<Fixed32> {
  using Accum = std::int64_t;
  static constexpr ScalarMode mode = ScalarMode::Fixed32;
  static Fixed32 from_double(double v) { return Fixed32::from_double(v); }
  static double to_double(Fixed32 v) { return v.to_double(); }
  static Accum zero() { return 0; }
  static void mac(Accum& acc, Fixed32 a, Fixed32 b) {
    const std::int64_t p = std::int64_t{a.raw()} * b.raw();
    if (__builtin_add_overflow(acc, p, &acc)) {
      acc = p > 0 ? std::numeric_limits<std::int64_t>::max() : std::numeric_limits<std::int64_t>::min();
    }
  }
  static Fixed32 finish(Accum acc) { return Fixed32::from_wide_product(acc); }
  static bool valid(Fixed32 v) { return !v.saturated(); }
  static std::uint32_t to_bits(Fixed32 v) { return static_cast<std::uint32_t>(v.raw()); }
  static Fixed32 from_bits(std::uint32_t b) { return Fixed32::from_raw(static_cast<std::int32_t>(b)); }
  static constexpr std::size_t storage_bytes = 4;
  static std::uint64_t store(Fixed32 v) { return static_cast<std::uint32_t>(v.raw()); }
  static Fixed32 load(std::uint64_t b) {
    return Fixed32::from_raw(static_cast<std::int32_t>(static_cast<std::uint32_t>(b)));
  }
};

}  // namespace odl::numerics
