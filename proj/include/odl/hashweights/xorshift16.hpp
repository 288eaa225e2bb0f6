#pragma once

#include <cstdint>
#include <stdexcept>

namespace odl::hashweights {

// One 16-bit xorshift step with shift triple (<<7, >>9, <<8).
constexpr std::uint16_t xorshift16_step(std::uint16_t x) {
  x = static_cast<std::uint16_t>(x ^ (x << 7));
  x = static_cast<std::uint16_t>(x ^ (x >> 9));
  x = static_cast<std::uint16_t>(x ^ (x << 8));
  return x;
}

inline constexpr std::uint32_t kXorshift16Period = 65535;

// Full-period generator over the 65535 nonzero 16-bit states. The output is
// the new state.
class Xorshift16 {
 public:
  explicit constexpr Xorshift16(std::uint16_t seed) : state_(seed) {
    if (seed == 0) throw std::invalid_argument("xorshift16 seed must be nonzero");
  }

  constexpr std::uint16_t next() {
    state_ = xorshift16_step(state_);
    return state_;
  }

  constexpr std::uint16_t state() const { return state_; }

 private:
  std::uint16_t state_;
};

}  // namespace odl::hashweights
