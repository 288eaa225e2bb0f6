#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "odl/numerics/scalar.hpp"

namespace odl::protocol {

// Wire layout (little-endian):
//   query    = 'O' 'D' | version u8 | edge_id u8 | seq u32 | n x 4-byte feature words
//   response = 'O' 'D' | version u8 | edge_id u8 | seq u32 | label u8 | status u8
inline constexpr std::uint8_t kMagic0 = 'O';
inline constexpr std::uint8_t kMagic1 = 'D';
inline constexpr std::uint8_t kProtocolVersion = 1;
inline constexpr std::size_t kHeaderBytes = 8;
inline constexpr std::size_t kResponseBytes = 10;

constexpr std::size_t query_wire_size(std::size_t features) { return kHeaderBytes + 4 * features; }

struct QueryMessage {
  std::uint8_t edge_id = 0;
  std::uint32_t seq = 0;
  std::vector<std::uint32_t> payload;  // raw feature words in the run's scalar wire form

  bool operator==(const QueryMessage&) const = default;
};

enum class LabelStatus : std::uint8_t { Ok = 0, Unavailable = 1 };

struct LabelResponse {
  std::uint8_t edge_id = 0;
  std::uint32_t seq = 0;
  std::uint8_t label = 0;
  LabelStatus status = LabelStatus::Ok;

  bool operator==(const LabelResponse&) const = default;
};

enum class DecodeErrc { BadMagic, VersionMismatch, TruncatedFrame, OversizedFrame, BadStatus };

std::string_view to_string(DecodeErrc code);

class DecodeError : public std::runtime_error {
 public:
  explicit DecodeError(DecodeErrc code);
  DecodeErrc code() const { return code_; }

 private:
  DecodeErrc code_;
};

// Well-formed frame carrying content that violates the exchange contract.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::uint8_t> encode_query(const QueryMessage& msg);
QueryMessage decode_query(std::span<const std::uint8_t> frame,
                          std::optional<std::size_t> expected_features = std::nullopt);

std::vector<std::uint8_t> encode_response(const LabelResponse& msg);
LabelResponse decode_response(std::span<const std::uint8_t> frame);

template <class T>
std::vector<std::uint32_t> to_wire_payload(std::span<const T> x) {
  std::vector<std::uint32_t> words(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) words[i] = numerics::ScalarTraits<T>::to_bits(x[i]);
  return words;
}

// Decodes feature words back to doubles for a given wire scalar mode.
std::vector<double> from_wire_payload(std::span<const std::uint32_t> words, numerics::ScalarMode mode);

}  // namespace odl::protocol
