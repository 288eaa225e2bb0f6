#include "odl/protocol/messages.hpp"

#include <string>

namespace odl::protocol {

namespace {

void put_header(std::vector<std::uint8_t>& out, std::uint8_t edge_id, std::uint32_t seq) {
  out.push_back(kMagic0);
  out.push_back(kMagic1);
  out.push_back(kProtocolVersion);
  out.push_back(edge_id);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(seq >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return std::uint32_t{b[at]} | std::uint32_t{b[at + 1]} << 8 | std::uint32_t{b[at + 2]} << 16 |
         std::uint32_t{b[at + 3]} << 24;
}

void check_header(std::span<const std::uint8_t> frame) {
  if (frame.size() < kHeaderBytes) throw DecodeError(DecodeErrc::TruncatedFrame);
  if (frame[0] != kMagic0 || frame[1] != kMagic1) throw DecodeError(DecodeErrc::BadMagic);
  if (frame[2] != kProtocolVersion) throw DecodeError(DecodeErrc::VersionMismatch);
}

}  // namespace

std::string_view to_string(DecodeErrc code) {
  switch (code) {
    case DecodeErrc::BadMagic: return "bad magic";
    case DecodeErrc::VersionMismatch: return "version mismatch";
    case DecodeErrc::TruncatedFrame: return "truncated frame";
    case DecodeErrc::OversizedFrame: return "oversized frame";
    case DecodeErrc::BadStatus: return "bad status";
  }
  return "unknown";
}

DecodeError::DecodeError(DecodeErrc code)
    : std::runtime_error("decode error: " + std::string(to_string(code))), code_(code) {}

std::vector<std::uint8_t> encode_query(const QueryMessage& msg) {
  std::vector<std::uint8_t> out;
  out.reserve(query_wire_size(msg.payload.size()));
  put_header(out, msg.edge_id, msg.seq);
  for (std::uint32_t w : msg.payload)
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(w >> (8 * i)));
  return out;
}

QueryMessage decode_query(std::span<const std::uint8_t> frame, std::optional<std::size_t> expected_features) {
  check_header(frame);
  const std::size_t body = frame.size() - kHeaderBytes;
  if (expected_features) {
    const std::size_t want = query_wire_size(*expected_features);
    if (frame.size() < want) throw DecodeError(DecodeErrc::TruncatedFrame);
    if (frame.size() > want) throw DecodeError(DecodeErrc::OversizedFrame);
  } else if (body % 4 != 0) {
    throw DecodeError(DecodeErrc::TruncatedFrame);
  }
  QueryMessage msg;
  msg.edge_id = frame[3];
  msg.seq = get_u32(frame, 4);
  msg.payload.resize(body / 4);
  for (std::size_t i = 0; i < msg.payload.size(); ++i) msg.payload[i] = get_u32(frame, kHeaderBytes + 4 * i);
  return msg;
}

std::vector<std::uint8_t> encode_response(const LabelResponse& msg) {
  std::vector<std::uint8_t> out;
  out.reserve(kResponseBytes);
  put_header(out, msg.edge_id, msg.seq);
  out.push_back(msg.label);
  out.push_back(static_cast<std::uint8_t>(msg.status));
  return out;
}

LabelResponse decode_response(std::span<const std::uint8_t> frame) {
  check_header(frame);
  if (frame.size() < kResponseBytes) throw DecodeError(DecodeErrc::TruncatedFrame);
  if (frame.size() > kResponseBytes) throw DecodeError(DecodeErrc::OversizedFrame);
  if (frame[9] > static_cast<std::uint8_t>(LabelStatus::Unavailable)) throw DecodeError(DecodeErrc::BadStatus);
  LabelResponse msg;
  msg.edge_id = frame[3];
  msg.seq = get_u32(frame, 4);
  msg.label = frame[8];
  msg.status = static_cast<LabelStatus>(frame[9]);
  return msg;
}

std::vector<double> from_wire_payload(std::span<const std::uint32_t> words, numerics::ScalarMode mode) {
  using numerics::ScalarTraits;
  std::vector<double> out(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    switch (mode) {
      case numerics::ScalarMode::Float64:
      case numerics::ScalarMode::Float32:
        out[i] = ScalarTraits<float>::from_bits(words[i]);
        break;
      case numerics::ScalarMode::Fixed32:
        out[i] = ScalarTraits<numerics::Fixed32>::from_bits(words[i]).to_double();
        break;
    }
  }
  return out;
}

}  // namespace odl::protocol
