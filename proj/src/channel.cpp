#include "odl/protocol/channel.hpp"

#include <fmt/format.h>

namespace odl::protocol {

namespace {
// Late responses from earlier timed-out attempts tolerated per attempt.
constexpr int kMaxStalePerAttempt = 64;
}  // namespace

TeacherChannel::TeacherChannel(Transport& transport, std::uint8_t edge_id, std::size_t features, std::size_t classes,
                               unsigned retries)
    : transport_(transport), edge_id_(edge_id), features_(features), classes_(classes), retries_(retries) {}

TeacherChannel::Attempt TeacherChannel::attempt(QueryMessage& query, LabelResult& result) {
  query.seq = next_seq_++;
  const auto frame = encode_query(query);
  try {
    transport_.send(frame);
  } catch (const TransportError&) {
    return Attempt::Failed;
  }
  for (int stale = 0; stale < kMaxStalePerAttempt; ++stale) {
    auto bytes = transport_.receive();
    if (!bytes) return Attempt::Failed;
    LabelResponse resp;
    try {
      resp = decode_response(*bytes);
    } catch (const DecodeError&) {
      return Attempt::Failed;
    }
    if (resp.edge_id != edge_id_) {
      ++misrouted_;
      continue;
    }
    if (resp.seq != query.seq) {
      ++stale_;
      continue;
    }
    if (resp.status != LabelStatus::Ok) return Attempt::Failed;
    if (resp.label >= classes_) {
      throw ProtocolError(fmt::format("teacher label {} outside {} classes", resp.label, classes_));
    }
    result.available = true;
    result.label = resp.label;
    result.one_hot.assign(classes_, 0.0);
    result.one_hot[resp.label] = 1.0;
    return Attempt::Labeled;
  }
  return Attempt::Failed;
}

LabelResult TeacherChannel::acquire_payload(std::vector<std::uint32_t> payload, TrafficLedger& ledger) {
  if (payload.size() != features_) {
    throw std::invalid_argument(fmt::format("query has {} features, channel expects {}", payload.size(), features_));
  }
  QueryMessage query{edge_id_, 0, std::move(payload)};
  const std::uint64_t frame_bytes = query_wire_size(features_);
  LabelResult result;
  for (unsigned n = 0; n <= retries_; ++n) {
    if (n > 0) ++ledger.retries;
    if (attempt(query, result) == Attempt::Labeled) {
      ++ledger.queries_sent;
      ledger.bytes_sent += frame_bytes;
      ledger.bytes_received += kResponseBytes;
      return result;
    }
    ledger.failed_bytes_sent += frame_bytes;
  }
  ++ledger.unavailable;
  return result;
}

}  // namespace odl::protocol
