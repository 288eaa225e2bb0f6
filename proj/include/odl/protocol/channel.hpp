#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "odl/protocol/messages.hpp"
#include "odl/protocol/transport.hpp"

namespace odl::protocol {

// Application-layer traffic accounting for one edge device.
//   queries_sent     samples that obtained a label (one exchange each)
//   bytes_sent       query bytes of those exchanges (queries_sent * (8 + 4n))
//   bytes_received   response bytes of those exchanges (queries_sent * 10)
//   queries_skipped  samples pruned by the confidence gate
//   retries          re-sent attempts after a failed attempt
//   unavailable      samples abandoned after all attempts failed
//   failed_bytes_sent query bytes spent on failed attempts
struct TrafficLedger {
  std::uint64_t queries_sent = 0;
  std::uint64_t bytes_sent = 0;
  std::uint64_t bytes_received = 0;
  std::uint64_t queries_skipped = 0;
  std::uint64_t retries = 0;
  std::uint64_t unavailable = 0;
  std::uint64_t failed_bytes_sent = 0;

  std::uint64_t samples_accounted() const { return queries_sent + queries_skipped + unavailable; }
  bool operator==(const TrafficLedger&) const = default;
};

struct LabelResult {
  bool available = false;
  std::uint8_t label = 0;
  std::vector<double> one_hot;
};

class TeacherChannel {
 public:
  TeacherChannel(Transport& transport, std::uint8_t edge_id, std::size_t features, std::size_t classes,
                 unsigned retries = 3);

  // Sends x to the teacher and returns its label as a one-hot vector. A
  // failed attempt (timeout, Unavailable status) is retried up to `retries`
  // times with a fresh sequence number before giving up.
  template <class T>
  LabelResult acquire_label(std::span<const T> x, TrafficLedger& ledger) {
    return acquire_payload(to_wire_payload<T>(x), ledger);
  }

  LabelResult acquire_payload(std::vector<std::uint32_t> payload, TrafficLedger& ledger);

  std::uint8_t edge_id() const { return edge_id_; }
  std::uint32_t next_seq() const { return next_seq_; }
  // Responses addressed to another edge, and late answers to earlier attempts.
  std::uint64_t misrouted() const { return misrouted_; }
  std::uint64_t stale() const { return stale_; }

 private:
  enum class Attempt { Labeled, Failed };
  Attempt attempt(QueryMessage& query, LabelResult& result);

  Transport& transport_;
  std::uint8_t edge_id_;
  std::size_t features_;
  std::size_t classes_;
  unsigned retries_;
  std::uint32_t next_seq_ = 0;
  std::uint64_t misrouted_ = 0;
  std::uint64_t stale_ = 0;
};

}  // namespace odl::protocol
