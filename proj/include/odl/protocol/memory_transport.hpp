#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>

#include "odl/protocol/transport.hpp"

namespace odl::protocol {

// Deterministic in-process link between any number of edges and one
// teacher. Requests are served in FIFO order when a client polls for a
// response. Single-threaded.
class MemoryHub final : public ServerTransport {
 public:
  explicit MemoryHub(Teacher& teacher) : teacher_(teacher) {}

  std::unique_ptr<Transport> connect();

  // While offline, requests are silently dropped.
  void set_online(bool online) { online_ = online; }
  bool online() const { return online_; }

  void pump();
  const ServeStats& stats() const { return stats_; }

  std::optional<InboundFrame> next_request() override;
  void reply(std::uint64_t connection, std::span<const std::uint8_t> frame) override;

 private:
  friend class MemoryClient;
  void post(std::uint64_t connection, std::span<const std::uint8_t> frame);
  std::optional<std::vector<std::uint8_t>> collect(std::uint64_t connection);

  Teacher& teacher_;
  bool online_ = true;
  std::uint64_t next_connection_ = 1;
  std::deque<InboundFrame> requests_;
  std::map<std::uint64_t, std::deque<std::vector<std::uint8_t>>> mailboxes_;
  ServeStats stats_;
};

}  // namespace odl::protocol
