#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <stop_token>
#include <vector>

#include "odl/protocol/teacher.hpp"

namespace odl::protocol {

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Edge side of a teacher link.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual void send(std::span<const std::uint8_t> frame) = 0;
  // Next response frame, or nullopt when none arrives in time.
  virtual std::optional<std::vector<std::uint8_t>> receive() = 0;
};

struct InboundFrame {
  std::uint64_t connection = 0;
  std::vector<std::uint8_t> bytes;
};

// Teacher side: yields complete query frames tagged by connection.
class ServerTransport {
 public:
  virtual ~ServerTransport() = default;
  virtual std::optional<InboundFrame> next_request() = 0;
  virtual void reply(std::uint64_t connection, std::span<const std::uint8_t> frame) = 0;
};

struct ServeStats {
  std::uint64_t answered = 0;
  std::uint64_t malformed = 0;
};

// Answers requests until stop is requested.
ServeStats serve(Teacher& teacher, ServerTransport& transport, std::stop_token stop);

// Answers every request currently available, then returns.
ServeStats serve_pending(Teacher& teacher, ServerTransport& transport);

}  // namespace odl::protocol
