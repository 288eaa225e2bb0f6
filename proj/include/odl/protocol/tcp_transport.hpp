#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "odl/protocol/transport.hpp"

namespace odl::protocol {

// Stream-socket teacher endpoint. Frames are delimited by their fixed
// sizes (query: 8 + 4n bytes), so the bytes on the socket are exactly the
// protocol frames. One background thread multiplexes all connections.
class TcpTeacherServer final : public ServerTransport {
 public:
  // port 0 picks an ephemeral port.
  TcpTeacherServer(Teacher& teacher, std::uint16_t port = 0, const std::string& bind_address = "127.0.0.1");
  ~TcpTeacherServer() override;

  TcpTeacherServer(const TcpTeacherServer&) = delete;
  TcpTeacherServer& operator=(const TcpTeacherServer&) = delete;

  std::uint16_t port() const { return port_; }
  void start();
  void stop();
  std::uint64_t answered() const { return answered_.load(); }
  std::uint64_t malformed() const { return malformed_.load(); }

  std::optional<InboundFrame> next_request() override;
  void reply(std::uint64_t connection, std::span<const std::uint8_t> frame) override;

 private:
  struct Connection {
    int fd = -1;
    std::uint64_t id = 0;
    std::vector<std::uint8_t> buffer;
  };

  std::optional<InboundFrame> take_buffered();
  void close_connection(std::size_t index);

  Teacher& teacher_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::size_t frame_bytes_;
  std::vector<Connection> connections_;
  std::uint64_t next_id_ = 1;
  std::size_t scan_from_ = 0;
  std::jthread worker_;
  std::atomic<std::uint64_t> answered_{0};
  std::atomic<std::uint64_t> malformed_{0};
};

class TcpClientTransport final : public Transport {
 public:
  TcpClientTransport(const std::string& host, std::uint16_t port,
                     std::chrono::milliseconds timeout = std::chrono::milliseconds(2000));
  ~TcpClientTransport() override;

  TcpClientTransport(const TcpClientTransport&) = delete;
  TcpClientTransport& operator=(const TcpClientTransport&) = delete;

  void send(std::span<const std::uint8_t> frame) override;
  std::optional<std::vector<std::uint8_t>> receive() override;

 private:
  int fd_ = -1;
  std::chrono::milliseconds timeout_;
  std::vector<std::uint8_t> buffer_;
};

struct TcpAddress {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
};

// Parses "host:port".
TcpAddress parse_tcp_address(const std::string& text);

}  // namespace odl::protocol
