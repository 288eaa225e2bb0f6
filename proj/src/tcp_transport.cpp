#include "odl/protocol/tcp_transport.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fmt/format.h>

namespace odl::protocol {

namespace {

constexpr int kPollMillis = 20;

[[noreturn]] void fail(const std::string& what) {
  throw TransportError(fmt::format("{}: {}", what, std::strerror(errno)));
}

sockaddr_in make_address(const std::string& host, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  const std::string resolved = host == "localhost" ? "127.0.0.1" : host;
  if (inet_pton(AF_INET, resolved.c_str(), &addr.sin_addr) != 1) {
    throw TransportError(fmt::format("invalid IPv4 address '{}'", host));
  }
  return addr;
}

bool send_all(int fd, std::span<const std::uint8_t> bytes) {
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    const ssize_t n = ::send(fd, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    sent += static_cast<std::size_t>(n);
  }
  return true;
}

}  // namespace

TcpTeacherServer::TcpTeacherServer(Teacher& teacher, std::uint16_t port, const std::string& bind_address)
    : teacher_(teacher), frame_bytes_(query_wire_size(teacher.feature_count())) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) fail("socket");
  const int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr = make_address(bind_address, port);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
    ::close(listen_fd_);
    fail("bind");
  }
  if (::listen(listen_fd_, 16) < 0) {
    ::close(listen_fd_);
    fail("listen");
  }
  socklen_t len = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpTeacherServer::~TcpTeacherServer() {
  stop();
  for (auto& c : connections_) ::close(c.fd);
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

void TcpTeacherServer::start() {
  if (worker_.joinable()) return;
  worker_ = std::jthread([this](std::stop_token stop) {
    while (!stop.stop_requested()) {
      auto in = next_request();
      if (!in) continue;
      if (auto resp = handle_frame(teacher_, in->bytes)) {
        reply(in->connection, *resp);
        ++answered_;
      } else {
        ++malformed_;
      }
    }
  });
}

void TcpTeacherServer::stop() {
  if (worker_.joinable()) {
    worker_.request_stop();
    worker_.join();
  }
}

void TcpTeacherServer::close_connection(std::size_t index) {
  ::close(connections_[index].fd);
  connections_.erase(connections_.begin() + static_cast<std::ptrdiff_t>(index));
}

std::optional<InboundFrame> TcpTeacherServer::take_buffered() {
  // Round-robin so a busy connection cannot starve the others.
  const std::size_t count = connections_.size();
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t i = (scan_from_ + k) % count;
    auto& c = connections_[i];
    if (c.buffer.size() >= 2 && (c.buffer[0] != kMagic0 || c.buffer[1] != kMagic1)) {
      // Stream framing is lost; nothing sensible can be answered.
      fmt::print(stderr, "teacher: bad magic on connection {}, closing\n", c.id);
      ++malformed_;
      close_connection(i);
      return take_buffered();
    }
    if (c.buffer.size() >= frame_bytes_) {
      InboundFrame in{c.id, {c.buffer.begin(), c.buffer.begin() + static_cast<std::ptrdiff_t>(frame_bytes_)}};
      c.buffer.erase(c.buffer.begin(), c.buffer.begin() + static_cast<std::ptrdiff_t>(frame_bytes_));
      scan_from_ = (i + 1) % count;
      return in;
    }
  }
  return std::nullopt;
}

std::optional<InboundFrame> TcpTeacherServer::next_request() {
  if (auto in = take_buffered()) return in;

  std::vector<pollfd> fds;
  fds.push_back({listen_fd_, POLLIN, 0});
  for (const auto& c : connections_) fds.push_back({c.fd, POLLIN, 0});
  const int ready = ::poll(fds.data(), fds.size(), kPollMillis);
  if (ready <= 0) return std::nullopt;

  // Read existing connections first; indices in fds[1..] match connections_.
  std::vector<std::size_t> closed;
  std::uint8_t chunk[65536];
  for (std::size_t i = 1; i < fds.size(); ++i) {
    if (!(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
    const ssize_t n = ::recv(fds[i].fd, chunk, sizeof(chunk), 0);
    if (n <= 0) {
      closed.push_back(i - 1);
      continue;
    }
    auto& buf = connections_[i - 1].buffer;
    buf.insert(buf.end(), chunk, chunk + n);
  }
  for (auto it = closed.rbegin(); it != closed.rend(); ++it) close_connection(*it);

  if (fds[0].revents & POLLIN) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd >= 0) {
      const int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      connections_.push_back({fd, next_id_++, {}});
    }
  }
  return take_buffered();
}

void TcpTeacherServer::reply(std::uint64_t connection, std::span<const std::uint8_t> frame) {
  for (std::size_t i = 0; i < connections_.size(); ++i) {
    if (connections_[i].id != connection) continue;
    if (!send_all(connections_[i].fd, frame)) close_connection(i);
    return;
  }
}

TcpClientTransport::TcpClientTransport(const std::string& host, std::uint16_t port, std::chrono::milliseconds timeout)
    : timeout_(timeout) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) fail("socket");
  sockaddr_in addr = make_address(host, port);
  if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
    ::close(fd_);
    fail(fmt::format("connect to {}:{}", host, port));
  }
  const int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

TcpClientTransport::~TcpClientTransport() {
  if (fd_ >= 0) ::close(fd_);
}

void TcpClientTransport::send(std::span<const std::uint8_t> frame) {
  if (!send_all(fd_, frame)) fail("send");
}

std::optional<std::vector<std::uint8_t>> TcpClientTransport::receive() {
  const auto deadline = std::chrono::steady_clock::now() + timeout_;
  std::uint8_t chunk[256];
  while (buffer_.size() < kResponseBytes) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return std::nullopt;
    pollfd pfd{fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (ready < 0 && errno == EINTR) continue;
    if (ready <= 0) return std::nullopt;
    const ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
    if (n <= 0) return std::nullopt;
    buffer_.insert(buffer_.end(), chunk, chunk + n);
  }
  std::vector<std::uint8_t> frame(buffer_.begin(), buffer_.begin() + kResponseBytes);
  buffer_.erase(buffer_.begin(), buffer_.begin() + kResponseBytes);
  return frame;
}

TcpAddress parse_tcp_address(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos) throw std::invalid_argument(fmt::format("expected host:port, got '{}'", text));
  TcpAddress addr;
  addr.host = text.substr(0, colon);
  const int port = std::stoi(text.substr(colon + 1));
  if (port < 0 || port > 65535) throw std::invalid_argument(fmt::format("port out of range in '{}'", text));
  addr.port = static_cast<std::uint16_t>(port);
  return addr;
}

}  // namespace odl::protocol
