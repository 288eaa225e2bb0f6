#include "odl/protocol/memory_transport.hpp"

namespace odl::protocol {

class MemoryClient final : public Transport {
 public:
  MemoryClient(MemoryHub& hub, std::uint64_t id) : hub_(hub), id_(id) {}
  void send(std::span<const std::uint8_t> frame) override { hub_.post(id_, frame); }
  std::optional<std::vector<std::uint8_t>> receive() override { return hub_.collect(id_); }

 private:
  MemoryHub& hub_;
  std::uint64_t id_;
};

std::unique_ptr<Transport> MemoryHub::connect() {
  const std::uint64_t id = next_connection_++;
  mailboxes_[id];
  return std::make_unique<MemoryClient>(*this, id);
}

void MemoryHub::post(std::uint64_t connection, std::span<const std::uint8_t> frame) {
  if (!online_) return;
  requests_.push_back({connection, {frame.begin(), frame.end()}});
}

std::optional<std::vector<std::uint8_t>> MemoryHub::collect(std::uint64_t connection) {
  auto& box = mailboxes_[connection];
  if (box.empty()) pump();
  if (box.empty()) return std::nullopt;
  auto frame = std::move(box.front());
  box.pop_front();
  return frame;
}

void MemoryHub::pump() {
  const ServeStats s = serve_pending(teacher_, *this);
  stats_.answered += s.answered;
  stats_.malformed += s.malformed;
}

std::optional<InboundFrame> MemoryHub::next_request() {
  if (requests_.empty()) return std::nullopt;
  InboundFrame in = std::move(requests_.front());
  requests_.pop_front();
  return in;
}

void MemoryHub::reply(std::uint64_t connection, std::span<const std::uint8_t> frame) {
  mailboxes_[connection].emplace_back(frame.begin(), frame.end());
}

}  // namespace odl::protocol
