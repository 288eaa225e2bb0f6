#include "odl/protocol/transport.hpp"

namespace odl::protocol {

namespace {

void answer(Teacher& teacher, ServerTransport& transport, const InboundFrame& in, ServeStats& stats) {
  if (auto resp = handle_frame(teacher, in.bytes)) {
    transport.reply(in.connection, *resp);
    ++stats.answered;
  } else {
    ++stats.malformed;
  }
}

}  // namespace

ServeStats serve(Teacher& teacher, ServerTransport& transport, std::stop_token stop) {
  ServeStats stats;
  while (!stop.stop_requested()) {
    if (auto in = transport.next_request()) answer(teacher, transport, *in, stats);
  }
  return stats;
}

ServeStats serve_pending(Teacher& teacher, ServerTransport& transport) {
  ServeStats stats;
  while (auto in = transport.next_request()) answer(teacher, transport, *in, stats);
  return stats;
}

}  // namespace odl::protocol
