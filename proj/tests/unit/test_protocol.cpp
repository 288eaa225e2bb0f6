#include <doctest.h>

#include <chrono>
#include <cstring>
#include <vector>

#include "odl/oselm/model.hpp"
#include "odl/protocol/channel.hpp"
#include "odl/protocol/memory_transport.hpp"
#include "odl/protocol/tcp_transport.hpp"
#include "odl/protocol/teacher.hpp"
#include "odl/util/rng.hpp"

using namespace odl::protocol;
using odl::numerics::Fixed32;
using odl::util::Rng;

namespace {

std::vector<float> random_features(Rng& rng, std::size_t n) {
  std::vector<float> x(n);
  for (float& v : x) v = static_cast<float>(2.0 * odl::util::uniform01(rng) - 1.0);
  return x;
}

// Answers every query with a fixed label.
class ConstantTeacher final : public Teacher {
 public:
  ConstantTeacher(std::size_t features, std::uint8_t label) : features_(features), label_(label) {}
  std::optional<std::uint8_t> label_for(const QueryMessage&) override { return label_; }
  std::size_t feature_count() const override { return features_; }

 private:
  std::size_t features_;
  std::uint8_t label_;
};

}  // namespace

TEST_CASE("frame sizes") {
  CHECK(query_wire_size(561) == 2252);
  QueryMessage q{3, 77, std::vector<std::uint32_t>(561, 0xDEADBEEF)};
  const auto frame = encode_query(q);
  CHECK(frame.size() == 2252);
  CHECK(frame[0] == 'O');
  CHECK(frame[1] == 'D');
  CHECK(frame[2] == kProtocolVersion);
  CHECK(frame[3] == 3);
  CHECK(frame[4] == 77);  // little-endian seq
  CHECK(frame[8] == 0xEF);
  CHECK(encode_response({3, 77, 2, LabelStatus::Ok}).size() == 10);
}

TEST_CASE("codec round trip") {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    QueryMessage q;
    q.edge_id = static_cast<std::uint8_t>(rng());
    q.seq = static_cast<std::uint32_t>(rng());
    q.payload.resize(odl::util::uniform_index(rng, 600));
    for (auto& w : q.payload) w = static_cast<std::uint32_t>(rng());
    REQUIRE(decode_query(encode_query(q)) == q);
    const LabelResponse r{q.edge_id, q.seq, static_cast<std::uint8_t>(rng() % 6),
                          rng() % 2 ? LabelStatus::Ok : LabelStatus::Unavailable};
    REQUIRE(decode_response(encode_response(r)) == r);
  }
}

TEST_CASE("decode errors are distinct") {
  const auto frame = encode_query({1, 2, std::vector<std::uint32_t>(561, 5)});
  const auto code_of = [](auto&& fn) {
    try {
      fn();
    } catch (const DecodeError& e) {
      return e.code();
    }
    FAIL("no decode error");
    return DecodeErrc::BadMagic;
  };
  std::vector<std::uint8_t> cut(frame.begin(), frame.end() - 1);
  CHECK(code_of([&] { decode_query(cut, 561); }) == DecodeErrc::TruncatedFrame);
  CHECK(code_of([&] { decode_query(std::span(frame).first(5)); }) == DecodeErrc::TruncatedFrame);
  CHECK(code_of([&] { decode_query(cut); }) == DecodeErrc::TruncatedFrame);  // not a whole number of words
  auto longer = frame;
  longer.insert(longer.end(), 4, 0);
  CHECK(code_of([&] { decode_query(longer, 561); }) == DecodeErrc::OversizedFrame);
  auto magic = frame;
  magic[0] = 'X';
  CHECK(code_of([&] { decode_query(magic); }) == DecodeErrc::BadMagic);
  auto version = frame;
  version[2] = 9;
  CHECK(code_of([&] { decode_query(version); }) == DecodeErrc::VersionMismatch);
  auto resp = encode_response({1, 2, 3, LabelStatus::Ok});
  resp[9] = 7;
  CHECK(code_of([&] { decode_response(resp); }) == DecodeErrc::BadStatus);
  resp.pop_back();
  CHECK(code_of([&] { decode_response(resp); }) == DecodeErrc::TruncatedFrame);
}

TEST_CASE("wire payload words") {
  const std::vector<float> xf{0.5F, -1.0F};
  const auto f = to_wire_payload<float>(xf);
  std::uint32_t half = 0;
  const float h = 0.5F;
  std::memcpy(&half, &h, 4);
  CHECK(f[0] == half);
  CHECK(from_wire_payload(f, odl::numerics::ScalarMode::Float32) == std::vector<double>{0.5, -1.0});
  const std::vector<Fixed32> xq{Fixed32::from_double(0.5), Fixed32::from_double(-1.0)};
  const auto q = to_wire_payload<Fixed32>(xq);
  CHECK(q[0] == 0x8000U);
  CHECK(q[1] == 0xFFFF0000U);
  CHECK(from_wire_payload(q, odl::numerics::ScalarMode::Fixed32) == std::vector<double>{0.5, -1.0});
}

TEST_CASE("label acquisition fills the ledger") {
  ConstantTeacher teacher(561, 3);
  MemoryHub hub(teacher);
  auto link = hub.connect();
  TeacherChannel channel(*link, 1, 561, 6);
  TrafficLedger ledger;
  const std::vector<float> x(561, 0.25F);
  const auto r = channel.acquire_label<float>(x, ledger);
  REQUIRE(r.available);
  CHECK(r.label == 3);
  CHECK(r.one_hot == std::vector<double>{0, 0, 0, 1, 0, 0});
  CHECK(ledger.queries_sent == 1);
  CHECK(ledger.bytes_sent == 2252);
  CHECK(ledger.bytes_received == 10);
  CHECK(ledger.retries == 0);
}

TEST_CASE("offline teacher exhausts the retries") {
  ConstantTeacher teacher(8, 1);
  MemoryHub hub(teacher);
  hub.set_online(false);
  auto link = hub.connect();
  TeacherChannel channel(*link, 1, 8, 6, 2);
  TrafficLedger ledger;
  const auto r = channel.acquire_label<float>(std::vector<float>(8, 0.0F), ledger);
  CHECK_FALSE(r.available);
  CHECK(ledger.retries == 2);
  CHECK(ledger.unavailable == 1);
  CHECK(ledger.queries_sent == 0);
  CHECK(ledger.bytes_sent == 0);
  CHECK(ledger.failed_bytes_sent == 3 * query_wire_size(8));
  CHECK(ledger.samples_accounted() == 1);

  hub.set_online(true);
  CHECK(channel.acquire_label<float>(std::vector<float>(8, 0.0F), ledger).available);
  CHECK(ledger.samples_accounted() == 2);
}

TEST_CASE("unknown sample is answered as unavailable") {
  OracleTeacher teacher(4);
  Rng rng(2);
  const auto known = random_features(rng, 4);
  teacher.add_sample<double>(known, 5);
  MemoryHub hub(teacher);
  auto link = hub.connect();
  TeacherChannel channel(*link, 9, 4, 6, 1);
  TrafficLedger ledger;
  const auto hit = channel.acquire_label<double>(odl::oselm::to_scalars<double>(known), ledger);
  CHECK(hit.available);
  CHECK(hit.label == 5);
  const auto miss = channel.acquire_label<double>(std::vector<double>(4, 0.0), ledger);
  CHECK_FALSE(miss.available);
  CHECK(ledger.retries == 1);
  CHECK(ledger.unavailable == 1);
}

TEST_CASE("label outside the class range is a protocol error") {
  ConstantTeacher teacher(2, 6);
  MemoryHub hub(teacher);
  auto link = hub.connect();
  TeacherChannel channel(*link, 1, 2, 6);
  TrafficLedger ledger;
  CHECK_THROWS_AS(channel.acquire_label<float>(std::vector<float>(2, 0.0F), ledger), ProtocolError);
}

TEST_CASE("interleaved edges over the memory hub") {
  OracleTeacher teacher(16);
  Rng rng(3);
  std::vector<std::vector<float>> xs;
  std::vector<std::uint8_t> labels;
  for (int i = 0; i < 300; ++i) {
    xs.push_back(random_features(rng, 16));
    labels.push_back(static_cast<std::uint8_t>(i % 6));
    teacher.add_sample<float>(xs.back(), labels.back());
  }
  MemoryHub hub(teacher);
  std::vector<std::unique_ptr<Transport>> links;
  std::vector<TeacherChannel> channels;
  std::vector<TrafficLedger> ledgers(3);
  for (std::uint8_t e = 0; e < 3; ++e) links.push_back(hub.connect());
  for (std::uint8_t e = 0; e < 3; ++e) channels.emplace_back(*links[e], e, 16, 6);
  for (int i = 0; i < 300; ++i) {
    const auto e = static_cast<std::size_t>(i % 3);
    const auto r = channels[e].acquire_label<float>(xs[i], ledgers[e]);
    REQUIRE(r.available);
    CHECK(r.label == labels[i]);
  }
  for (std::size_t e = 0; e < 3; ++e) {
    CHECK(ledgers[e].queries_sent == 100);
    CHECK(channels[e].misrouted() == 0);
    CHECK(channels[e].stale() == 0);
  }
  CHECK(hub.stats().answered == 300);
}

TEST_CASE("tcp loopback serves several clients and survives garbage") {
  OracleTeacher teacher(32);
  Rng rng(4);
  std::vector<std::vector<float>> xs;
  for (int i = 0; i < 90; ++i) {
    xs.push_back(random_features(rng, 32));
    teacher.add_sample<float>(xs.back(), static_cast<std::uint8_t>(i % 6));
  }
  TcpTeacherServer server(teacher);
  server.start();

  {
    // A peer that speaks the wrong protocol is dropped without affecting others.
    TcpClientTransport rogue("127.0.0.1", server.port(), std::chrono::milliseconds(200));
    rogue.send(std::vector<std::uint8_t>(query_wire_size(32), 0x55));
    CHECK_FALSE(rogue.receive().has_value());
  }

  std::vector<std::unique_ptr<TcpClientTransport>> links;
  std::vector<TeacherChannel> channels;
  std::vector<TrafficLedger> ledgers(3);
  for (int e = 0; e < 3; ++e) links.push_back(std::make_unique<TcpClientTransport>("127.0.0.1", server.port()));
  for (std::uint8_t e = 0; e < 3; ++e) channels.emplace_back(*links[e], e, 32, 6);
  for (int i = 0; i < 90; ++i) {
    const auto e = static_cast<std::size_t>(i % 3);
    const auto r = channels[e].acquire_label<float>(xs[i], ledgers[e]);
    REQUIRE(r.available);
    CHECK(r.label == i % 6);
  }
  for (std::size_t e = 0; e < 3; ++e) CHECK(ledgers[e].bytes_sent == 30 * query_wire_size(32));
  CHECK(server.answered() == 90);
  CHECK(server.malformed() >= 1);
  server.stop();
}

TEST_CASE("tcp client times out when nobody answers") {
  ConstantTeacher teacher(4, 0);
  TcpTeacherServer silent(teacher);  // listening, never started
  TcpClientTransport link("127.0.0.1", silent.port(), std::chrono::milliseconds(50));
  TeacherChannel channel(link, 1, 4, 6, 2);
  TrafficLedger ledger;
  const auto r = channel.acquire_label<float>(std::vector<float>(4, 0.0F), ledger);
  CHECK_FALSE(r.available);
  CHECK(ledger.retries == 2);
  CHECK(ledger.unavailable == 1);
}

TEST_CASE("ensemble stub votes") {
  using Member = EnsembleStubTeacher::Member;
  std::vector<Member> members{[](std::span<const double> x) { return x[0] > 0 ? 1U : 0U; },
                              [](std::span<const double>) { return 2U; },
                              [](std::span<const double> x) { return x[0] > 0 ? 1U : 2U; }};
  EnsembleStubTeacher teacher(1, 3, odl::numerics::ScalarMode::Float32, members);
  const std::vector<float> pos{0.5F}, neg{-0.5F};
  CHECK(teacher.label_for({0, 0, to_wire_payload<float>(pos)}) == 1);
  CHECK(teacher.label_for({0, 0, to_wire_payload<float>(neg)}) == 2);
}

TEST_CASE("address parsing") {
  const auto a = parse_tcp_address("localhost:7000");
  CHECK(a.host == "localhost");
  CHECK(a.port == 7000);
  CHECK_THROWS_AS(parse_tcp_address("nohost"), std::invalid_argument);
  CHECK_THROWS_AS(parse_tcp_address("h:70000"), std::invalid_argument);
}
