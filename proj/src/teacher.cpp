#include "odl/protocol/teacher.hpp"

#include <algorithm>
#include <cstring>
#include <fmt/format.h>
#include <stdexcept>

namespace odl::protocol {

std::string OracleTeacher::key(std::span<const std::uint32_t> payload) {
  std::string k(payload.size() * 4, '\0');
  std::memcpy(k.data(), payload.data(), k.size());
  return k;
}

void OracleTeacher::add(std::span<const std::uint32_t> payload, std::uint8_t label) {
  if (payload.size() != features_) throw std::invalid_argument("oracle sample has wrong feature count");
  labels_.emplace(key(payload), label);
}

std::optional<std::uint8_t> OracleTeacher::label_for(const QueryMessage& query) {
  const auto it = labels_.find(key(query.payload));
  if (it == labels_.end()) return std::nullopt;
  return it->second;
}

EnsembleStubTeacher::EnsembleStubTeacher(std::size_t features, std::size_t classes, numerics::ScalarMode wire_mode,
                                         std::vector<Member> members)
    : features_(features), classes_(classes), wire_mode_(wire_mode), members_(std::move(members)) {
  if (members_.empty()) throw std::invalid_argument("ensemble teacher needs at least one member");
}

std::optional<std::uint8_t> EnsembleStubTeacher::label_for(const QueryMessage& query) {
  const std::vector<double> x = from_wire_payload(query.payload, wire_mode_);
  std::vector<std::size_t> votes(classes_, 0);
  for (const auto& member : members_) {
    const std::size_t c = member(x);
    if (c < classes_) ++votes[c];
  }
  const auto best = std::max_element(votes.begin(), votes.end());
  if (*best == 0) return std::nullopt;
  return static_cast<std::uint8_t>(best - votes.begin());
}

std::optional<std::vector<std::uint8_t>> handle_frame(Teacher& teacher, std::span<const std::uint8_t> frame) {
  QueryMessage query;
  try {
    query = decode_query(frame, teacher.feature_count());
  } catch (const DecodeError& e) {
    fmt::print(stderr, "teacher: dropping malformed frame ({} bytes): {}\n", frame.size(), e.what());
    return std::nullopt;
  }
  LabelResponse resp;
  resp.edge_id = query.edge_id;
  resp.seq = query.seq;
  if (const auto label = teacher.label_for(query)) {
    resp.label = *label;
    resp.status = LabelStatus::Ok;
  } else {
    resp.status = LabelStatus::Unavailable;
  }
  return encode_response(resp);
}

}  // namespace odl::protocol
