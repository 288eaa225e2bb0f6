#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "odl/protocol/messages.hpp"

namespace odl::protocol {

class Teacher {
 public:
  virtual ~Teacher() = default;
  // Label for the queried features, or nullopt when the teacher cannot answer.
  virtual std::optional<std::uint8_t> label_for(const QueryMessage& query) = 0;
  virtual std::size_t feature_count() const = 0;
};

// Answers with the ground-truth label of the registered sample whose wire
// payload matches the query bit for bit.
class OracleTeacher final : public Teacher {
 public:
  explicit OracleTeacher(std::size_t features) : features_(features) {}

  void add(std::span<const std::uint32_t> payload, std::uint8_t label);

  template <class T>
  void add_sample(std::span<const float> features, std::uint8_t label) {
    std::vector<std::uint32_t> words(features.size());
    for (std::size_t i = 0; i < features.size(); ++i) {
      words[i] = numerics::ScalarTraits<T>::to_bits(numerics::ScalarTraits<T>::from_double(features[i]));
    }
    add(words, label);
  }

  std::optional<std::uint8_t> label_for(const QueryMessage& query) override;
  std::size_t feature_count() const override { return features_; }
  std::size_t size() const { return labels_.size(); }

 private:
  static std::string key(std::span<const std::uint32_t> payload);

  std::size_t features_;
  std::unordered_map<std::string, std::uint8_t> labels_;
};

// Majority vote over member classifiers (lowest label wins ties). Stands in
// for a teacher running an ensemble of stronger models.
class EnsembleStubTeacher final : public Teacher {
 public:
  using Member = std::function<std::size_t(std::span<const double>)>;

  EnsembleStubTeacher(std::size_t features, std::size_t classes, numerics::ScalarMode wire_mode,
                      std::vector<Member> members);

  std::optional<std::uint8_t> label_for(const QueryMessage& query) override;
  std::size_t feature_count() const override { return features_; }

 private:
  std::size_t features_;
  std::size_t classes_;
  numerics::ScalarMode wire_mode_;
  std::vector<Member> members_;
};

// Builds the response frame for one raw query frame. Malformed frames get
// no response.
std::optional<std::vector<std::uint8_t>> handle_frame(Teacher& teacher, std::span<const std::uint8_t> frame);

}  // namespace odl::protocol
