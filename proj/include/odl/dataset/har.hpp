#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

namespace odl::dataset {

inline constexpr std::size_t kHarFeatures = 561;
inline constexpr std::size_t kHarClasses = 6;
inline constexpr std::size_t kHarSubjects = 30;
inline constexpr std::size_t kHarTrainRows = 7352;
inline constexpr std::size_t kHarTestRows = 2947;
// Subjects whose samples form the post-drift set.
inline constexpr std::array<std::uint8_t, 5> kHeldOutSubjects{9, 14, 16, 19, 25};

enum class Origin : std::uint8_t { Train, Test };

struct Sample {
  std::vector<float> features;
  std::uint8_t label = 0;    // 0-based class
  std::uint8_t subject = 0;  // 1..30
  Origin origin = Origin::Train;
  std::size_t id = 0;        // row index in the merged train+test order
};

using Samples = std::vector<Sample>;

enum class DatasetErrc { MissingFile, RowLength, LabelRange, SubjectRange, CountMismatch, Parse };

class DatasetError : public std::runtime_error {
 public:
  DatasetError(DatasetErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  DatasetErrc code() const { return code_; }

 private:
  DatasetErrc code_;
};

struct LoadOptions {
  std::size_t features = kHarFeatures;
  // Enforce the public distribution's 7352 + 2947 row counts.
  bool require_full_counts = true;
};

// Reads X_{train,test}.txt, y_*.txt and subject_*.txt from `root` or from
// its train/ and test/ subdirectories (the public archive layout).
Samples load_har(const std::filesystem::path& root, const LoadOptions& options = {});

struct DriftSplits {
  Samples train;  // held-in subjects, original train rows
  Samples test0;  // held-in subjects, original test rows
  Samples test1;  // held-out subjects, both origins
};

DriftSplits make_drift_splits(const Samples& samples,
                              std::span<const std::uint8_t> held_out = kHeldOutSubjects);

// Indices into test1: a seeded shuffle whose first ~60% is streamed for
// on-device learning and whose rest is held for evaluation.
struct OdlPartition {
  std::vector<std::size_t> odl_stream;
  std::vector<std::size_t> eval_after;
};

OdlPartition make_odl_partition(std::size_t test1_size, std::uint64_t seed, double fraction = 0.6);

}  // namespace odl::dataset
