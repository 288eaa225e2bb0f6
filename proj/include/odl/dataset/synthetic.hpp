#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "odl/dataset/har.hpp"

namespace odl::dataset {

// Generator for a HAR-shaped stand-in dataset: 561 features in [-1, 1]
// produced by a fixed nonlinear map from a low-dimensional latent space.
// Each class has two latent modes, each subject adds a per-class offset, and
// the held-out subjects get much larger offsets so that they form a shifted
// population.
struct SyntheticHarConfig {
  std::size_t features = kHarFeatures;
  std::size_t classes = kHarClasses;
  std::vector<std::uint8_t> subjects = default_subjects();
  std::vector<std::uint8_t> test_subjects{2, 4, 9, 10, 12, 13, 18, 20, 24};
  std::vector<std::uint8_t> shifted_subjects{kHeldOutSubjects.begin(), kHeldOutSubjects.end()};
  std::size_t samples_per_cell = 57;  // per (subject, class)
  std::size_t total_samples = 0;      // nonzero: spread this many over the cells instead
  std::size_t latent_dim = 24;
  double class_spread = 1.0;
  double mode_spread = 0.45;
  double subject_spread = 0.25;
  double shifted_subject_spread = 1.1;
  double noise = 1.3;
  double feature_noise = 0.04;
  double gain = 0.9;
  double bias = -0.4;

  static std::vector<std::uint8_t> default_subjects() {
    std::vector<std::uint8_t> s;
    for (std::uint8_t i = 1; i <= 30; ++i) s.push_back(i);
    return s;
  }
};

Samples make_synthetic_har(const SyntheticHarConfig& config, std::uint64_t seed);

// Writes train/{X,y,subject}_train.txt and test/... in the public text format.
void write_har_directory(const Samples& samples, const std::filesystem::path& root);

}  // namespace odl::dataset
