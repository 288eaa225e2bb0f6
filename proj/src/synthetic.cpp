#include "odl/dataset/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fmt/format.h>
#include <fmt/os.h>

#include "odl/util/rng.hpp"

namespace odl::dataset {

namespace fs = std::filesystem;

namespace {

std::vector<double> gaussian_vector(util::Rng& rng, std::size_t dim, double sigma) {
  std::vector<double> v(dim);
  for (double& x : v) x = sigma * util::normal(rng);
  return v;
}

}  // namespace

Samples make_synthetic_har(const SyntheticHarConfig& cfg, std::uint64_t seed) {
  util::Rng rng(seed);
  const std::size_t d = cfg.latent_dim;

  // Fixed feature map: x = tanh(gain * W z + b + noise).
  std::vector<double> w(cfg.features * d);
  for (double& v : w) v = util::normal(rng) / std::sqrt(static_cast<double>(d));
  std::vector<double> b(cfg.features);
  for (double& v : b) v = cfg.bias + 0.3 * util::normal(rng);

  std::vector<std::vector<double>> prototypes;
  std::vector<std::vector<double>> modes;  // classes * 2
  for (std::size_t c = 0; c < cfg.classes; ++c) {
    prototypes.push_back(gaussian_vector(rng, d, cfg.class_spread));
    for (int k = 0; k < 2; ++k) modes.push_back(gaussian_vector(rng, d, cfg.mode_spread));
  }

  const std::size_t cells = cfg.subjects.size() * cfg.classes;
  Samples samples;
  std::vector<double> z(d);
  std::size_t cell = 0;
  for (std::uint8_t subject : cfg.subjects) {
    const bool shifted =
        std::find(cfg.shifted_subjects.begin(), cfg.shifted_subjects.end(), subject) != cfg.shifted_subjects.end();
    const bool test = std::find(cfg.test_subjects.begin(), cfg.test_subjects.end(), subject) != cfg.test_subjects.end();
    const double spread = shifted ? cfg.shifted_subject_spread : cfg.subject_spread;
    for (std::size_t c = 0; c < cfg.classes; ++c, ++cell) {
      const std::vector<double> offset = gaussian_vector(rng, d, spread);
      std::size_t count = cfg.samples_per_cell;
      if (cfg.total_samples > 0) count = cfg.total_samples / cells + (cell < cfg.total_samples % cells ? 1 : 0);
      for (std::size_t k = 0; k < count; ++k) {
        const auto& mode = modes[2 * c + (util::uniform_index(rng, 2))];
        for (std::size_t j = 0; j < d; ++j) z[j] = prototypes[c][j] + mode[j] + offset[j] + cfg.noise * util::normal(rng);
        Sample s;
        s.features.resize(cfg.features);
        for (std::size_t f = 0; f < cfg.features; ++f) {
          double acc = b[f];
          for (std::size_t j = 0; j < d; ++j) acc += cfg.gain * w[f * d + j] * z[j];
          acc += cfg.feature_noise * util::normal(rng);
          s.features[f] = static_cast<float>(std::tanh(acc));
        }
        s.label = static_cast<std::uint8_t>(c);
        s.subject = subject;
        s.origin = test ? Origin::Test : Origin::Train;
        samples.push_back(std::move(s));
      }
    }
  }
  // Train rows first, then test rows, matching the merged load order.
  std::stable_partition(samples.begin(), samples.end(), [](const Sample& s) { return s.origin == Origin::Train; });
  for (std::size_t i = 0; i < samples.size(); ++i) samples[i].id = i;
  return samples;
}

void write_har_directory(const Samples& samples, const fs::path& root) {
  for (const auto& [part, origin] : {std::pair{"train", Origin::Train}, std::pair{"test", Origin::Test}}) {
    const fs::path dir = root / part;
    fs::create_directories(dir);
    auto x = fmt::output_file((dir / fmt::format("X_{}.txt", part)).string());
    auto y = fmt::output_file((dir / fmt::format("y_{}.txt", part)).string());
    auto s = fmt::output_file((dir / fmt::format("subject_{}.txt", part)).string());
    for (const Sample& sample : samples) {
      if (sample.origin != origin) continue;
      for (float v : sample.features) x.print(" {:.7e}", v);
      x.print("\n");
      y.print("{}\n", sample.label + 1);
      s.print("{}\n", sample.subject);
    }
  }
}

}  // namespace odl::dataset
