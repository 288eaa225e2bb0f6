#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "odl/costmodel/cost.hpp"
#include "odl/dataset/har.hpp"
#include "odl/drift/detector.hpp"
#include "odl/numerics/scalar.hpp"
#include "odl/oselm/model.hpp"
#include "odl/pruning/auto_tuner.hpp"

namespace odl::harness {

using costmodel::Variant;

// One gate configuration streamed over the same initial model. A fixed θ
// is a single-entry ladder.
struct GateSetting {
  std::string label;
  pruning::TunerConfig tuner;

  static GateSetting fixed(double theta);
  static GateSetting autotuned(pruning::TunerConfig config = {});
  bool is_baseline() const { return tuner.ladder.size() == 1 && tuner.ladder.front() >= 1.0; }
};

enum class TransportKind : std::uint8_t { Memory, Tcp };

struct ExperimentConfig {
  Variant variant = Variant::OdlHash;
  oselm::ModelShape shape{};
  numerics::ScalarMode scalar = numerics::ScalarMode::Float64;
  double lambda = 1e-3;
  double alpha_scale = 1.0;
  std::vector<GateSetting> settings{GateSetting::fixed(1.0)};
  std::size_t trials = 20;
  std::uint64_t seed = 0;             // trial t uses seed + t
  std::optional<std::size_t> warmup;  // default max(N, 288)
  unsigned retries = 3;
  TransportKind transport = TransportKind::Memory;
  double odl_fraction = 0.6;
  // Detector watching the stream during training; the stream itself is
  // entered explicitly at the drift boundary.
  std::string detector = "scripted:0";
  costmodel::PowerParams power = costmodel::PowerParams::for_features(dataset::kHarFeatures);
  std::vector<double> event_periods{1.0, 5.0, 10.0};
  unsigned threads = 0;  // 0: hardware concurrency

  std::size_t effective_warmup() const { return warmup.value_or(pruning::default_warmup(shape.hidden)); }
  void validate() const;
};

struct TrialReport {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::string setting;
  double acc_before = 0.0;
  double acc_after = 0.0;
  double comm_volume_pct = 0.0;  // queries relative to the θ = 1 twin
  std::uint64_t stream_size = 0;
  std::uint64_t queries_sent = 0;
  std::uint64_t queries_skipped = 0;
  std::uint64_t unavailable = 0;
  std::uint64_t retries = 0;
  std::uint64_t bytes_sent = 0;
  std::uint64_t bytes_received = 0;
  std::uint64_t numeric_faults = 0;
  double final_theta = 1.0;
  std::vector<std::uint8_t> theta_trace;
  std::vector<double> power_mw;  // training-mode average power per event period

  bool operator==(const TrialReport&) const = default;
};

struct Stat {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for one trial
};

Stat summarize(const std::vector<double>& values);

struct SettingSummary {
  std::string setting;
  std::size_t trials = 0;
  Stat acc_before;
  Stat acc_after;
  Stat comm_volume_pct;
  Stat bytes_sent;
  Stat final_theta;
  std::vector<Stat> power_mw;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<TrialReport> trials;  // ordered by trial, then setting
  std::vector<SettingSummary> summaries;

  const SettingSummary& summary(const std::string& setting) const;
  std::vector<const TrialReport*> trials_for(const std::string& setting) const;
};

class TrialError : public std::runtime_error {
 public:
  TrialError(std::uint64_t seed, const std::string& what)
      : std::runtime_error("trial with seed " + std::to_string(seed) + " failed: " + what), seed_(seed) {}
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

// Runs the four-step protocol (initial training, test before drift,
// on-device learning over the stream, test after drift) for every gate
// setting on one seed. All settings start from the same initial model.
std::vector<TrialReport> run_trial(const ExperimentConfig& config, const dataset::DriftSplits& splits,
                                   std::size_t trial);

ExperimentReport run_experiment(const ExperimentConfig& config, const dataset::DriftSplits& splits);

// Setting labels of a θ sweep: the fixed values plus "auto".
std::vector<GateSetting> sweep_settings(const std::vector<double>& thetas, const pruning::TunerConfig& autotune);

// Per-trial rows followed by mean and std rows for each setting. Fixed
// formatting so that identical reports produce identical bytes.
void write_csv(std::ostream& os, const ExperimentReport& report);
void write_csv(const std::filesystem::path& path, const ExperimentReport& report);

// x,y series for plotting, one file per series.
struct PlotSeries {
  std::string name;
  std::string x_label;
  std::string y_label;
  std::vector<std::pair<double, double>> points;
};

void write_plot_series(const std::filesystem::path& dir, const std::vector<PlotSeries>& series);
std::vector<PlotSeries> sweep_plot_series(const ExperimentReport& report);

}  // namespace odl::harness
