#pragma once

#include <string>
#include <vector>

#include "odl/costmodel/cost.hpp"
#include "odl/harness/experiment.hpp"

namespace odl::harness {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Reference memory table [kB] for n = 561, m = 6; rows NoODL, ODLBase,
// ODLHash; columns N = 32, 64, 128, 256, 512.
inline constexpr std::size_t kReferenceHidden[5] = {32, 64, 128, 256, 512};
inline constexpr double kReferenceMemoryKb[3][5] = {
    {74.82, 147.40, 292.55, 582.85, 1163.46},
    {83.01, 180.16, 423.62, 1107.14, 3260.61},
    {11.20, 36.55, 136.39, 532.68, 2111.68},
};

CheckResult check_memory_table(double tolerance_kb = 0.005);
CheckResult check_parameter_counts();
CheckResult check_power_trends(const costmodel::PowerParams& params = costmodel::PowerParams::for_features(561));

// Accuracy bands in percent, applied to the report's mean over trials.
struct AccuracyBand {
  double before_lo;
  double before_hi;
  double after_lo;
  double after_hi;
};
inline constexpr AccuracyBand kNoOdlBand{91.4, 94.4, 0.0, 86.0};
inline constexpr AccuracyBand kOdlHashBand{91.6, 94.6, 88.2, 100.0};

CheckResult check_accuracy_band(const std::string& name, const SettingSummary& summary, const AccuracyBand& band);
// ODL must beat the frozen model after drift by at least `gap` points.
CheckResult check_recovery_gap(const SettingSummary& no_odl, const SettingSummary& odl, double gap = 4.0);
// Auto-tuned θ against the θ = 1 twin: reduction within [lo, hi] percent
// and acc_after loss at most `max_loss` points.
CheckResult check_autotune(const ExperimentReport& report, double lo = 45.0, double hi = 65.0, double max_loss = 2.0);
// Comm volume non-decreasing in θ and the smallest θ strictly worst after drift.
CheckResult check_theta_trend(const ExperimentReport& sweep);
CheckResult check_fixed_parity(const SettingSummary& reference, const SettingSummary& fixed, double max_gap = 1.5);

}  // namespace odl::harness
