#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace odl::pruning {

// Gap between the two largest class probabilities.
struct Confidence {
  double p1 = 0.0;
  double p2 = 0.0;
  double margin = 0.0;
};

Confidence confidence(std::span<const double> probs);

enum class GateAction : std::uint8_t { Query, SkipTraining };
enum class GateReason : std::uint8_t { LowConfidence, HighConfidence, WarmupActive, DriftActive };

struct GateDecision {
  GateAction action = GateAction::Query;
  GateReason reason = GateReason::LowConfidence;
};

std::string_view to_string(GateReason reason);

enum class TunerEvent : std::uint8_t { SkippedHighConf, QueriedMatch, QueriedMismatch };

// How a mismatch raises θ.
enum class IncreasePolicy : std::uint8_t { OneStep, ResetToMax };

struct TunerConfig {
  std::vector<double> ladder{1.0, 0.64, 0.32, 0.16, 0.08};
  unsigned required_successes = 10;  // X
  IncreasePolicy increase = IncreasePolicy::OneStep;

  void validate() const;
  bool operator==(const TunerConfig&) const = default;
};

// Walks a descending θ ladder: X consecutive successes step θ down one
// level, a queried mismatch steps it back up. A single-entry ladder is a
// fixed threshold.
class AutoTuner {
 public:
  AutoTuner() : AutoTuner(TunerConfig{}) {}
  explicit AutoTuner(TunerConfig config);
  static AutoTuner fixed(double theta);

  double theta() const { return config_.ladder[level_]; }
  std::size_t level() const { return level_; }
  unsigned streak() const { return streak_; }
  const TunerConfig& config() const { return config_; }

  void observe(TunerEvent event);

  bool operator==(const AutoTuner&) const = default;

 private:
  TunerConfig config_;
  std::size_t level_ = 0;
  unsigned streak_ = 0;
};

// Skip only when the warmup count is met, no drift is active and the
// margin strictly exceeds θ.
GateDecision gate(const AutoTuner& tuner, const Confidence& conf, std::size_t trained_count,
                  std::size_t warmup, bool drift_active);

inline std::size_t default_warmup(std::size_t hidden_nodes) { return hidden_nodes > 288 ? hidden_nodes : 288; }

}  // namespace odl::pruning
