#include "odl/pruning/auto_tuner.hpp"

#include <stdexcept>
#include <string>

namespace odl::pruning {

Confidence confidence(std::span<const double> probs) {
  if (probs.size() < 2) throw std::invalid_argument("confidence needs at least two class probabilities");
  double p1 = probs[0];
  double p2 = probs[1];
  if (p2 > p1) std::swap(p1, p2);
  for (std::size_t i = 2; i < probs.size(); ++i) {
    if (probs[i] > p1) {
      p2 = p1;
      p1 = probs[i];
    } else if (probs[i] > p2) {
      p2 = probs[i];
    }
  }
  return {p1, p2, p1 - p2};
}

std::string_view to_string(GateReason reason) {
  switch (reason) {
    case GateReason::LowConfidence: return "low-confidence";
    case GateReason::HighConfidence: return "high-confidence";
    case GateReason::WarmupActive: return "warmup";
    case GateReason::DriftActive: return "drift";
  }
  return "unknown";
}

void TunerConfig::validate() const {
  if (ladder.empty()) throw std::invalid_argument("theta ladder is empty");
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    if (!(ladder[i] > 0.0 && ladder[i] <= 1.0)) {
      throw std::invalid_argument("theta ladder values must lie in (0, 1], got " + std::to_string(ladder[i]));
    }
    if (i > 0 && !(ladder[i] < ladder[i - 1])) throw std::invalid_argument("theta ladder must be strictly decreasing");
  }
  if (required_successes == 0) throw std::invalid_argument("tuner X must be at least 1");
}

AutoTuner::AutoTuner(TunerConfig config) : config_(std::move(config)) { config_.validate(); }

AutoTuner AutoTuner::fixed(double theta) {
  TunerConfig cfg;
  cfg.ladder = {theta};
  return AutoTuner(std::move(cfg));
}

void AutoTuner::observe(TunerEvent event) {
  const std::size_t bottom = config_.ladder.size() - 1;
  switch (event) {
    case TunerEvent::SkippedHighConf:
    case TunerEvent::QueriedMatch:
      if (streak_ < config_.required_successes) ++streak_;
      if (streak_ == config_.required_successes && level_ < bottom) {
        ++level_;
        streak_ = 0;
      }
      break;
    case TunerEvent::QueriedMismatch:
      if (config_.increase == IncreasePolicy::ResetToMax) {
        level_ = 0;
      } else if (level_ > 0) {
        --level_;
      }
      streak_ = 0;
      break;
  }
}

GateDecision gate(const AutoTuner& tuner, const Confidence& conf, std::size_t trained_count, std::size_t warmup,
                  bool drift_active) {
  if (drift_active) return {GateAction::Query, GateReason::DriftActive};
  if (trained_count < warmup) return {GateAction::Query, GateReason::WarmupActive};
  if (conf.margin > tuner.theta()) return {GateAction::SkipTraining, GateReason::HighConfidence};
  return {GateAction::Query, GateReason::LowConfidence};
}

}  // namespace odl::pruning
