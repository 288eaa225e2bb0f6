#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "odl/drift/detector.hpp"
#include "odl/oselm/model.hpp"
#include "odl/protocol/channel.hpp"
#include "odl/pruning/auto_tuner.hpp"

namespace odl::harness {

enum class DeviceMode : std::uint8_t { Predicting, Training };

struct StepOutcome {
  std::size_t predicted_class = 0;
  std::vector<double> probs;
  DeviceMode mode = DeviceMode::Predicting;  // mode the sample was handled in
  bool drift_detected = false;               // switched Predicting -> Training
  bool queried = false;
  bool trained = false;
  bool skipped = false;
  bool unavailable = false;
  bool numeric_fault = false;
  pruning::GateReason reason = pruning::GateReason::LowConfidence;
  double theta = 1.0;
};

struct DeviceConfig {
  std::size_t warmup = 288;
  std::size_t train_budget = 0;  // samples per training phase
};

// Per-event state machine of an edge device. In Predicting mode it only
// predicts and watches for drift; in Training mode every sample passes the
// confidence gate and is either sent to the teacher and trained on, or
// skipped. The phase ends when the sample budget is used up.
template <class T>
class EdgeDevice {
 public:
  EdgeDevice(oselm::OselmModel<T> model, pruning::AutoTuner tuner, std::unique_ptr<drift::DriftDetector> detector,
             protocol::TeacherChannel* channel, DeviceConfig config)
      : model_(std::move(model)),
        tuner_(std::move(tuner)),
        detector_(std::move(detector)),
        channel_(channel),
        config_(config) {
    if (!model_.initialized()) throw std::logic_error("edge device needs an initially trained model");
    if (!detector_) throw std::invalid_argument("edge device needs a drift detector");
  }

  // Enters Training mode directly, as if drift had just been detected.
  void begin_training(std::size_t budget) {
    if (channel_ == nullptr) throw std::logic_error("device without a teacher channel cannot train");
    if (budget == 0) return;
    mode_ = DeviceMode::Training;
    budget_ = budget;
    phase_trained_ = 0;
    detector_->rebase();
  }

  StepOutcome step(std::span<const float> x, std::size_t index) {
    const auto xs = oselm::to_scalars<T>(x);
    auto pred = model_.predict(xs);
    StepOutcome out;
    out.predicted_class = pred.predicted_class;
    out.probs = pred.probs;
    out.mode = mode_;
    out.theta = tuner_.theta();

    if (mode_ == DeviceMode::Predicting) {
      if (channel_ != nullptr && detector_->is_drift(x, index)) {
        out.drift_detected = true;
        begin_training(config_.train_budget);
      }
      return out;
    }

    const bool drift_active = detector_->is_drift(x, index);
    const auto conf = pruning::confidence(pred.probs);
    const auto decision = pruning::gate(tuner_, conf, phase_trained_, config_.warmup, drift_active);
    out.reason = decision.reason;

    if (decision.action == pruning::GateAction::SkipTraining) {
      ++ledger_.queries_skipped;
      tuner_.observe(pruning::TunerEvent::SkippedHighConf);
      out.skipped = true;
    } else {
      const auto label = channel_->acquire_label<T>(std::span<const T>(xs), ledger_);
      if (!label.available) {
        // Nothing learned and the budget is kept for a later sample.
        out.unavailable = true;
        trace_.push_back(static_cast<std::uint8_t>(tuner_.level()));
        return out;
      }
      out.queried = true;
      try {
        model_.seq_train_hidden(pred.hidden, label.one_hot);
        out.trained = true;
        ++phase_trained_;
      } catch (const oselm::NumericError&) {
        out.numeric_fault = true;
        ++numeric_faults_;
      }
      tuner_.observe(pred.predicted_class == label.label ? pruning::TunerEvent::QueriedMatch
                                                         : pruning::TunerEvent::QueriedMismatch);
    }
    trace_.push_back(static_cast<std::uint8_t>(tuner_.level()));
    if (--budget_ == 0) mode_ = DeviceMode::Predicting;
    return out;
  }

  DeviceMode mode() const { return mode_; }
  std::size_t budget() const { return budget_; }
  std::size_t phase_trained() const { return phase_trained_; }
  std::size_t numeric_faults() const { return numeric_faults_; }
  const oselm::OselmModel<T>& model() const { return model_; }
  const pruning::AutoTuner& tuner() const { return tuner_; }
  const protocol::TrafficLedger& ledger() const { return ledger_; }
  // Tuner ladder level after each training-mode sample.
  const std::vector<std::uint8_t>& theta_trace() const { return trace_; }

 private:
  oselm::OselmModel<T> model_;
  pruning::AutoTuner tuner_;
  std::unique_ptr<drift::DriftDetector> detector_;
  protocol::TeacherChannel* channel_;
  DeviceConfig config_;
  DeviceMode mode_ = DeviceMode::Predicting;
  std::size_t budget_ = 0;
  std::size_t phase_trained_ = 0;
  std::size_t numeric_faults_ = 0;
  protocol::TrafficLedger ledger_;
  std::vector<std::uint8_t> trace_;
};

}  // namespace odl::harness
