#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace odl::drift {

class DriftDetector {
 public:
  virtual ~DriftDetector() = default;

  // Observes x as sample `index` and reports whether drift is detected.
  // Asking again for the same index returns the cached answer without
  // observing x twice.
  virtual bool is_drift(std::span<const float> x, std::size_t index) = 0;

  // Acknowledges the current drift and starts tracking the new regime.
  virtual void rebase() = 0;

  virtual std::string describe() const = 0;
};

// Fires from a fixed sample index onward. A single-shot trigger: once
// rebased it never fires again.
class ScriptedDetector final : public DriftDetector {
 public:
  explicit ScriptedDetector(std::size_t trigger_at) : trigger_at_(trigger_at) {}

  bool is_drift(std::span<const float> x, std::size_t index) override;
  void rebase() override { acknowledged_ = true; }
  std::string describe() const override;

  std::size_t trigger_at() const { return trigger_at_; }

 private:
  std::size_t trigger_at_;
  bool acknowledged_ = false;
};

// Compares the mean of the last W inputs against a reference centroid and
// fires when their L2 distance exceeds tau. After rebase() the reference is
// rebuilt from the next W inputs.
class CentroidDetector final : public DriftDetector {
 public:
  CentroidDetector(std::size_t dims, std::size_t window, double tau);

  void set_reference(std::span<const double> centroid);
  bool has_reference() const { return has_reference_; }
  std::span<const double> reference() const { return reference_; }

  bool is_drift(std::span<const float> x, std::size_t index) override;
  void rebase() override;
  std::string describe() const override;

  std::size_t window() const { return window_; }
  double tau() const { return tau_; }
  std::size_t fill() const { return count_; }
  std::vector<double> window_mean() const;
  double distance() const;

 private:
  void push(std::span<const float> x);
  void recompute_sum();

  std::size_t dims_;
  std::size_t window_;
  double tau_;
  std::vector<double> reference_;
  bool has_reference_ = false;
  bool collecting_reference_ = false;
  std::vector<double> reference_sum_;
  std::size_t reference_count_ = 0;

  std::vector<double> ring_;  // window_ x dims_
  std::vector<double> sum_;
  std::size_t head_ = 0;
  std::size_t count_ = 0;
  std::size_t pushes_since_recompute_ = 0;

  std::optional<std::size_t> last_index_;
  bool last_result_ = false;
};

std::vector<double> centroid(std::span<const std::vector<float>> samples);

// Threshold from the spread of window-mean distances over in-distribution
// data: mean + k·std over `windows` random windows of size W.
double calibrate_tau(std::span<const std::vector<float>> samples, std::span<const double> reference,
                     std::size_t window, double k, std::uint64_t seed, std::size_t windows = 200);

// Parsed form of "scripted:<index>" or "centroid:W=<w>,tau=<t>" (tau optional).
struct DetectorSpec {
  enum class Kind { Scripted, Centroid } kind = Kind::Scripted;
  std::size_t trigger_at = 0;
  std::size_t window = 64;
  std::optional<double> tau;
};

DetectorSpec parse_detector_spec(std::string_view text);

}  // namespace odl::drift
