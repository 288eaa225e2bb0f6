#include "odl/drift/detector.hpp"

#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <stdexcept>

#include "odl/util/rng.hpp"

namespace odl::drift {

bool ScriptedDetector::is_drift(std::span<const float> /*x*/, std::size_t index) {
  return !acknowledged_ && index >= trigger_at_;
}

std::string ScriptedDetector::describe() const { return fmt::format("scripted:{}", trigger_at_); }

CentroidDetector::CentroidDetector(std::size_t dims, std::size_t window, double tau)
    : dims_(dims), window_(window), tau_(tau), ring_(dims * window, 0.0), sum_(dims, 0.0) {
  if (dims == 0 || window == 0) throw std::invalid_argument("centroid detector needs dims > 0 and W > 0");
  if (!(tau > 0.0)) throw std::invalid_argument("centroid detector tau must be positive");
}

void CentroidDetector::set_reference(std::span<const double> c) {
  if (c.size() != dims_) throw std::invalid_argument("reference centroid has wrong dimension");
  reference_.assign(c.begin(), c.end());
  has_reference_ = true;
  collecting_reference_ = false;
}

void CentroidDetector::push(std::span<const float> x) {
  double* slot = ring_.data() + head_ * dims_;
  if (count_ == window_) {
    for (std::size_t d = 0; d < dims_; ++d) sum_[d] -= slot[d];
  } else {
    ++count_;
  }
  for (std::size_t d = 0; d < dims_; ++d) {
    slot[d] = x[d];
    sum_[d] += x[d];
  }
  head_ = (head_ + 1) % window_;
  if (++pushes_since_recompute_ >= 16 * window_) recompute_sum();
}

void CentroidDetector::recompute_sum() {
  std::fill(sum_.begin(), sum_.end(), 0.0);
  for (std::size_t k = 0; k < count_; ++k) {
    const std::size_t slot = (head_ + window_ - 1 - k) % window_;
    for (std::size_t d = 0; d < dims_; ++d) sum_[d] += ring_[slot * dims_ + d];
  }
  pushes_since_recompute_ = 0;
}

std::vector<double> CentroidDetector::window_mean() const {
  std::vector<double> mean(dims_, 0.0);
  if (count_ == 0) return mean;
  for (std::size_t d = 0; d < dims_; ++d) mean[d] = sum_[d] / static_cast<double>(count_);
  return mean;
}

double CentroidDetector::distance() const {
  if (!has_reference_ || count_ == 0) return 0.0;
  double s = 0.0;
  for (std::size_t d = 0; d < dims_; ++d) {
    const double diff = sum_[d] / static_cast<double>(count_) - reference_[d];
    s += diff * diff;
  }
  return std::sqrt(s);
}

bool CentroidDetector::is_drift(std::span<const float> x, std::size_t index) {
  if (last_index_ && *last_index_ == index) return last_result_;
  if (x.size() != dims_) throw std::invalid_argument("centroid detector: input has wrong dimension");
  if (!has_reference_ && !collecting_reference_) {
    throw std::logic_error("centroid detector queried before its reference centroid was set");
  }
  last_index_ = index;
  if (collecting_reference_) {
    for (std::size_t d = 0; d < dims_; ++d) reference_sum_[d] += x[d];
    if (++reference_count_ == window_) {
      for (double& v : reference_sum_) v /= static_cast<double>(window_);
      set_reference(reference_sum_);
    }
    last_result_ = false;
    return false;
  }
  push(x);
  last_result_ = count_ == window_ && distance() > tau_;
  return last_result_;
}

void CentroidDetector::rebase() {
  collecting_reference_ = true;
  has_reference_ = false;
  reference_sum_.assign(dims_, 0.0);
  reference_count_ = 0;
  std::fill(sum_.begin(), sum_.end(), 0.0);
  count_ = 0;
  head_ = 0;
  pushes_since_recompute_ = 0;
  last_result_ = false;
}

std::string CentroidDetector::describe() const { return fmt::format("centroid:W={},tau={:.6g}", window_, tau_); }

std::vector<double> centroid(std::span<const std::vector<float>> samples) {
  if (samples.empty()) throw std::invalid_argument("centroid of an empty sample set");
  std::vector<double> c(samples.front().size(), 0.0);
  for (const auto& s : samples)
    for (std::size_t d = 0; d < c.size(); ++d) c[d] += s[d];
  for (double& v : c) v /= static_cast<double>(samples.size());
  return c;
}

double calibrate_tau(std::span<const std::vector<float>> samples, std::span<const double> reference,
                     std::size_t window, double k, std::uint64_t seed, std::size_t windows) {
  if (samples.size() < window) throw std::invalid_argument("calibration needs at least W samples");
  util::Rng rng(seed);
  std::vector<double> distances;
  distances.reserve(windows);
  std::vector<double> mean(reference.size());
  for (std::size_t w = 0; w < windows; ++w) {
    std::fill(mean.begin(), mean.end(), 0.0);
    for (std::size_t s = 0; s < window; ++s) {
      const auto& x = samples[util::uniform_index(rng, samples.size())];
      for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += x[d];
    }
    double dist = 0.0;
    for (std::size_t d = 0; d < mean.size(); ++d) {
      const double diff = mean[d] / static_cast<double>(window) - reference[d];
      dist += diff * diff;
    }
    distances.push_back(std::sqrt(dist));
  }
  double mu = 0.0;
  for (double d : distances) mu += d;
  mu /= static_cast<double>(distances.size());
  double var = 0.0;
  for (double d : distances) var += (d - mu) * (d - mu);
  var /= static_cast<double>(distances.size() > 1 ? distances.size() - 1 : 1);
  return mu + k * std::sqrt(var);
}

namespace {

template <class V>
V parse_number(std::string_view text, std::string_view what) {
  V v{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) throw std::invalid_argument(fmt::format("bad {} '{}'", what, text));
  return v;
}

}  // namespace

DetectorSpec parse_detector_spec(std::string_view text) {
  DetectorSpec spec;
  const auto colon = text.find(':');
  const std::string_view kind = text.substr(0, colon);
  const std::string_view args = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  if (kind == "scripted") {
    spec.kind = DetectorSpec::Kind::Scripted;
    spec.trigger_at = args.empty() ? 0 : parse_number<std::size_t>(args, "trigger index");
    return spec;
  }
  if (kind != "centroid") throw std::invalid_argument(fmt::format("unknown drift detector '{}'", kind));
  spec.kind = DetectorSpec::Kind::Centroid;
  std::string_view rest = args;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) throw std::invalid_argument(fmt::format("bad centroid option '{}'", item));
    const std::string_view key = item.substr(0, eq);
    const std::string_view value = item.substr(eq + 1);
    if (key == "W" || key == "w") {
      spec.window = parse_number<std::size_t>(value, "window");
    } else if (key == "tau") {
      spec.tau = parse_number<double>(value, "tau");
    } else {
      throw std::invalid_argument(fmt::format("unknown centroid option '{}'", key));
    }
  }
  return spec;
}

}  // namespace odl::drift
