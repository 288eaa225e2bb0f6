#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "odl/hashweights/weight_source.hpp"
#include "odl/numerics/linalg.hpp"
#include "odl/numerics/matrix.hpp"

namespace odl::oselm {

using hashweights::WeightSource;
using numerics::Matrix;
using numerics::ScalarTraits;

struct ModelShape {
  std::size_t inputs = 561;   // n
  std::size_t hidden = 128;   // N
  std::size_t outputs = 6;    // m

  void validate() const {
    if (inputs < 1 || hidden < 1 || outputs < 2) {
      throw std::invalid_argument("model shape requires inputs >= 1, hidden >= 1, outputs >= 2");
    }
  }
  bool operator==(const ModelShape&) const = default;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline std::vector<double> softmax(std::span<const double> raw) {
  std::vector<double> out(raw.begin(), raw.end());
  if (out.empty()) return out;
  const double top = *std::max_element(out.begin(), out.end());
  double sum = 0.0;
  for (double& v : out) {
    v = std::exp(v - top);
    sum += v;
  }
  for (double& v : out) v /= sum;
  return out;
}

// First maximum wins ties.
inline std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

inline std::vector<double> one_hot(std::size_t label, std::size_t classes) {
  if (label >= classes) throw std::out_of_range("label " + std::to_string(label) + " >= " + std::to_string(classes));
  std::vector<double> y(classes, 0.0);
  y[label] = 1.0;
  return y;
}

template <class T>
struct Prediction {
  std::vector<double> probs;       // softmax of the raw outputs
  std::size_t predicted_class = 0;
  std::vector<T> hidden;           // hidden-layer output for this input
};

// Single-hidden-layer network: sigmoid hidden layer with fixed input
// weights, linear output layer trained by recursive least squares, softmax
// applied only to report class probabilities.
template <class T>
class OselmModel {
 public:
  using Traits = ScalarTraits<T>;

  OselmModel(ModelShape shape, WeightSource<T> weights) : shape_(shape), weights_(std::move(weights)) {
    shape_.validate();
    if (weights_.inputs() != shape_.inputs || weights_.hidden() != shape_.hidden) {
      throw numerics::DimensionError("weight source does not match model shape");
    }
    beta_ = Matrix<T>(shape_.hidden, shape_.outputs);
    p_ = Matrix<T>(shape_.hidden, shape_.hidden);
  }

  const ModelShape& shape() const { return shape_; }
  const WeightSource<T>& weights() const { return weights_; }
  const Matrix<T>& beta() const { return beta_; }
  const Matrix<T>& p() const { return p_; }
  std::size_t trained_count() const { return trained_count_; }
  bool initialized() const { return initialized_; }
  double lambda() const { return lambda_; }

  std::vector<T> hidden(std::span<const T> x) const {
    if (x.size() != shape_.inputs) {
      throw numerics::DimensionError("input length " + std::to_string(x.size()) + " != " +
                                     std::to_string(shape_.inputs));
    }
    std::vector<T> h(shape_.hidden);
    weights_.preactivate(x, h);
    for (T& v : h) v = Traits::from_double(sigmoid(Traits::to_double(v)));
    return h;
  }

  std::vector<T> raw_output(std::span<const T> h) const {
    std::vector<typename Traits::Accum> acc(shape_.outputs, Traits::zero());
    for (std::size_t i = 0; i < shape_.hidden; ++i) {
      const auto row = beta_.row(i);
      for (std::size_t j = 0; j < shape_.outputs; ++j) Traits::mac(acc[j], h[i], row[j]);
    }
    std::vector<T> out(shape_.outputs);
    for (std::size_t j = 0; j < shape_.outputs; ++j) out[j] = Traits::finish(acc[j]);
    return out;
  }

  Prediction<T> predict(std::span<const T> x) const {
    Prediction<T> pred;
    pred.hidden = hidden(x);
    const std::vector<T> raw = raw_output(pred.hidden);
    std::vector<double> raw_d(raw.size());
    for (std::size_t j = 0; j < raw.size(); ++j) raw_d[j] = Traits::to_double(raw[j]);
    pred.probs = softmax(raw_d);
    pred.predicted_class = argmax(pred.probs);
    return pred;
  }

  // Initial batch phase: P0 = (H0ᵀH0 + λI)⁻¹, β0 = P0·H0ᵀ·Y0. Always solved
  // in float64 and then quantized into the model's scalar type.
  void init_train(const Matrix<double>& xs, const Matrix<double>& ys, double lambda) {
    if (xs.cols() != shape_.inputs) throw numerics::DimensionError("init_train: feature width mismatch");
    const Matrix<double> alpha = weights_.template rebind<double>().materialize();
    Matrix<double> h0 = numerics::matmul(xs, alpha);
    for (double& v : h0.data()) v = sigmoid(v);
    init_train_hidden(h0, ys, lambda);
  }

  void init_train(const Matrix<double>& xs, std::span<const std::uint8_t> labels, double lambda) {
    if (labels.size() != xs.rows()) throw numerics::DimensionError("init_train: label count mismatch");
    Matrix<double> ys(labels.size(), shape_.outputs);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] >= shape_.outputs) throw std::out_of_range("init_train: label out of range");
      ys(i, labels[i]) = 1.0;
    }
    init_train(xs, ys, lambda);
  }

  // Same as init_train with the hidden-layer outputs supplied directly.
  void init_train_hidden(const Matrix<double>& h0, const Matrix<double>& y0, double lambda) {
    if (h0.cols() != shape_.hidden || y0.cols() != shape_.outputs || h0.rows() != y0.rows()) {
      throw numerics::DimensionError("init_train: batch shape mismatch");
    }
    if (lambda < 0.0) throw std::invalid_argument("init_train: lambda must be >= 0");
    const Matrix<double> h0t = numerics::transpose(h0);
    Matrix<double> gram = numerics::matmul(h0t, h0);
    for (std::size_t i = 0; i < gram.rows(); ++i) gram(i, i) += lambda;
    const Matrix<double> p0 = numerics::invert_spd(gram);
    const Matrix<double> beta0 = numerics::matmul(p0, numerics::matmul(h0t, y0));

    Matrix<T> p = numerics::convert<T>(p0);
    Matrix<T> beta = numerics::convert<T>(beta0);
    if (!numerics::all_valid(p) || !numerics::all_valid(beta)) {
      throw NumericError("init_train: initial weights not representable in scalar mode");
    }
    p_ = std::move(p);
    beta_ = std::move(beta);
    lambda_ = lambda;
    trained_count_ = h0.rows();
    initialized_ = true;
  }

  void seq_train(std::span<const T> x, std::span<const double> y) { seq_train_hidden(hidden(x), y); }

  // Rank-1 recursive least squares step on one (h, y) pair:
  //   P ← P − (P hᵀ)(h P) / (1 + h P hᵀ)
  //   β ← β + P hᵀ (y − h β)
  // Computed into scratch and committed only if every entry stays valid, so
  // a failed step leaves the model untouched.
  void seq_train_hidden(std::span<const T> h, std::span<const double> y) {
    if (!initialized_) throw std::logic_error("seq_train before init_train");
    const std::size_t n_hidden = shape_.hidden;
    const std::size_t n_out = shape_.outputs;
    if (h.size() != n_hidden || y.size() != n_out) throw numerics::DimensionError("seq_train: vector length mismatch");

    std::vector<T> ph(n_hidden);
    for (std::size_t i = 0; i < n_hidden; ++i) ph[i] = numerics::dot<T>(p_.row(i), h);
    const T hph = numerics::dot<T>(h, ph);
    const T denom = Traits::from_double(1.0) + hph;
    if (!(Traits::to_double(denom) > 0.0) || !Traits::valid(denom)) {
      throw NumericError("seq_train: 1 + h P hᵀ is not positive (" + std::to_string(Traits::to_double(denom)) + ")");
    }
    std::vector<T> gain(n_hidden);
    for (std::size_t i = 0; i < n_hidden; ++i) gain[i] = ph[i] / denom;

    Matrix<T> p_next(n_hidden, n_hidden);
    for (std::size_t i = 0; i < n_hidden; ++i) {
      for (std::size_t j = i; j < n_hidden; ++j) {
        const T v = p_(i, j) - ph[i] * gain[j];
        p_next(i, j) = v;
        p_next(j, i) = v;
      }
    }

    const std::vector<T> fitted = raw_output(h);
    Matrix<T> beta_next = beta_;
    for (std::size_t j = 0; j < n_out; ++j) {
      const T err = Traits::from_double(y[j]) - fitted[j];
      for (std::size_t i = 0; i < n_hidden; ++i) beta_next(i, j) = beta_(i, j) + gain[i] * err;
    }

    if (!numerics::all_valid(p_next) || !numerics::all_valid(beta_next)) {
      throw NumericError("seq_train: update produced non-finite or saturated values; rolled back");
    }
    p_ = std::move(p_next);
    beta_ = std::move(beta_next);
    ++trained_count_;
  }

  // Restores trained state, e.g. from a checkpoint.
  void set_state(Matrix<T> beta, Matrix<T> p, std::size_t trained_count, double lambda) {
    if (beta.rows() != shape_.hidden || beta.cols() != shape_.outputs || p.rows() != shape_.hidden ||
        p.cols() != shape_.hidden) {
      throw numerics::DimensionError("set_state: matrix shape mismatch");
    }
    beta_ = std::move(beta);
    p_ = std::move(p);
    trained_count_ = trained_count;
    lambda_ = lambda;
    initialized_ = true;
  }

 private:
  ModelShape shape_;
  WeightSource<T> weights_;
  Matrix<T> beta_;
  Matrix<T> p_;
  std::size_t trained_count_ = 0;
  double lambda_ = 0.0;
  bool initialized_ = false;
};

template <class T>
std::vector<T> to_scalars(std::span<const float> features) {
  std::vector<T> out(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) out[i] = ScalarTraits<T>::from_double(features[i]);
  return out;
}

}  // namespace odl::oselm
