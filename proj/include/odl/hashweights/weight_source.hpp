#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "odl/hashweights/xorshift16.hpp"
#include "odl/numerics/matrix.hpp"

namespace odl::hashweights {

using numerics::Matrix;
using numerics::ScalarTraits;

// Maps a generator output onto [-scale, scale).
inline double map_output(std::uint16_t u, double scale = 1.0) {
  return (static_cast<double>(u) / 32768.0 - 1.0) * scale;
}

// Element (row, col) of the virtual input-weight matrix obtained by
// streaming the generator from `seed` in row-major order over an
// inputs x hidden layout. Positions wrap with the generator period.
inline double virtual_alpha_element(std::uint16_t seed, std::size_t row, std::size_t col,
                                    std::size_t inputs, std::size_t hidden, double scale = 1.0) {
  if (row >= inputs || col >= hidden) {
    throw std::out_of_range("virtual alpha index (" + std::to_string(row) + "," + std::to_string(col) +
                            ") outside " + std::to_string(inputs) + "x" + std::to_string(hidden));
  }
  Xorshift16 gen(seed);
  const std::size_t steps = (row * hidden + col) % kXorshift16Period + 1;
  std::uint16_t u = 0;
  for (std::size_t s = 0; s < steps; ++s) u = gen.next();
  return map_output(u, scale);
}

// Stored weights as 32-bit random numbers interpreted as signed fractions.
template <class T>
Matrix<T> random_alpha(std::size_t inputs, std::size_t hidden, std::uint64_t seed, double scale = 1.0) {
  std::mt19937 rng(static_cast<std::uint32_t>(seed ^ (seed >> 32)));
  Matrix<T> alpha(inputs, hidden);
  for (T& w : alpha.data()) {
    const auto r = static_cast<std::int32_t>(rng());
    w = ScalarTraits<T>::from_double(static_cast<double>(r) * 0x1.0p-31 * scale);
  }
  return alpha;
}

struct HashedParams {
  std::uint16_t seed = 1;
  double scale = 1.0;
};

// Input-layer weights: either a stored matrix or a generator that
// reproduces the same virtual matrix on every pass.
template <class T>
class WeightSource {
 public:
  static WeightSource stored(Matrix<T> alpha) {
    WeightSource ws;
    ws.inputs_ = alpha.rows();
    ws.hidden_ = alpha.cols();
    ws.source_ = std::move(alpha);
    return ws;
  }

  static WeightSource hashed(std::size_t inputs, std::size_t hidden, std::uint16_t seed,
                             double scale = 1.0) {
    if (seed == 0) throw std::invalid_argument("hashed weight seed must be nonzero");
    WeightSource ws;
    ws.inputs_ = inputs;
    ws.hidden_ = hidden;
    ws.source_ = HashedParams{seed, scale};
    ws.table_ = make_table(scale);
    return ws;
  }

  bool is_hashed() const { return std::holds_alternative<HashedParams>(source_); }
  std::size_t inputs() const { return inputs_; }
  std::size_t hidden() const { return hidden_; }

  const Matrix<T>& stored_alpha() const { return std::get<Matrix<T>>(source_); }
  const HashedParams& hashed_params() const { return std::get<HashedParams>(source_); }

  T element(std::size_t row, std::size_t col) const {
    if (row >= inputs_ || col >= hidden_) throw std::out_of_range("weight index out of range");
    if (const auto* m = std::get_if<Matrix<T>>(&source_)) return (*m)(row, col);
    const auto& h = hashed_params();
    return ScalarTraits<T>::from_double(virtual_alpha_element(h.seed, row, col, inputs_, hidden_, h.scale));
  }

  // out[j] = sum_i x[i] * alpha(i, j), accumulated in the scalar's MAC register.
  void preactivate(std::span<const T> x, std::span<T> out) const {
    if (x.size() != inputs_ || out.size() != hidden_) {
      throw numerics::DimensionError("preactivate: expected " + std::to_string(inputs_) + " inputs and " +
                                     std::to_string(hidden_) + " outputs");
    }
    using Traits = ScalarTraits<T>;
    std::vector<typename Traits::Accum> acc(hidden_, Traits::zero());
    if (const auto* m = std::get_if<Matrix<T>>(&source_)) {
      for (std::size_t i = 0; i < inputs_; ++i) {
        const T xi = x[i];
        const auto row = m->row(i);
        for (std::size_t j = 0; j < hidden_; ++j) Traits::mac(acc[j], xi, row[j]);
      }
    } else {
      Xorshift16 gen(hashed_params().seed);
      const T* table = table_->data();
      for (std::size_t i = 0; i < inputs_; ++i) {
        const T xi = x[i];
        for (std::size_t j = 0; j < hidden_; ++j) Traits::mac(acc[j], xi, table[gen.next()]);
      }
    }
    for (std::size_t j = 0; j < hidden_; ++j) out[j] = Traits::finish(acc[j]);
  }

  Matrix<T> materialize() const {
    if (const auto* m = std::get_if<Matrix<T>>(&source_)) return *m;
    Matrix<T> alpha(inputs_, hidden_);
    Xorshift16 gen(hashed_params().seed);
    for (T& w : alpha.data()) w = (*table_)[gen.next()];
    return alpha;
  }

  template <class U>
  WeightSource<U> rebind() const {
    if (const auto* m = std::get_if<Matrix<T>>(&source_)) {
      return WeightSource<U>::stored(numerics::convert<U>(*m));
    }
    const auto& h = hashed_params();
    return WeightSource<U>::hashed(inputs_, hidden_, h.seed, h.scale);
  }

 private:
  static std::shared_ptr<const std::vector<T>> make_table(double scale) {
    auto table = std::make_shared<std::vector<T>>(65536);
    for (std::size_t u = 0; u < table->size(); ++u) {
      (*table)[u] = ScalarTraits<T>::from_double(map_output(static_cast<std::uint16_t>(u), scale));
    }
    return table;
  }

  std::size_t inputs_ = 0;
  std::size_t hidden_ = 0;
  std::variant<Matrix<T>, HashedParams> source_;
  std::shared_ptr<const std::vector<T>> table_;
};

}  // namespace odl::hashweights
