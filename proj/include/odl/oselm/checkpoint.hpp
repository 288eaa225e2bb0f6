#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "odl/oselm/model.hpp"

namespace odl::oselm {

// Binary checkpoint, all integers little-endian:
//   "ODLC" | u16 version | u8 scalar mode | u8 weight kind (0 stored, 1 hashed)
//   | u64 n | u64 N | u64 m | f64 lambda | u64 trained_count
//   | hashed: u16 seed, f64 scale  /  stored: n·N scalars
//   | β (N·m scalars) | P (N·N scalars)
// Scalars use their native width: 8 bytes for float64, 4 otherwise.
inline constexpr std::array<char, 4> kCheckpointMagic{'O', 'D', 'L', 'C'};
inline constexpr std::uint16_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void put_uint(std::ostream& os, std::uint64_t v, std::size_t bytes) {
  for (std::size_t i = 0; i < bytes; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline std::uint64_t get_uint(std::istream& is, std::size_t bytes) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < bytes; ++i) {
    const int c = is.get();
    if (c == std::char_traits<char>::eof()) throw CheckpointError("checkpoint truncated");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return v;
}

template <class T>
void put_matrix(std::ostream& os, const Matrix<T>& m) {
  for (const T& v : m.data()) put_uint(os, ScalarTraits<T>::store(v), ScalarTraits<T>::storage_bytes);
}

template <class T>
Matrix<T> get_matrix(std::istream& is, std::size_t rows, std::size_t cols) {
  Matrix<T> m(rows, cols);
  for (T& v : m.data()) v = ScalarTraits<T>::load(get_uint(is, ScalarTraits<T>::storage_bytes));
  return m;
}

struct CheckpointHeader {
  numerics::ScalarMode mode;
  bool hashed;
  ModelShape shape;
  double lambda;
  std::uint64_t trained;
};

inline CheckpointHeader read_header(std::istream& is) {
  std::array<char, 4> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kCheckpointMagic) throw CheckpointError("not a model checkpoint (bad magic)");
  const auto version = static_cast<std::uint16_t>(get_uint(is, 2));
  if (version != kCheckpointVersion) throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  CheckpointHeader h{};
  const auto mode = get_uint(is, 1);
  if (mode > 2) throw CheckpointError("unknown scalar mode in checkpoint");
  h.mode = static_cast<numerics::ScalarMode>(mode);
  const auto kind = get_uint(is, 1);
  if (kind > 1) throw CheckpointError("unknown weight kind in checkpoint");
  h.hashed = kind == 1;
  h.shape.inputs = get_uint(is, 8);
  h.shape.hidden = get_uint(is, 8);
  h.shape.outputs = get_uint(is, 8);
  h.lambda = std::bit_cast<double>(get_uint(is, 8));
  h.trained = get_uint(is, 8);
  return h;
}

}  // namespace detail

template <class T>
void save_checkpoint(std::ostream& os, const OselmModel<T>& model) {
  using detail::put_uint;
  os.write(kCheckpointMagic.data(), kCheckpointMagic.size());
  put_uint(os, kCheckpointVersion, 2);
  put_uint(os, static_cast<std::uint64_t>(ScalarTraits<T>::mode), 1);
  const auto& ws = model.weights();
  put_uint(os, ws.is_hashed() ? 1 : 0, 1);
  put_uint(os, model.shape().inputs, 8);
  put_uint(os, model.shape().hidden, 8);
  put_uint(os, model.shape().outputs, 8);
  put_uint(os, std::bit_cast<std::uint64_t>(model.lambda()), 8);
  put_uint(os, model.trained_count(), 8);
  if (ws.is_hashed()) {
    put_uint(os, ws.hashed_params().seed, 2);
    put_uint(os, std::bit_cast<std::uint64_t>(ws.hashed_params().scale), 8);
  } else {
    detail::put_matrix(os, ws.stored_alpha());
  }
  detail::put_matrix(os, model.beta());
  detail::put_matrix(os, model.p());
  if (!os) throw CheckpointError("failed writing checkpoint");
}

// Reads the scalar mode without consuming more than the header.
inline numerics::ScalarMode peek_checkpoint_mode(std::istream& is) {
  const auto pos = is.tellg();
  const auto header = detail::read_header(is);
  is.seekg(pos);
  return header.mode;
}

template <class T>
OselmModel<T> load_checkpoint(std::istream& is) {
  const auto h = detail::read_header(is);
  if (h.mode != ScalarTraits<T>::mode) {
    throw CheckpointError("checkpoint scalar mode " + std::string(numerics::to_string(h.mode)) +
                          " does not match requested " + std::string(numerics::to_string(ScalarTraits<T>::mode)));
  }
  h.shape.validate();
  auto weights = [&] {
    if (h.hashed) {
      const auto seed = static_cast<std::uint16_t>(detail::get_uint(is, 2));
      const double scale = std::bit_cast<double>(detail::get_uint(is, 8));
      return WeightSource<T>::hashed(h.shape.inputs, h.shape.hidden, seed, scale);
    }
    return WeightSource<T>::stored(detail::get_matrix<T>(is, h.shape.inputs, h.shape.hidden));
  }();
  OselmModel<T> model(h.shape, std::move(weights));
  auto beta = detail::get_matrix<T>(is, h.shape.hidden, h.shape.outputs);
  auto p = detail::get_matrix<T>(is, h.shape.hidden, h.shape.hidden);
  model.set_state(std::move(beta), std::move(p), h.trained, h.lambda);
  return model;
}

}  // namespace odl::oselm
