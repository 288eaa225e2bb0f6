#include <doctest.h>

#include <cmath>
#include <sstream>

#include "../support/oracles.hpp"
#include "odl/oselm/checkpoint.hpp"
#include "odl/oselm/model.hpp"
#include "odl/util/rng.hpp"

using namespace odl::oselm;
using odl::numerics::Fixed32;
using odl::numerics::Matrix;
using odl::util::Rng;

namespace {

Matrix<double> random_matrix(Rng& rng, std::size_t r, std::size_t c, double lo = -1.0, double hi = 1.0) {
  Matrix<double> m(r, c);
  for (double& v : m.data()) v = lo + (hi - lo) * odl::util::uniform01(rng);
  return m;
}

oracle::Mat to_oracle(const Matrix<double>& m, std::size_t first = 0, std::size_t count = SIZE_MAX) {
  oracle::Mat out;
  for (std::size_t i = first; i < std::min(m.rows(), first + count); ++i)
    out.emplace_back(m.row(i).begin(), m.row(i).end());
  return out;
}

double relative_error(const Matrix<double>& got, const oracle::Mat& want) {
  long double num = 0.0L, den = 0.0L;
  for (std::size_t i = 0; i < got.rows(); ++i)
    for (std::size_t j = 0; j < got.cols(); ++j) {
      const long double d = got(i, j) - want[i][j];
      num += d * d;
      den += want[i][j] * want[i][j];
    }
  return static_cast<double>(std::sqrt(num / den));
}

// One-hot targets for random labels.
Matrix<double> random_targets(Rng& rng, std::size_t rows, std::size_t classes) {
  Matrix<double> y(rows, classes);
  for (std::size_t i = 0; i < rows; ++i) y(i, odl::util::uniform_index(rng, classes)) = 1.0;
  return y;
}

template <class T>
OselmModel<T> hashed_model(ModelShape shape, std::uint16_t seed = 7) {
  return OselmModel<T>(shape, WeightSource<T>::hashed(shape.inputs, shape.hidden, seed));
}

}  // namespace

TEST_CASE("zero output weights predict the uniform distribution") {
  auto model = hashed_model<double>({5, 4, 6});
  model.set_state(Matrix<double>(4, 6), Matrix<double>::identity(4), 0, 0.0);
  const std::vector<double> x{0.1, -0.2, 0.3, 0.4, -0.5};
  const auto pred = model.predict(x);
  for (double p : pred.probs) CHECK(p == doctest::Approx(1.0 / 6.0));
  CHECK(pred.predicted_class == 0);
}

TEST_CASE("two-node toy matches hand arithmetic") {
  const auto alpha = Matrix<double>::from_rows({{0.5, -1.0}, {2.0, 0.25}});
  OselmModel<double> model({2, 2, 2}, WeightSource<double>::stored(alpha));
  model.set_state(Matrix<double>::from_rows({{1.0, -1.0}, {0.5, 2.0}}), Matrix<double>::identity(2), 0, 0.0);
  const std::vector<double> x{1.0, -1.0};
  const double h0 = 1.0 / (1.0 + std::exp(1.5));   // z0 = 0.5 - 2.0
  const double h1 = 1.0 / (1.0 + std::exp(1.25));  // z1 = -1.0 - 0.25
  const double o0 = h0 * 1.0 + h1 * 0.5;
  const double o1 = -h0 + 2.0 * h1;
  const double p0 = std::exp(o0) / (std::exp(o0) + std::exp(o1));
  const auto pred = model.predict(x);
  CHECK(std::abs(pred.hidden[0] - h0) < 1e-12);
  CHECK(std::abs(pred.hidden[1] - h1) < 1e-12);
  CHECK(std::abs(pred.probs[0] - p0) < 1e-12);
  CHECK(std::abs(pred.probs[1] - (1.0 - p0)) < 1e-12);
  CHECK(pred.predicted_class == (p0 >= 0.5 ? 0U : 1U));
}

TEST_CASE("softmax is shift invariant and argmax takes the first maximum") {
  const std::vector<double> raw{0.3, -1.2, 2.5, 2.5, 0.0};
  auto shifted = raw;
  for (double& v : shifted) v += 37.25;
  const auto a = softmax(raw);
  const auto b = softmax(shifted);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
  CHECK(argmax(a) == 2);
  CHECK(argmax(b) == 2);
}

TEST_CASE("orthonormal hidden outputs give P = I and beta = Y") {
  auto model = hashed_model<double>({3, 4, 2});
  Rng rng(1);
  const auto y = random_matrix(rng, 4, 2);
  model.init_train_hidden(Matrix<double>::identity(4), y, 0.0);
  CHECK(model.p() == Matrix<double>::identity(4));
  CHECK(model.beta() == y);
  CHECK(model.trained_count() == 4);
}

TEST_CASE("initial batch solves ridge least squares") {
  Rng rng(2);
  auto model = hashed_model<double>({3, 12, 4});
  const auto h = random_matrix(rng, 80, 12, 0.0, 1.0);
  const auto y = random_targets(rng, 80, 4);
  model.init_train_hidden(h, y, 1e-3);
  CHECK(relative_error(model.beta(), oracle::least_squares(to_oracle(h), to_oracle(y), 1e-3L)) < 1e-8);
}

TEST_CASE("regularization keeps a degenerate batch solvable") {
  Rng rng(3);
  auto h = random_matrix(rng, 30, 6, 0.0, 1.0);
  for (std::size_t i = 0; i < h.rows(); ++i) h(i, 2) = 0.0;  // dead hidden node
  const auto y = random_targets(rng, 30, 3);
  auto model = hashed_model<double>({2, 6, 3});
  CHECK_NOTHROW(model.init_train_hidden(h, y, 1e-3));
  CHECK(odl::numerics::all_valid(model.beta()));

  auto unregularized = hashed_model<double>({2, 6, 3});
  CHECK_THROWS_AS(unregularized.init_train_hidden(h, y, 0.0), odl::numerics::NotPositiveDefinite);
  const auto few = Matrix<double>(3, 6, std::vector<double>(18, 0.5));
  CHECK_THROWS_AS(unregularized.init_train_hidden(few, Matrix<double>(3, 3), 0.0), odl::numerics::NotPositiveDefinite);
}

TEST_CASE("scalar recursive update") {
  auto model = hashed_model<double>({1, 1, 2});
  // One hidden node, two outputs; only output 0 carries the scalar case.
  model.set_state(Matrix<double>(1, 2), Matrix<double>::identity(1), 1, 0.0);
  const std::vector<double> h{1.0};
  model.seq_train_hidden(h, std::vector<double>{1.0, 0.0});
  CHECK(model.p()(0, 0) == 0.5);
  CHECK(model.beta()(0, 0) == 0.5);
  CHECK(model.beta()(0, 1) == 0.0);
  CHECK(model.trained_count() == 2);
}

TEST_CASE("zero residual leaves beta unchanged but shrinks P") {
  Rng rng(4);
  auto model = hashed_model<double>({2, 5, 3});
  model.init_train_hidden(random_matrix(rng, 20, 5, 0.0, 1.0), random_targets(rng, 20, 3), 1e-3);
  const auto beta = model.beta();
  const auto p = model.p();
  const std::vector<double> h{0.2, 0.4, 0.6, 0.8, 0.1};
  const auto fitted = model.raw_output(h);
  model.seq_train_hidden(h, fitted);
  CHECK(model.beta() == beta);
  CHECK_FALSE(model.p() == p);
}

TEST_CASE("sequential updates reproduce the batch solution") {
  // Small instance of the defining property: init on A, stream B, compare with a batch fit on A ∪ B.
  Rng rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    const std::size_t total = 40 + 46 * static_cast<std::size_t>(rep);  // up to 454 samples
    const std::size_t first = 20 + odl::util::uniform_index(rng, total - 30);
    const ModelShape shape{4, 10, 3};
    auto model = hashed_model<double>(shape);
    const auto h = random_matrix(rng, total, shape.hidden, 0.0, 1.0);
    const auto y = random_targets(rng, total, shape.outputs);
    Matrix<double> h0(first, shape.hidden), y0(first, shape.outputs);
    for (std::size_t i = 0; i < first; ++i) {
      std::copy(h.row(i).begin(), h.row(i).end(), h0.row(i).begin());
      std::copy(y.row(i).begin(), y.row(i).end(), y0.row(i).begin());
    }
    model.init_train_hidden(h0, y0, 0.0);
    for (std::size_t i = first; i < total; ++i) model.seq_train_hidden(h.row(i), y.row(i));
    CHECK(relative_error(model.beta(), oracle::least_squares(to_oracle(h), to_oracle(y), 0.0L)) < 1e-6);
    CHECK(model.trained_count() == total);
  }
}

TEST_CASE("P stays symmetric over many updates") {
  Rng rng(6);
  auto model = hashed_model<double>({2, 8, 2});
  model.init_train_hidden(random_matrix(rng, 30, 8, 0.0, 1.0), random_targets(rng, 30, 2), 1e-3);
  std::vector<double> h(8);
  for (int k = 0; k < 10000; ++k) {
    for (double& v : h) v = odl::util::uniform01(rng);
    model.seq_train_hidden(h, one_hot(odl::util::uniform_index(rng, 2), 2));
  }
  const auto& p = model.p();
  double worst = 0.0;
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) worst = std::max(worst, std::abs(p(i, j) - p(j, i)));
  CHECK(worst <= 1e-9);
  CHECK(odl::numerics::all_valid(model.beta()));
}

TEST_CASE("predict does not change the model") {
  Rng rng(7);
  auto model = hashed_model<float>({6, 5, 3});
  model.init_train_hidden(random_matrix(rng, 20, 5, 0.0, 1.0), random_targets(rng, 20, 3), 1e-3);
  const auto beta = model.beta();
  const auto p = model.p();
  const std::vector<float> x{0.1F, 0.2F, -0.3F, 0.4F, 0.5F, -0.6F};
  const auto a = model.predict(x);
  const auto b = model.predict(x);
  CHECK(a.probs == b.probs);
  CHECK(model.beta() == beta);
  CHECK(model.p() == p);
}

TEST_CASE("fixed-point update that saturates is rolled back") {
  auto model = hashed_model<Fixed32>({2, 2, 2});
  auto p = Matrix<Fixed32>::from_rows({{20000.0, 0.0}, {0.0, 20000.0}});
  model.set_state(Matrix<Fixed32>(2, 2), p, 5, 1e-3);
  const std::vector<Fixed32> h{Fixed32::from_double(1.0), Fixed32::from_double(1.0)};
  CHECK_THROWS_AS(model.seq_train_hidden(h, std::vector<double>{30000.0, 0.0}), NumericError);
  CHECK(model.p() == p);
  CHECK(model.beta() == Matrix<Fixed32>(2, 2));
  CHECK(model.trained_count() == 5);
}

TEST_CASE("reduced precision models follow float64") {
  Rng rng(8);
  const ModelShape shape{16, 12, 3};
  Matrix<double> xs = random_matrix(rng, 200, 16);
  const auto ys = random_targets(rng, 200, 3);
  auto f64 = hashed_model<double>(shape);
  auto f32 = hashed_model<float>(shape);
  auto fx = hashed_model<Fixed32>(shape);
  f64.init_train(xs, ys, 1e-1);
  f32.init_train(xs, ys, 1e-1);
  fx.init_train(xs, ys, 1e-1);
  for (std::size_t i = 0; i < 20; ++i) {
    const std::vector<float> xf(xs.row(i).begin(), xs.row(i).end());
    const auto a = f64.predict(to_scalars<double>(xf));
    const auto b = f32.predict(to_scalars<float>(xf));
    const auto c = fx.predict(to_scalars<Fixed32>(xf));
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(std::abs(a.probs[j] - b.probs[j]) < 1e-4);
      CHECK(std::abs(a.probs[j] - c.probs[j]) < 2e-2);
    }
  }
}

TEST_CASE("dimension and state guards") {
  auto model = hashed_model<double>({3, 2, 2});
  const std::vector<double> x{1.0, 2.0};
  CHECK_THROWS_AS(model.predict(x), odl::numerics::DimensionError);
  CHECK_THROWS_AS(model.seq_train_hidden(std::vector<double>{0.5, 0.5}, std::vector<double>{1.0, 0.0}),
                  std::logic_error);
  CHECK_THROWS_AS(ModelShape({0, 2, 2}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(one_hot(6, 6), std::out_of_range);
  CHECK(one_hot(3, 6) == std::vector<double>{0, 0, 0, 1, 0, 0});
}

TEST_CASE_TEMPLATE("checkpoint round trip", T, double, float, Fixed32) {
  Rng rng(9);
  const ModelShape shape{6, 5, 3};
  for (bool hashed : {true, false}) {
    auto ws = hashed ? WeightSource<T>::hashed(6, 5, 321, 0.5)
                     : WeightSource<T>::stored(odl::hashweights::random_alpha<T>(6, 5, 17));
    OselmModel<T> model(shape, ws);
    model.init_train(random_matrix(rng, 30, 6), random_targets(rng, 30, 3), 1e-2);
    std::stringstream buf;
    save_checkpoint(buf, model);
    CHECK(peek_checkpoint_mode(buf) == odl::numerics::ScalarTraits<T>::mode);
    const auto back = load_checkpoint<T>(buf);
    CHECK(back.beta() == model.beta());
    CHECK(back.p() == model.p());
    CHECK(back.trained_count() == 30);
    CHECK(back.lambda() == 1e-2);
    CHECK(back.weights().is_hashed() == hashed);
    CHECK(back.weights().materialize() == model.weights().materialize());
  }
}

TEST_CASE("checkpoint errors") {
  auto model = hashed_model<double>({2, 2, 2});
  model.set_state(Matrix<double>(2, 2), Matrix<double>::identity(2), 0, 0.0);
  std::stringstream buf;
  save_checkpoint(buf, model);
  const std::string bytes = buf.str();

  std::stringstream wrong_mode(bytes);
  CHECK_THROWS_AS(load_checkpoint<float>(wrong_mode), CheckpointError);
  std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(load_checkpoint<double>(truncated), CheckpointError);
  std::stringstream garbage("XXXX0000");
  CHECK_THROWS_AS(load_checkpoint<double>(garbage), CheckpointError);
}
