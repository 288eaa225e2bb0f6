#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "odl/dataset/har.hpp"
#include "odl/dataset/synthetic.hpp"

using namespace odl::dataset;
namespace fs = std::filesystem;

namespace {

const fs::path kMini = fs::path(ODL_TEST_DATA_DIR) / "har_mini";

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("odl_test_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

// Flat layout with `rows` rows of `width` features per part.
void write_tiny(const fs::path& root, std::size_t width, const std::string& labels, const std::string& subjects) {
  std::string x;
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t f = 0; f < width; ++f) x += "  2.8858451e-001";
    x += "\n";
  }
  for (const std::string part : {"train", "test"}) {
    write(root / ("X_" + part + ".txt"), x);
    write(root / ("y_" + part + ".txt"), labels);
    write(root / ("subject_" + part + ".txt"), subjects);
  }
}

DatasetErrc load_error(const fs::path& root, LoadOptions opts) {
  try {
    load_har(root, opts);
  } catch (const DatasetError& e) {
    return e.code();
  }
  FAIL("expected a dataset error");
  return DatasetErrc::Parse;
}

}  // namespace

TEST_CASE("mini fixture loads in the archive layout") {
  const auto samples = load_har(kMini, {kHarFeatures, false});
  REQUIRE(samples.size() == 200);
  std::size_t train = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    CHECK(samples[i].id == i);
    CHECK(samples[i].features.size() == kHarFeatures);
    CHECK(samples[i].label < kHarClasses);
    CHECK((samples[i].subject >= 1 && samples[i].subject <= 30));
    if (samples[i].origin == Origin::Train) ++train;
  }
  CHECK(train == 138);
  CHECK(std::is_partitioned(samples.begin(), samples.end(), [](const Sample& s) { return s.origin == Origin::Train; }));
  CHECK(load_error(kMini, {}) == DatasetErrc::CountMismatch);  // full counts are enforced by default
}

TEST_CASE("loader parses the public number format") {
  TempDir dir("format");
  write_tiny(dir.path, 3, "1\n6\n", "1\n30\n");
  const auto samples = load_har(dir.path, {3, false});
  REQUIRE(samples.size() == 4);
  CHECK(samples[0].features[0] == doctest::Approx(0.28858451));
  CHECK(samples[0].label == 0);
  CHECK(samples[1].label == 5);
  CHECK(samples[1].subject == 30);
  CHECK(samples[2].origin == Origin::Test);
}

TEST_CASE("loader errors") {
  TempDir dir("errors");
  write_tiny(dir.path, 560, "1\n2\n", "1\n2\n");
  CHECK(load_error(dir.path, {kHarFeatures, false}) == DatasetErrc::RowLength);

  write_tiny(dir.path, 4, "1\n7\n", "1\n2\n");
  CHECK(load_error(dir.path, {4, false}) == DatasetErrc::LabelRange);

  write_tiny(dir.path, 4, "1\n2\n", "1\n31\n");
  CHECK(load_error(dir.path, {4, false}) == DatasetErrc::SubjectRange);

  write_tiny(dir.path, 4, "1\n2\n3\n", "1\n2\n");
  CHECK(load_error(dir.path, {4, false}) == DatasetErrc::CountMismatch);

  write_tiny(dir.path, 4, "1\n2\n", "1\n2\n");
  write(dir.path / "X_test.txt", "0.1 0.2 zzz 0.4\n0.1 0.2 0.3 0.4\n");
  CHECK(load_error(dir.path, {4, false}) == DatasetErrc::Parse);

  write_tiny(dir.path, 4, "1\n2\n", "1\n2\n");
  fs::remove(dir.path / "y_test.txt");
  CHECK(load_error(dir.path, {4, false}) == DatasetErrc::MissingFile);
}

TEST_CASE("drift splits follow the subject rule") {
  const auto samples = load_har(kMini, {kHarFeatures, false});
  const auto splits = make_drift_splits(samples);
  const std::set<std::uint8_t> held(kHeldOutSubjects.begin(), kHeldOutSubjects.end());
  CHECK(splits.train.size() + splits.test0.size() + splits.test1.size() == samples.size());
  for (const auto& s : splits.train) {
    CHECK(held.count(s.subject) == 0);
    CHECK(s.origin == Origin::Train);
  }
  for (const auto& s : splits.test0) {
    CHECK(held.count(s.subject) == 0);
    CHECK(s.origin == Origin::Test);
  }
  for (const auto& s : splits.test1) CHECK(held.count(s.subject) == 1);
  std::set<std::size_t> ids;
  for (const auto* part : {&splits.train, &splits.test0, &splits.test1})
    for (const auto& s : *part) CHECK(ids.insert(s.id).second);

  const auto subject_nine = std::find_if(samples.begin(), samples.end(), [](const Sample& s) { return s.subject == 9; });
  REQUIRE(subject_nine != samples.end());
  CHECK(std::any_of(splits.test1.begin(), splits.test1.end(), [&](const Sample& s) { return s.id == subject_nine->id; }));
  const auto subject_one = std::find_if(samples.begin(), samples.end(), [](const Sample& s) {
    return s.subject == 1 && s.origin == Origin::Train;
  });
  REQUIRE(subject_one != samples.end());
  CHECK(std::any_of(splits.train.begin(), splits.train.end(), [&](const Sample& s) { return s.id == subject_one->id; }));
}

TEST_CASE("on-device partition") {
  const auto p = make_odl_partition(1000, 42);
  CHECK(p.odl_stream.size() == 600);
  CHECK(p.eval_after.size() == 400);
  std::vector<std::size_t> all = p.odl_stream;
  all.insert(all.end(), p.eval_after.begin(), p.eval_after.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i] == i);

  const auto again = make_odl_partition(1000, 42);
  CHECK(again.odl_stream == p.odl_stream);
  const auto other = make_odl_partition(1000, 43);
  CHECK(other.odl_stream.size() == 600);
  CHECK(other.odl_stream != p.odl_stream);
  CHECK(make_odl_partition(7, 1).odl_stream.size() == 4);  // 4.2 rounds to 4
}

TEST_CASE("generated data is deterministic and shaped like the public set") {
  SyntheticHarConfig cfg;
  cfg.total_samples = 360;
  const auto a = make_synthetic_har(cfg, 5);
  const auto b = make_synthetic_har(cfg, 5);
  REQUIRE(a.size() == 360);
  for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a[i].features == b[i].features);
  for (const auto& s : a)
    for (float v : s.features) REQUIRE((v >= -1.0F && v <= 1.0F));
  CHECK(make_synthetic_har(cfg, 6)[0].features != a[0].features);

  TempDir dir("roundtrip");
  write_har_directory(a, dir.path);
  const auto back = load_har(dir.path, {kHarFeatures, false});
  REQUIRE(back.size() == a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(back[i].label == a[i].label);
    CHECK(back[i].subject == a[i].subject);
    for (std::size_t f = 0; f < kHarFeatures; f += 37)
      CHECK(back[i].features[f] == doctest::Approx(a[i].features[f]).epsilon(1e-6));
  }
}
