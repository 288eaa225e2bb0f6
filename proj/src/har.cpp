#include "odl/dataset/har.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "odl/util/rng.hpp"

namespace odl::dataset {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError(DatasetErrc::MissingFile, fmt::format("cannot open {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path locate(const fs::path& root, const std::string& sub, const std::string& name) {
  if (fs::exists(root / name)) return root / name;
  if (fs::exists(root / sub / name)) return root / sub / name;
  throw DatasetError(DatasetErrc::MissingFile,
                     fmt::format("missing {} (looked in {} and {})", name, root.string(), (root / sub).string()));
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

// Splits text into lines, skipping blank trailing lines.
std::vector<std::string_view> lines_of(const std::string& text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + start, end - start);
    while (!line.empty() && is_space(line.back())) line.remove_suffix(1);
    while (!line.empty() && is_space(line.front())) line.remove_prefix(1);
    if (!line.empty()) lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

std::vector<std::vector<float>> parse_features(const fs::path& path, std::size_t width) {
  const std::string text = read_file(path);
  std::vector<std::vector<float>> rows;
  std::size_t line_no = 0;
  for (std::string_view line : lines_of(text)) {
    ++line_no;
    std::vector<float> row;
    row.reserve(width);
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p < end) {
      while (p < end && is_space(*p)) ++p;
      if (p == end) break;
      if (*p == '+') ++p;
      float v = 0.0F;
      const auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc{}) {
        throw DatasetError(DatasetErrc::Parse, fmt::format("{}:{}: unparsable number", path.string(), line_no));
      }
      row.push_back(v);
      p = next;
    }
    if (row.size() != width) {
      throw DatasetError(DatasetErrc::RowLength, fmt::format("{}:{}: expected {} features, found {}", path.string(),
                                                             line_no, width, row.size()));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<int> parse_ints(const fs::path& path) {
  const std::string text = read_file(path);
  std::vector<int> values;
  std::size_t line_no = 0;
  for (std::string_view line : lines_of(text)) {
    ++line_no;
    int v = 0;
    const auto [next, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc{} || next != line.data() + line.size()) {
      throw DatasetError(DatasetErrc::Parse, fmt::format("{}:{}: expected an integer", path.string(), line_no));
    }
    values.push_back(v);
  }
  return values;
}

void load_part(const fs::path& root, const std::string& part, Origin origin, const LoadOptions& options,
               Samples& out) {
  const auto x = parse_features(locate(root, part, "X_" + part + ".txt"), options.features);
  const auto y_path = locate(root, part, "y_" + part + ".txt");
  const auto s_path = locate(root, part, "subject_" + part + ".txt");
  const auto y = parse_ints(y_path);
  const auto s = parse_ints(s_path);
  if (y.size() != x.size() || s.size() != x.size()) {
    throw DatasetError(DatasetErrc::CountMismatch, fmt::format("{} split: {} feature rows, {} labels, {} subjects",
                                                               part, x.size(), y.size(), s.size()));
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (y[i] < 1 || y[i] > static_cast<int>(kHarClasses)) {
      throw DatasetError(DatasetErrc::LabelRange,
                         fmt::format("{}:{}: label {} outside 1..{}", y_path.string(), i + 1, y[i], kHarClasses));
    }
    if (s[i] < 1 || s[i] > static_cast<int>(kHarSubjects)) {
      throw DatasetError(DatasetErrc::SubjectRange, fmt::format("{}:{}: bad subject id {}", s_path.string(), i + 1, s[i]));
    }
    Sample sample;
    sample.features = x[i];
    sample.label = static_cast<std::uint8_t>(y[i] - 1);
    sample.subject = static_cast<std::uint8_t>(s[i]);
    sample.origin = origin;
    sample.id = out.size();
    out.push_back(std::move(sample));
  }
}

}  // namespace

Samples load_har(const fs::path& root, const LoadOptions& options) {
  Samples samples;
  load_part(root, "train", Origin::Train, options, samples);
  const std::size_t train_rows = samples.size();
  load_part(root, "test", Origin::Test, options, samples);
  const std::size_t test_rows = samples.size() - train_rows;
  if (options.require_full_counts && (train_rows != kHarTrainRows || test_rows != kHarTestRows)) {
    throw DatasetError(DatasetErrc::CountMismatch,
                       fmt::format("expected {} train + {} test rows, found {} + {}", kHarTrainRows, kHarTestRows,
                                   train_rows, test_rows));
  }
  return samples;
}

DriftSplits make_drift_splits(const Samples& samples, std::span<const std::uint8_t> held_out) {
  DriftSplits splits;
  for (const Sample& s : samples) {
    const bool out = std::find(held_out.begin(), held_out.end(), s.subject) != held_out.end();
    if (out) {
      splits.test1.push_back(s);
    } else if (s.origin == Origin::Train) {
      splits.train.push_back(s);
    } else {
      splits.test0.push_back(s);
    }
  }
  if (splits.train.empty() || splits.test0.empty() || splits.test1.empty()) {
    fmt::print(stderr, "warning: degenerate drift split (train {}, test0 {}, test1 {})\n", splits.train.size(),
               splits.test0.size(), splits.test1.size());
  }
  return splits;
}

OdlPartition make_odl_partition(std::size_t test1_size, std::uint64_t seed, double fraction) {
  std::vector<std::size_t> order(test1_size);
  std::iota(order.begin(), order.end(), std::size_t{0});
  util::Rng rng(seed);
  util::shuffle<std::size_t>(order, rng);
  const auto cut = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(test1_size)));
  OdlPartition part;
  part.odl_stream.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cut));
  part.eval_after.assign(order.begin() + static_cast<std::ptrdiff_t>(cut), order.end());
  return part;
}

}  // namespace odl::dataset
