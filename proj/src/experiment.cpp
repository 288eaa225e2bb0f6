#include "odl/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fmt/format.h>
#include <fmt/os.h>
#include <fstream>
#include <map>
#include <set>
#include <thread>

#include "odl/harness/edge_device.hpp"
#include "odl/protocol/memory_transport.hpp"
#include "odl/protocol/tcp_transport.hpp"
#include "odl/protocol/teacher.hpp"
#include "odl/util/rng.hpp"

namespace odl::harness {

namespace {

using dataset::Sample;
using dataset::Samples;
using numerics::Matrix;
using numerics::ScalarTraits;
using oselm::OselmModel;

constexpr std::uint64_t kStoredAlphaSalt = 0xA1FA5EEDULL;

template <class T>
hashweights::WeightSource<T> make_weights(const ExperimentConfig& cfg, std::uint64_t seed) {
  const auto& s = cfg.shape;
  if (cfg.variant == Variant::OdlHash) {
    const auto hseed = static_cast<std::uint16_t>(1 + util::splitmix64(seed) % hashweights::kXorshift16Period);
    return hashweights::WeightSource<T>::hashed(s.inputs, s.hidden, hseed, cfg.alpha_scale);
  }
  return hashweights::WeightSource<T>::stored(
      hashweights::random_alpha<T>(s.inputs, s.hidden, util::splitmix64(seed ^ kStoredAlphaSalt), cfg.alpha_scale));
}

std::vector<std::vector<float>> feature_rows(const Samples& samples) {
  std::vector<std::vector<float>> rows;
  rows.reserve(samples.size());
  for (const auto& s : samples) rows.push_back(s.features);
  return rows;
}

std::unique_ptr<drift::DriftDetector> make_detector(const ExperimentConfig& cfg, const dataset::DriftSplits& splits,
                                                    std::uint64_t seed) {
  const auto spec = drift::parse_detector_spec(cfg.detector);
  if (spec.kind == drift::DetectorSpec::Kind::Scripted) return std::make_unique<drift::ScriptedDetector>(spec.trigger_at);
  const auto rows = feature_rows(splits.train);
  const auto ref = drift::centroid(rows);
  const double tau = spec.tau ? *spec.tau : drift::calibrate_tau(rows, ref, spec.window, 3.0, seed);
  auto det = std::make_unique<drift::CentroidDetector>(cfg.shape.inputs, spec.window, tau);
  det->set_reference(ref);
  return det;
}

template <class T>
struct HiddenSet {
  std::vector<std::vector<T>> hidden;
  std::vector<std::uint8_t> labels;
};

template <class T>
HiddenSet<T> hidden_set(const OselmModel<T>& model, const Samples& samples, std::span<const std::size_t> indices) {
  HiddenSet<T> set;
  set.hidden.reserve(indices.size());
  for (std::size_t i : indices) {
    set.hidden.push_back(model.hidden(oselm::to_scalars<T>(samples[i].features)));
    set.labels.push_back(samples[i].label);
  }
  return set;
}

template <class T>
double accuracy(const OselmModel<T>& model, const HiddenSet<T>& set) {
  if (set.labels.empty()) return 0.0;
  std::size_t correct = 0;
  std::vector<double> raw(model.shape().outputs);
  for (std::size_t k = 0; k < set.labels.size(); ++k) {
    const auto out = model.raw_output(set.hidden[k]);
    for (std::size_t j = 0; j < out.size(); ++j) raw[j] = ScalarTraits<T>::to_double(out[j]);
    if (oselm::argmax(raw) == set.labels[k]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(set.labels.size());
}

std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

std::vector<double> power_for(const ExperimentConfig& cfg, double q) {
  std::vector<double> out;
  for (double period : cfg.event_periods) {
    auto params = cfg.power;
    params.event_period_s = period;
    out.push_back(costmodel::average_power(params, q, costmodel::PowerMode::Training).avg_power_mw);
  }
  return out;
}

void fill_ledger(TrialReport& r, const protocol::TrafficLedger& ledger) {
  r.queries_sent = ledger.queries_sent;
  r.queries_skipped = ledger.queries_skipped;
  r.unavailable = ledger.unavailable;
  r.retries = ledger.retries;
  r.bytes_sent = ledger.bytes_sent;
  r.bytes_received = ledger.bytes_received;
}

template <class T>
std::vector<TrialReport> run_trial_typed(const ExperimentConfig& cfg, const dataset::DriftSplits& splits,
                                         std::size_t trial) {
  const std::uint64_t seed = cfg.seed + trial;
  const auto& shape = cfg.shape;
  if (splits.train.empty() || splits.test0.empty() || splits.test1.empty()) {
    throw std::invalid_argument("drift splits must all be non-empty");
  }

  OselmModel<T> initial(shape, make_weights<T>(cfg, seed));
  {
    Matrix<double> xs(splits.train.size(), shape.inputs);
    std::vector<std::uint8_t> labels(splits.train.size());
    for (std::size_t i = 0; i < splits.train.size(); ++i) {
      const auto& f = splits.train[i].features;
      if (f.size() != shape.inputs) throw numerics::DimensionError("sample width does not match model inputs");
      std::copy(f.begin(), f.end(), xs.row(i).begin());
      labels[i] = splits.train[i].label;
    }
    initial.init_train(xs, labels, cfg.lambda);
  }

  TrialReport base;
  base.trial = trial;
  base.seed = seed;
  base.acc_before = accuracy(initial, hidden_set(initial, splits.test0, iota(splits.test0.size())));

  const auto part = dataset::make_odl_partition(splits.test1.size(), seed, cfg.odl_fraction);
  const auto eval_after = hidden_set(initial, splits.test1, part.eval_after);
  base.stream_size = part.odl_stream.size();

  if (cfg.variant == Variant::NoOdl) {
    base.setting = "none";
    base.acc_after = accuracy(initial, eval_after);
    base.power_mw = power_for(cfg, 0.0);
    return {base};
  }

  protocol::OracleTeacher teacher(shape.inputs);
  for (std::size_t i : part.odl_stream) teacher.add_sample<T>(splits.test1[i].features, splits.test1[i].label);

  auto settings = cfg.settings;
  const bool has_baseline = std::any_of(settings.begin(), settings.end(), [](const auto& s) { return s.is_baseline(); });
  if (!has_baseline) settings.push_back(GateSetting::fixed(1.0));

  std::vector<TrialReport> reports;
  for (const auto& setting : settings) {
    std::unique_ptr<protocol::MemoryHub> hub;
    std::unique_ptr<protocol::TcpTeacherServer> server;
    std::unique_ptr<protocol::Transport> transport;
    if (cfg.transport == TransportKind::Memory) {
      hub = std::make_unique<protocol::MemoryHub>(teacher);
      transport = hub->connect();
    } else {
      server = std::make_unique<protocol::TcpTeacherServer>(teacher, 0, "127.0.0.1");
      server->start();
      transport = std::make_unique<protocol::TcpClientTransport>("127.0.0.1", server->port());
    }
    protocol::TeacherChannel channel(*transport, 1, shape.inputs, shape.outputs, cfg.retries);
    EdgeDevice<T> device(initial, pruning::AutoTuner(setting.tuner), make_detector(cfg, splits, seed), &channel,
                         DeviceConfig{cfg.effective_warmup(), part.odl_stream.size()});
    device.begin_training(part.odl_stream.size());
    for (std::size_t k = 0; k < part.odl_stream.size(); ++k) {
      device.step(splits.test1[part.odl_stream[k]].features, k);
    }

    TrialReport r = base;
    r.setting = setting.label;
    r.acc_after = accuracy(device.model(), eval_after);
    fill_ledger(r, device.ledger());
    r.numeric_faults = device.numeric_faults();
    r.final_theta = device.tuner().theta();
    r.theta_trace = device.theta_trace();
    const double q = r.stream_size == 0 ? 0.0 : static_cast<double>(r.queries_sent) / static_cast<double>(r.stream_size);
    r.power_mw = power_for(cfg, q);
    reports.push_back(std::move(r));
  }

  const auto twin = std::find_if(reports.begin(), reports.end(), [&](const TrialReport& r) {
    return std::any_of(settings.begin(), settings.end(), [&](const auto& s) { return s.label == r.setting && s.is_baseline(); });
  });
  const double reference = static_cast<double>(twin->queries_sent);
  for (auto& r : reports) {
    r.comm_volume_pct = reference > 0.0 ? 100.0 * static_cast<double>(r.queries_sent) / reference : 0.0;
  }
  if (!has_baseline) reports.pop_back();
  return reports;
}

std::string fmt_setting(double theta) { return fmt::format("{:g}", theta); }

}  // namespace

GateSetting GateSetting::fixed(double theta) {
  return GateSetting{fmt_setting(theta), pruning::TunerConfig{{theta}, 1, pruning::IncreasePolicy::OneStep}};
}

GateSetting GateSetting::autotuned(pruning::TunerConfig config) { return GateSetting{"auto", std::move(config)}; }

void ExperimentConfig::validate() const {
  shape.validate();
  if (trials == 0) throw std::invalid_argument("experiment needs at least one trial");
  if (!(odl_fraction > 0.0 && odl_fraction < 1.0)) throw std::invalid_argument("odl fraction must be in (0, 1)");
  if (!(alpha_scale > 0.0)) throw std::invalid_argument("alpha scale must be positive");
  if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
  if (variant != Variant::NoOdl && settings.empty()) throw std::invalid_argument("no gate settings given");
  std::set<std::string> labels;
  for (const auto& s : settings) {
    s.tuner.validate();
    if (!labels.insert(s.label).second) throw std::invalid_argument("duplicate gate setting '" + s.label + "'");
  }
  for (double p : event_periods)
    if (!(p > 0.0)) throw std::invalid_argument("event periods must be positive");
  drift::parse_detector_spec(detector);
}

Stat summarize(const std::vector<double>& values) {
  Stat s;
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return s;
}

std::vector<TrialReport> run_trial(const ExperimentConfig& config, const dataset::DriftSplits& splits,
                                   std::size_t trial) {
  config.validate();
  switch (config.scalar) {
    case numerics::ScalarMode::Float64: return run_trial_typed<double>(config, splits, trial);
    case numerics::ScalarMode::Float32: return run_trial_typed<float>(config, splits, trial);
    case numerics::ScalarMode::Fixed32: return run_trial_typed<numerics::Fixed32>(config, splits, trial);
  }
  throw std::invalid_argument("unknown scalar mode");
}

ExperimentReport run_experiment(const ExperimentConfig& config, const dataset::DriftSplits& splits) {
  config.validate();
  std::vector<std::vector<TrialReport>> per_trial(config.trials);
  std::vector<std::exception_ptr> errors(config.trials);
  std::atomic<std::size_t> next{0};

  unsigned workers = config.threads != 0 ? config.threads : std::max(1U, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, config.trials));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t t = next++; t < config.trials; t = next++) {
          try {
            per_trial[t] = run_trial(config, splits, t);
          } catch (...) {
            errors[t] = std::current_exception();
          }
        }
      });
    }
  }
  for (std::size_t t = 0; t < config.trials; ++t) {
    if (!errors[t]) continue;
    try {
      std::rethrow_exception(errors[t]);
    } catch (const std::exception& e) {
      throw TrialError(config.seed + t, e.what());
    }
  }

  ExperimentReport report;
  report.config = config;
  for (auto& rows : per_trial)
    for (auto& r : rows) report.trials.push_back(std::move(r));

  std::vector<std::string> order;
  for (const auto& r : report.trials)
    if (std::find(order.begin(), order.end(), r.setting) == order.end()) order.push_back(r.setting);
  for (const auto& label : order) {
    SettingSummary s;
    s.setting = label;
    std::vector<double> before, after, comm, bytes, theta;
    std::vector<std::vector<double>> power(config.event_periods.size());
    for (const auto* r : report.trials_for(label)) {
      before.push_back(r->acc_before);
      after.push_back(r->acc_after);
      comm.push_back(r->comm_volume_pct);
      bytes.push_back(static_cast<double>(r->bytes_sent));
      theta.push_back(r->final_theta);
      for (std::size_t p = 0; p < power.size(); ++p) power[p].push_back(r->power_mw[p]);
    }
    s.trials = before.size();
    s.acc_before = summarize(before);
    s.acc_after = summarize(after);
    s.comm_volume_pct = summarize(comm);
    s.bytes_sent = summarize(bytes);
    s.final_theta = summarize(theta);
    for (const auto& p : power) s.power_mw.push_back(summarize(p));
    report.summaries.push_back(std::move(s));
  }
  return report;
}

const SettingSummary& ExperimentReport::summary(const std::string& setting) const {
  for (const auto& s : summaries)
    if (s.setting == setting) return s;
  throw std::out_of_range("no summary for setting '" + setting + "'");
}

std::vector<const TrialReport*> ExperimentReport::trials_for(const std::string& setting) const {
  std::vector<const TrialReport*> out;
  for (const auto& r : trials)
    if (r.setting == setting) out.push_back(&r);
  return out;
}

std::vector<GateSetting> sweep_settings(const std::vector<double>& thetas, const pruning::TunerConfig& autotune) {
  std::vector<GateSetting> out;
  for (double t : thetas) out.push_back(GateSetting::fixed(t));
  out.push_back(GateSetting::autotuned(autotune));
  return out;
}

void write_csv(std::ostream& os, const ExperimentReport& report) {
  const auto& cfg = report.config;
  const std::string prefix = fmt::format("{},{},{}", costmodel::to_string(cfg.variant), cfg.shape.hidden,
                                         numerics::to_string(cfg.scalar));
  os << "approach,n_hidden,scalar,setting,row,trial,seed,acc_before,acc_after,comm_volume_pct,stream_size,"
        "queries_sent,queries_skipped,unavailable,retries,bytes_sent,bytes_received,numeric_faults,final_theta";
  for (double p : cfg.event_periods) os << fmt::format(",power_mw_{:g}s", p);
  os << '\n';
  for (const auto& r : report.trials) {
    os << fmt::format("{},{},trial,{},{},{:.6f},{:.6f},{:.6f},{},{},{},{},{},{},{},{},{:.6f}", prefix, r.setting, r.trial,
                      r.seed, r.acc_before, r.acc_after, r.comm_volume_pct, r.stream_size, r.queries_sent,
                      r.queries_skipped, r.unavailable, r.retries, r.bytes_sent, r.bytes_received, r.numeric_faults,
                      r.final_theta);
    for (double p : r.power_mw) os << fmt::format(",{:.6f}", p);
    os << '\n';
  }
  for (const auto& s : report.summaries) {
    for (const bool mean : {true, false}) {
      const auto pick = [&](const Stat& st) { return mean ? st.mean : st.std; };
      os << fmt::format("{},{},{},,,{:.6f},{:.6f},{:.6f},,,,,,{:.6f},,,{:.6f}", prefix, s.setting, mean ? "mean" : "std",
                        pick(s.acc_before), pick(s.acc_after), pick(s.comm_volume_pct), pick(s.bytes_sent),
                        pick(s.final_theta));
      for (const auto& p : s.power_mw) os << fmt::format(",{:.6f}", pick(p));
      os << '\n';
    }
  }
}

void write_csv(const std::filesystem::path& path, const ExperimentReport& report) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  write_csv(os, report);
}

void write_plot_series(const std::filesystem::path& dir, const std::vector<PlotSeries>& series) {
  std::filesystem::create_directories(dir);
  for (const auto& s : series) {
    auto out = fmt::output_file((dir / (s.name + ".csv")).string());
    out.print("{},{}\n", s.x_label, s.y_label);
    for (const auto& [x, y] : s.points) out.print("{:.6f},{:.6f}\n", x, y);
  }
}

std::vector<PlotSeries> sweep_plot_series(const ExperimentReport& report) {
  PlotSeries comm{"comm_volume_vs_theta", "theta", "comm_volume_pct", {}};
  PlotSeries before{"acc_before_vs_theta", "theta", "acc_before", {}};
  PlotSeries after{"acc_after_vs_theta", "theta", "acc_after", {}};
  std::vector<std::pair<double, const SettingSummary*>> fixed;
  for (const auto& s : report.summaries) {
    double theta = 0.0;
    const auto* first = s.setting.data();
    const auto [end, ec] = std::from_chars(first, first + s.setting.size(), theta);
    if (ec == std::errc{} && end == first + s.setting.size()) fixed.emplace_back(theta, &s);
  }
  std::sort(fixed.begin(), fixed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [theta, s] : fixed) {
    comm.points.emplace_back(theta, s->comm_volume_pct.mean);
    before.points.emplace_back(theta, s->acc_before.mean);
    after.points.emplace_back(theta, s->acc_after.mean);
  }
  return {comm, before, after};
}

}  // namespace odl::harness
