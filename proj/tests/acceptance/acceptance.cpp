// Acceptance criteria that run without the activity-recognition dataset.
// Criteria 3, 4, 5 and 9 are reported by acceptance_har; here they run on
// the generated stand-in data as informational lines only.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fmt/format.h>
#include <functional>
#include <sstream>
#include <thread>

#include "har_criteria.hpp"
#include "odl/costmodel/cost.hpp"
#include "odl/dataset/synthetic.hpp"
#include "odl/hashweights/xorshift16.hpp"
#include "odl/oselm/model.hpp"
#include "odl/protocol/channel.hpp"
#include "odl/protocol/memory_transport.hpp"
#include "odl/protocol/tcp_transport.hpp"
#include "odl/protocol/teacher.hpp"
#include "odl/util/rng.hpp"
#include "oracles.hpp"

using namespace odl;
using acceptance::Line;
using harness::CheckResult;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

CheckResult timed(CheckResult r, std::chrono::steady_clock::time_point t0, double limit_s) {
  const double s = seconds_since(t0);
  r.passed = r.passed && s < limit_s;
  r.detail += fmt::format(" ({:.3f} s, limit {} s)", s, limit_s);
  return r;
}

CheckResult oselm_oracle() {
  const oselm::ModelShape shape{8, 16, 3};
  constexpr std::size_t kInit = 50, kTotal = 200;
  util::Rng rng(2024);
  oselm::OselmModel<double> model(shape, hashweights::WeightSource<double>::hashed(8, 16, 99, 1.0));
  numerics::Matrix<double> xs(kTotal, shape.inputs), ys(kTotal, shape.outputs);
  for (std::size_t i = 0; i < kTotal; ++i) {
    for (double& v : xs.row(i)) v = 2.0 * util::uniform01(rng) - 1.0;
    ys.row(i)[util::uniform_index(rng, shape.outputs)] = 1.0;
  }
  numerics::Matrix<double> x0(kInit, shape.inputs), y0(kInit, shape.outputs);
  for (std::size_t i = 0; i < kInit; ++i) {
    std::copy(xs.row(i).begin(), xs.row(i).end(), x0.row(i).begin());
    std::copy(ys.row(i).begin(), ys.row(i).end(), y0.row(i).begin());
  }
  model.init_train(x0, y0, 0.0);
  for (std::size_t i = kInit; i < kTotal; ++i) model.seq_train(xs.row(i), ys.row(i));

  // Reference: normal equations over all samples in long double, with the
  // hidden layer recomputed from the materialized input weights.
  const auto alpha = model.weights().materialize();
  oracle::Mat h(kTotal, std::vector<long double>(shape.hidden)), y(kTotal, std::vector<long double>(shape.outputs));
  for (std::size_t i = 0; i < kTotal; ++i) {
    for (std::size_t k = 0; k < shape.hidden; ++k) {
      long double z = 0.0L;
      for (std::size_t d = 0; d < shape.inputs; ++d) z += static_cast<long double>(xs(i, d)) * alpha(d, k);
      h[i][k] = oracle::sigmoid(z);
    }
    for (std::size_t j = 0; j < shape.outputs; ++j) y[i][j] = ys(i, j);
  }
  const auto beta = oracle::least_squares(h, y, 0.0L);
  long double diff = 0.0L, norm = 0.0L;
  for (std::size_t k = 0; k < shape.hidden; ++k)
    for (std::size_t j = 0; j < shape.outputs; ++j) {
      const long double d = static_cast<long double>(model.beta()(k, j)) - beta[k][j];
      diff += d * d;
      norm += beta[k][j] * beta[k][j];
    }
  const double rel = static_cast<double>(std::sqrt(diff / norm));
  return {"sequential vs batch least squares", rel <= 1e-6,
          fmt::format("50 + 150 samples, N=16 n=8 m=3 lambda=0: relative beta error {:.3e} (need <= 1e-6)", rel)};
}

CheckResult xorshift() {
  hashweights::Xorshift16 gen(1);
  const auto first = gen.next();
  std::uint32_t period = 1;
  bool zero = false;
  while (gen.state() != 1) {
    zero = zero || gen.next() == 0;
    ++period;
    if (period > 70000) break;
  }
  bool zero_seed_rejected = false;
  try {
    hashweights::Xorshift16 bad(0);
  } catch (const std::invalid_argument&) {
    zero_seed_rejected = true;
  }
  return {"xorshift16", first == 33153 && period == 65535 && !zero && zero_seed_rejected,
          fmt::format("next(1) = {}, period {}, zero produced: {}, zero seed rejected: {}", first, period, zero,
                      zero_seed_rejected)};
}

struct SoakResult {
  std::uint64_t queries = 0, wrong_labels = 0, misrouted = 0, stale = 0, byte_errors = 0, conservation_errors = 0;

  void add(const protocol::TeacherChannel& ch, const protocol::TrafficLedger& l, std::uint64_t issued,
           std::uint64_t wrong) {
    queries += issued;
    wrong_labels += wrong;
    misrouted += ch.misrouted();
    stale += ch.stale();
    if (l.samples_accounted() != issued || l.queries_sent != issued) ++conservation_errors;
    if (l.bytes_sent != l.queries_sent * 2252 || l.bytes_received != l.queries_sent * 10) ++byte_errors;
  }
  bool clean() const { return wrong_labels + misrouted + stale + byte_errors + conservation_errors == 0; }
};

CheckResult protocol_soak() {
  constexpr std::size_t kFeatures = 561, kEdges = 3, kQueries = 10'000, kDistinct = 2000;
  util::Rng rng(77);
  protocol::OracleTeacher teacher(kFeatures);
  std::vector<std::vector<float>> xs(kDistinct, std::vector<float>(kFeatures));
  std::vector<std::uint8_t> labels(kDistinct);
  for (std::size_t i = 0; i < kDistinct; ++i) {
    for (float& v : xs[i]) v = static_cast<float>(2.0 * util::uniform01(rng) - 1.0);
    labels[i] = static_cast<std::uint8_t>(util::uniform_index(rng, 6));
    teacher.add_sample<float>(xs[i], labels[i]);
  }
  const auto sample_for = [&](std::size_t q) { return (q * 7919) % kDistinct; };

  // Memory hub: one thread, edges take turns query by query.
  SoakResult mem;
  {
    protocol::MemoryHub hub(teacher);
    std::vector<std::unique_ptr<protocol::Transport>> links;
    std::vector<protocol::TeacherChannel> channels;
    std::vector<protocol::TrafficLedger> ledgers(kEdges);
    std::vector<std::uint64_t> issued(kEdges), wrong(kEdges);
    for (std::size_t e = 0; e < kEdges; ++e) links.push_back(hub.connect());
    for (std::size_t e = 0; e < kEdges; ++e)
      channels.emplace_back(*links[e], static_cast<std::uint8_t>(e), kFeatures, 6, 0);
    for (std::size_t q = 0; q < kQueries; ++q) {
      const std::size_t e = q % kEdges, s = sample_for(q);
      const auto r = channels[e].acquire_label<float>(xs[s], ledgers[e]);
      ++issued[e];
      if (!r.available || r.label != labels[s]) ++wrong[e];
    }
    for (std::size_t e = 0; e < kEdges; ++e) mem.add(channels[e], ledgers[e], issued[e], wrong[e]);
  }

  // Loopback sockets: each edge on its own thread against one server.
  SoakResult tcp;
  {
    protocol::TcpTeacherServer server(teacher);
    server.start();
    std::vector<std::unique_ptr<protocol::TcpClientTransport>> links;
    std::vector<protocol::TeacherChannel> channels;
    std::vector<protocol::TrafficLedger> ledgers(kEdges);
    std::vector<std::uint64_t> issued(kEdges), wrong(kEdges);
    for (std::size_t e = 0; e < kEdges; ++e)
      links.push_back(std::make_unique<protocol::TcpClientTransport>("127.0.0.1", server.port()));
    for (std::size_t e = 0; e < kEdges; ++e)
      channels.emplace_back(*links[e], static_cast<std::uint8_t>(e), kFeatures, 6, 0);
    {
      std::vector<std::jthread> edges;
      for (std::size_t e = 0; e < kEdges; ++e) {
        edges.emplace_back([&, e] {
          for (std::size_t q = e; q < kQueries; q += kEdges) {
            const std::size_t s = sample_for(q);
            const auto r = channels[e].acquire_label<float>(xs[s], ledgers[e]);
            ++issued[e];
            if (!r.available || r.label != labels[s]) ++wrong[e];
          }
        });
      }
    }
    for (std::size_t e = 0; e < kEdges; ++e) tcp.add(channels[e], ledgers[e], issued[e], wrong[e]);
    if (server.answered() != kQueries) ++tcp.conservation_errors;
    server.stop();
  }

  const auto describe = [](const SoakResult& r) {
    return fmt::format("{} queries, {} wrong labels, {} misrouted, {} stale, {} byte-count and {} conservation errors",
                       r.queries, r.wrong_labels, r.misrouted, r.stale, r.byte_errors, r.conservation_errors);
  };
  return {"protocol soak", mem.clean() && tcp.clean() && mem.queries == kQueries && tcp.queries == kQueries,
          fmt::format("3 edges, n=561, 2252/10 bytes per exchange. memory: {}. tcp: {}", describe(mem), describe(tcp))};
}

CheckResult determinism() {
  dataset::SyntheticHarConfig data;
  data.total_samples = 1500;
  const auto splits = dataset::make_drift_splits(dataset::make_synthetic_har(data, 3));
  harness::ExperimentConfig cfg;
  cfg.shape = {dataset::kHarFeatures, 32, dataset::kHarClasses};
  cfg.trials = 4;
  cfg.seed = 500;
  cfg.warmup = 20;
  cfg.settings = harness::sweep_settings({0.08, 0.32, 1.0}, {});
  const auto csv = [&](unsigned threads) {
    auto c = cfg;
    c.threads = threads;
    std::ostringstream os;
    harness::write_csv(os, harness::run_experiment(c, splits));
    return os.str();
  };
  const auto first = csv(1);
  const auto second = csv(1);
  const auto parallel = csv(4);
  return {"determinism", first == second && first == parallel,
          fmt::format("{}-byte report, repeated run identical: {}, 4-thread run identical: {}", first.size(),
                      first == second, first == parallel)};
}

std::size_t surrogate_trials() {
  if (const char* env = std::getenv("ODL_SURROGATE_TRIALS")) return std::strtoul(env, nullptr, 10);
  return 20;
}

}  // namespace

int main() {
  bool ok = true;
  const auto report = [&](int criterion, const std::function<CheckResult()>& fn) {
    Line line{criterion, {}};
    try {
      line.result = fn();
    } catch (const std::exception& e) {
      line.result = {"exception", false, e.what()};
    }
    ok = ok && line.result.passed;
    acceptance::print(line);
  };

  report(1, [] {
    const auto t0 = std::chrono::steady_clock::now();
    return timed(harness::check_memory_table(), t0, 1.0);
  });
  report(2, [] {
    const auto t0 = std::chrono::steady_clock::now();
    return timed(harness::check_parameter_counts(), t0, 1.0);
  });
  for (int c : {3, 4, 5}) fmt::print("criterion {:>2}: SKIP needs the activity-recognition dataset (acceptance_har)\n", c);
  report(6, [] { return harness::check_power_trends(); });
  report(7, oselm_oracle);
  report(8, xorshift);
  fmt::print("criterion  9: SKIP needs the activity-recognition dataset (acceptance_har)\n");
  report(10, protocol_soak);
  report(11, determinism);

  const std::size_t trials = surrogate_trials();
  if (trials > 0) {
    fmt::print("stand-in data, {} trials, informational only:\n", trials);
    std::fflush(stdout);
    try {
      const auto splits = dataset::make_drift_splits(dataset::make_synthetic_har({}, 1));
      for (const auto& line : acceptance::har_criteria(splits, trials, 0)) acceptance::print(line, "  stand-in ");
    } catch (const std::exception& e) {
      fmt::print("  stand-in run failed: {}\n", e.what());
    }
  }
  fmt::print("{}\n", ok ? "ALL PASS" : "FAILURES");
  return ok ? 0 : 1;
}
