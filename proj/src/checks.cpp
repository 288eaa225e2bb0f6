#include "odl/harness/checks.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <limits>

namespace odl::harness {

namespace {

using costmodel::PowerMode;
using costmodel::Variant;

CheckResult make(std::string name, bool ok, std::string detail) { return {std::move(name), ok, std::move(detail)}; }

double pct(double fraction) { return 100.0 * fraction; }

}  // namespace

CheckResult check_memory_table(double tolerance_kb) {
  constexpr Variant rows[3] = {Variant::NoOdl, Variant::OdlBase, Variant::OdlHash};
  double worst = 0.0;
  std::string where;
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 5; ++c) {
      const double kb = costmodel::memory_kb(rows[r], {561, kReferenceHidden[c], 6});
      const double err = std::abs(kb - kReferenceMemoryKb[r][c]);
      if (err >= worst) {
        worst = err;
        where = fmt::format("{} N={}: {:.3f} vs {:.2f}", costmodel::to_string(rows[r]), kReferenceHidden[c], kb,
                            kReferenceMemoryKb[r][c]);
      }
    }
  }
  return make("memory table", worst <= tolerance_kb, fmt::format("15 cells, worst |err| {:.4f} kB ({})", worst, where));
}

CheckResult check_parameter_counts() {
  const auto p128 = costmodel::parameter_count(Variant::OdlHash, {561, 128, 6});
  const auto p256 = costmodel::parameter_count(Variant::OdlHash, {561, 256, 6});
  const bool ok = p128 == 33536 && p256 == 132608 && std::lround(p128 / 1000.0) == 34 && std::lround(p256 / 1000.0) == 133;
  return make("parameter counts", ok, fmt::format("N=128: {} (~{}k), N=256: {} (~{}k)", p128, std::lround(p128 / 1000.0),
                                                  p256, std::lround(p256 / 1000.0)));
}

CheckResult check_power_trends(const costmodel::PowerParams& params) {
  std::vector<std::string> problems;
  const double periods[3] = {1.0, 5.0, 10.0};
  for (double period : periods) {
    auto p = params;
    p.event_period_s = period;
    const auto at = [&](double q) { return costmodel::average_power(p, q, PowerMode::Training).avg_power_mw; };
    const double p0 = at(0.0);
    const double slope = at(1.0) - p0;
    if (!(slope > 0.0)) problems.push_back(fmt::format("not increasing at {} s", period));
    for (int k = 1; k < 10; ++k) {
      const double q = k / 10.0;
      const double expect = p0 + q * slope;
      if (std::abs(at(q) - expect) > 1e-9 * std::max(1.0, std::abs(expect))) {
        problems.push_back(fmt::format("not affine at q={} ({} s)", q, period));
      }
    }
  }
  for (double q : {0.0, 0.25, 0.5, 1.0}) {
    double prev = std::numeric_limits<double>::infinity();
    for (double period : periods) {
      auto p = params;
      p.event_period_s = period;
      const double w = costmodel::average_power(p, q, PowerMode::Training).avg_power_mw;
      if (!(w < prev)) problems.push_back(fmt::format("not decreasing in period at q={}", q));
      prev = w;
    }
  }
  auto p1 = params;
  p1.event_period_s = 1.0;
  const double predicting = costmodel::average_power(p1, 0.0, PowerMode::Predicting).avg_power_mw;
  const double closed_form = 3.39 * 0.0364 + 1.33 * (1.0 - 0.0364);
  if (std::abs(predicting - closed_form) > 1e-6) {
    problems.push_back(fmt::format("predicting power {:.9f} != {:.9f}", predicting, closed_form));
  }
  std::string detail = fmt::format("predicting at 1 s = {:.6f} mW", predicting);
  for (const auto& s : problems) detail += "; " + s;
  return make("power trends", problems.empty(), detail);
}

CheckResult check_accuracy_band(const std::string& name, const SettingSummary& s, const AccuracyBand& band) {
  const double before = pct(s.acc_before.mean);
  const double after = pct(s.acc_after.mean);
  const bool ok = before >= band.before_lo && before <= band.before_hi && after >= band.after_lo && after <= band.after_hi;
  return make(name, ok,
              fmt::format("{} trials: before {:.2f}±{:.2f} in [{}, {}], after {:.2f}±{:.2f} in [{}, {}]", s.trials, before,
                          pct(s.acc_before.std), band.before_lo, band.before_hi, after, pct(s.acc_after.std),
                          band.after_lo, band.after_hi));
}

CheckResult check_recovery_gap(const SettingSummary& no_odl, const SettingSummary& odl, double gap) {
  const double d = pct(odl.acc_after.mean) - pct(no_odl.acc_after.mean);
  return make("recovery gap", d >= gap, fmt::format("after-drift gain {:.2f} points (need >= {})", d, gap));
}

CheckResult check_autotune(const ExperimentReport& report, double lo, double hi, double max_loss) {
  const auto& autos = report.summary("auto");
  const auto& base = report.summary("1");
  const double reduction = 100.0 - autos.comm_volume_pct.mean;
  const double loss = pct(base.acc_after.mean) - pct(autos.acc_after.mean);
  const bool ok = reduction >= lo && reduction <= hi && loss <= max_loss;
  return make("auto-tuned theta", ok,
              fmt::format("comm reduction {:.2f}% (need [{}, {}]), acc_after loss {:.2f} points (need <= {})", reduction,
                          lo, hi, loss, max_loss));
}

CheckResult check_theta_trend(const ExperimentReport& sweep) {
  std::vector<std::pair<double, const SettingSummary*>> fixed;
  for (const auto& s : sweep.summaries) {
    double theta = 0.0;
    const char* first = s.setting.data();
    const auto [end, ec] = std::from_chars(first, first + s.setting.size(), theta);
    if (ec == std::errc{} && end == first + s.setting.size()) fixed.emplace_back(theta, &s);
  }
  std::sort(fixed.begin(), fixed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  if (fixed.size() < 2) return make("theta trend", false, "sweep needs at least two fixed thresholds");

  std::vector<std::string> problems;
  std::string series;
  for (std::size_t k = 0; k < fixed.size(); ++k) {
    const auto& [theta, s] = fixed[k];
    series += fmt::format("{}{:g}:{:.1f}%/{:.2f}", k ? " " : "", theta, s->comm_volume_pct.mean, pct(s->acc_after.mean));
    if (k > 0 && s->comm_volume_pct.mean < fixed[k - 1].second->comm_volume_pct.mean) {
      problems.push_back(fmt::format("comm volume drops from θ={:g} to θ={:g}", fixed[k - 1].first, theta));
    }
  }
  const double lowest = fixed.front().second->acc_after.mean;
  for (std::size_t k = 1; k < fixed.size(); ++k) {
    if (!(lowest < fixed[k].second->acc_after.mean)) {
      problems.push_back(fmt::format("acc_after at θ={:g} not below θ={:g}", fixed.front().first, fixed[k].first));
    }
  }
  std::string detail = "theta:comm/acc_after " + series;
  for (const auto& p : problems) detail += "; " + p;
  return make("theta trend", problems.empty(), detail);
}

CheckResult check_fixed_parity(const SettingSummary& reference, const SettingSummary& fixed, double max_gap) {
  const double db = std::abs(pct(reference.acc_before.mean) - pct(fixed.acc_before.mean));
  const double da = std::abs(pct(reference.acc_after.mean) - pct(fixed.acc_after.mean));
  return make("fixed-point parity", db <= max_gap && da <= max_gap,
              fmt::format("|before gap| {:.2f}, |after gap| {:.2f} points (need <= {})", db, da, max_gap));
}

}  // namespace odl::harness
