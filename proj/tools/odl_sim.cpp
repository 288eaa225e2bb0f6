#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/os.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "odl/costmodel/cost.hpp"
#include "odl/dataset/har.hpp"
#include "odl/dataset/synthetic.hpp"
#include "odl/harness/checks.hpp"
#include "odl/harness/experiment.hpp"

namespace fs = std::filesystem;
using namespace odl;

namespace {

struct DataOptions {
  std::string dir;
  bool synthetic = false;
  std::uint64_t synthetic_seed = 1;
  bool partial = false;
};

struct RunOptions {
  DataOptions data;
  std::string approach = "odlhash";
  std::size_t hidden = 128;
  std::vector<std::string> thetas{"1"};
  std::size_t trials = 20;
  std::uint64_t seed = 0;
  std::string scalar = "float64";
  double lambda = 1e-3;
  double alpha_scale = 1.0;
  unsigned tuner_x = 10;
  std::vector<double> ladder{1.0, 0.64, 0.32, 0.16, 0.08};
  bool reset_to_max = false;
  std::optional<std::size_t> warmup;
  unsigned retries = 3;
  std::string transport = "memory";
  std::string drift = "scripted:0";
  unsigned threads = 0;
  std::string out;
  std::string plot_dir;
  bool check = false;
};

void add_data_options(CLI::App* cmd, DataOptions& d) {
  cmd->add_option("--data", d.dir, "HAR dataset root (X_train.txt etc. or train/ and test/)")->envname("ODL_HAR_DATA");
  cmd->add_flag("--synthetic", d.synthetic, "Use the generated HAR-shaped stand-in instead of the real dataset");
  cmd->add_option("--synthetic-seed", d.synthetic_seed, "Seed of the generated stand-in");
  cmd->add_flag("--partial", d.partial, "Accept datasets without the full 7352 + 2947 rows");
}

void add_run_options(CLI::App* cmd, RunOptions& o) {
  add_data_options(cmd, o.data);
  cmd->add_option("--approach", o.approach, "noodl, odlbase or odlhash")
      ->check(CLI::IsMember({"noodl", "odlbase", "odlhash"}, CLI::ignore_case));
  cmd->add_option("--n-hidden", o.hidden, "Hidden nodes N")->check(CLI::PositiveNumber);
  cmd->add_option("--trials", o.trials, "Trials; trial t uses seed + t")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--scalar", o.scalar, "float64, float32 or fixed32");
  cmd->add_option("--lambda", o.lambda, "Ridge term of the initial batch");
  cmd->add_option("--alpha-scale", o.alpha_scale, "Input weights are drawn from [-scale, scale)");
  cmd->add_option("--tuner-x", o.tuner_x, "Consecutive successes before θ steps down");
  cmd->add_option("--ladder", o.ladder, "Descending θ ladder for auto-tuning")->delimiter(',');
  cmd->add_flag("--reset-to-max", o.reset_to_max, "A mismatch resets θ to the top of the ladder");
  cmd->add_option("--warmup", o.warmup, "Samples trained before pruning starts (default max(N, 288))");
  cmd->add_option("--retries", o.retries, "Query re-attempts before a label is given up");
  cmd->add_option("--transport", o.transport, "memory or tcp")->check(CLI::IsMember({"memory", "tcp"}));
  cmd->add_option("--drift", o.drift, "Detector during training: scripted:<i> or centroid:W=<w>[,tau=<t>]");
  cmd->add_option("--threads", o.threads, "Worker threads for trials (0: all cores)");
  cmd->add_option("--out", o.out, "CSV report path");
  cmd->add_option("--plot-dir", o.plot_dir, "Directory for x,y plot series");
  cmd->add_flag("--check", o.check, "Exit nonzero when a result falls outside its acceptance band");
}

dataset::DriftSplits load_splits(const DataOptions& d) {
  dataset::Samples samples;
  if (d.synthetic) {
    samples = dataset::make_synthetic_har({}, d.synthetic_seed);
  } else {
    if (d.dir.empty()) throw std::runtime_error("no dataset: pass --data DIR, set ODL_HAR_DATA, or use --synthetic");
    samples = dataset::load_har(d.dir, {dataset::kHarFeatures, !d.partial});
  }
  return dataset::make_drift_splits(samples);
}

costmodel::Variant parse_variant(const std::string& s) {
  if (s == "noodl") return costmodel::Variant::NoOdl;
  if (s == "odlbase") return costmodel::Variant::OdlBase;
  return costmodel::Variant::OdlHash;
}

harness::ExperimentConfig make_config(const RunOptions& o) {
  harness::ExperimentConfig cfg;
  cfg.variant = parse_variant(o.approach);
  cfg.shape = {dataset::kHarFeatures, o.hidden, dataset::kHarClasses};
  cfg.scalar = numerics::parse_scalar_mode(o.scalar);
  cfg.lambda = o.lambda;
  cfg.alpha_scale = o.alpha_scale;
  cfg.trials = o.trials;
  cfg.seed = o.seed;
  cfg.warmup = o.warmup;
  cfg.retries = o.retries;
  cfg.transport = o.transport == "tcp" ? harness::TransportKind::Tcp : harness::TransportKind::Memory;
  cfg.detector = o.drift;
  cfg.threads = o.threads;
  pruning::TunerConfig tuner{o.ladder, o.tuner_x,
                             o.reset_to_max ? pruning::IncreasePolicy::ResetToMax : pruning::IncreasePolicy::OneStep};
  cfg.settings.clear();
  for (const auto& t : o.thetas) {
    if (t == "auto") {
      cfg.settings.push_back(harness::GateSetting::autotuned(tuner));
    } else {
      cfg.settings.push_back(harness::GateSetting::fixed(std::stod(t)));
    }
  }
  return cfg;
}

void print_summary(const harness::ExperimentReport& report) {
  const auto& cfg = report.config;
  fmt::print("{} N={} {} ({} trials, seeds {}..{})\n", costmodel::to_string(cfg.variant), cfg.shape.hidden,
             numerics::to_string(cfg.scalar), cfg.trials, cfg.seed, cfg.seed + cfg.trials - 1);
  fmt::print("{:>8} {:>16} {:>16} {:>14} {:>12}\n", "setting", "acc_before [%]", "acc_after [%]", "comm vol [%]",
             "theta end");
  for (const auto& s : report.summaries) {
    fmt::print("{:>8} {:>9.2f} ± {:<4.2f} {:>9.2f} ± {:<4.2f} {:>7.1f} ± {:<4.1f} {:>12.3f}\n", s.setting,
               100 * s.acc_before.mean, 100 * s.acc_before.std, 100 * s.acc_after.mean, 100 * s.acc_after.std,
               s.comm_volume_pct.mean, s.comm_volume_pct.std, s.final_theta.mean);
  }
}

bool report_checks(const std::vector<harness::CheckResult>& checks) {
  bool ok = true;
  for (const auto& c : checks) {
    fmt::print("[{}] {}: {}\n", c.passed ? "PASS" : "FAIL", c.name, c.detail);
    ok = ok && c.passed;
  }
  return ok;
}

bool has_setting(const harness::ExperimentReport& r, const std::string& label) {
  for (const auto& s : r.summaries)
    if (s.setting == label) return true;
  return false;
}

int run_and_report(const RunOptions& o, const harness::ExperimentConfig& cfg, bool sweep) {
  const auto splits = load_splits(o.data);
  fmt::print("splits: train {}, test0 {}, test1 {}\n", splits.train.size(), splits.test0.size(), splits.test1.size());
  const auto report = harness::run_experiment(cfg, splits);
  print_summary(report);
  if (!o.out.empty()) harness::write_csv(o.out, report);
  if (!o.plot_dir.empty()) harness::write_plot_series(o.plot_dir, harness::sweep_plot_series(report));
  if (!o.check) return 0;

  std::vector<harness::CheckResult> checks;
  if (sweep) checks.push_back(harness::check_theta_trend(report));
  if (has_setting(report, "auto") && has_setting(report, "1")) checks.push_back(harness::check_autotune(report));
  if (!sweep && cfg.shape.hidden == 128) {
    if (cfg.variant == costmodel::Variant::NoOdl) {
      checks.push_back(harness::check_accuracy_band("NoODL accuracy", report.summaries.front(), harness::kNoOdlBand));
    } else if (cfg.variant == costmodel::Variant::OdlHash && has_setting(report, "1")) {
      checks.push_back(harness::check_accuracy_band("ODLHash accuracy", report.summary("1"), harness::kOdlHashBand));
    }
  }
  if (checks.empty()) {
    fmt::print("no acceptance band applies to this configuration\n");
    return 0;
  }
  return report_checks(checks) ? 0 : 1;
}

struct CostOptions {
  std::string out_dir;
  std::string fill = "sleep";
  double bitrate = 1e6;
  double tx_mw = 14.4;
  double rx_mw = 13.8;
  std::vector<double> periods{1.0, 5.0, 10.0};
  bool check = false;
};

int run_cost_model(const CostOptions& o) {
  const std::vector<costmodel::Variant> variants{costmodel::Variant::NoOdl, costmodel::Variant::OdlBase,
                                                 costmodel::Variant::OdlHash};
  std::string memory = "variant,n_hidden,bytes,kb\n";
  std::string params = "variant,n_hidden,parameters\n";
  for (auto v : variants) {
    for (std::size_t n_hidden : harness::kReferenceHidden) {
      const oselm::ModelShape shape{dataset::kHarFeatures, n_hidden, dataset::kHarClasses};
      memory += fmt::format("{},{},{},{:.2f}\n", costmodel::to_string(v), n_hidden, costmodel::memory_bytes(v, shape),
                            costmodel::memory_kb(v, shape));
      params += fmt::format("{},{},{}\n", costmodel::to_string(v), n_hidden, costmodel::parameter_count(v, shape));
    }
  }
  auto pp = costmodel::PowerParams::for_features(dataset::kHarFeatures);
  pp.fill = o.fill == "idle" ? costmodel::FillState::Idle : costmodel::FillState::Sleep;
  pp.radio_bitrate_bps = o.bitrate;
  pp.p_tx_mw = o.tx_mw;
  pp.p_rx_mw = o.rx_mw;
  std::string power = "event_period_s,query_fraction,avg_power_mw,compute_mw,communication_mw,baseline_mw\n";
  for (double period : o.periods) {
    pp.event_period_s = period;
    for (int k = 0; k <= 20; ++k) {
      const double q = k / 20.0;
      const auto r = costmodel::average_power(pp, q, costmodel::PowerMode::Training);
      power += fmt::format("{:g},{:.2f},{:.6f},{:.6f},{:.6f},{:.6f}\n", period, q, r.avg_power_mw, r.compute_mw,
                           r.communication_mw, r.baseline_mw);
    }
  }
  if (o.out_dir.empty()) {
    fmt::print("{}\n{}\n{}", memory, params, power);
  } else {
    fs::create_directories(o.out_dir);
    for (const auto& [name, text] : {std::pair{"memory.csv", &memory}, {"parameters.csv", &params}, {"power.csv", &power}}) {
      auto f = fmt::output_file((fs::path(o.out_dir) / name).string());
      f.print("{}", *text);
    }
    fmt::print("wrote memory.csv, parameters.csv, power.csv to {}\n", o.out_dir);
  }
  if (!o.check) return 0;
  return report_checks({harness::check_memory_table(), harness::check_parameter_counts(), harness::check_power_trends()})
             ? 0
             : 1;
}

int run_split(const DataOptions& d, std::uint64_t seed, const std::string& out) {
  const auto splits = load_splits(d);
  const auto part = dataset::make_odl_partition(splits.test1.size(), seed);
  fmt::print("train {}  test0 {}  test1 {} (odl stream {}, eval {})\n", splits.train.size(), splits.test0.size(),
             splits.test1.size(), part.odl_stream.size(), part.eval_after.size());
  if (out.empty()) return 0;
  auto f = fmt::output_file(out);
  f.print("id,subject,label,origin,split\n");
  const auto row = [&](const dataset::Sample& s, std::string_view split) {
    f.print("{},{},{},{},{}\n", s.id, s.subject, s.label + 1, s.origin == dataset::Origin::Train ? "train" : "test",
            split);
  };
  for (const auto& s : splits.train) row(s, "train");
  for (const auto& s : splits.test0) row(s, "test0");
  for (std::size_t i : part.odl_stream) row(splits.test1[i], "odl_stream");
  for (std::size_t i : part.eval_after) row(splits.test1[i], "eval_after");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"On-device learning simulator: OS-ELM edge devices with a teacher, pruning and cost models"};
  app.set_config("--config", "", "TOML file with option values (sections per subcommand)");
  app.require_subcommand(1);

  RunOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Run the before/after drift experiment over several trials");
  add_run_options(simulate, sim);
  simulate->add_option("--theta", sim.thetas, "Confidence threshold(s): a number in (0, 1] or 'auto'");
  bool theta_auto = false;
  simulate->add_flag("--theta-auto", theta_auto, "Same as --theta auto");

  RunOptions sweep;
  sweep.thetas = {"0.01", "0.08", "0.16", "0.32", "0.64", "1"};
  auto* sweep_cmd = app.add_subcommand("sweep-theta", "Sweep fixed thresholds plus auto-tuning on shared trials");
  add_run_options(sweep_cmd, sweep);
  sweep_cmd->add_option("--thetas", sweep.thetas, "Fixed thresholds to sweep")->delimiter(',');

  CostOptions cost;
  auto* cost_cmd = app.add_subcommand("cost-model", "Memory, parameter and power tables as CSV");
  cost_cmd->add_option("--out-dir", cost.out_dir, "Write CSV files here instead of stdout");
  cost_cmd->add_option("--fill", cost.fill, "Power state between events")->check(CLI::IsMember({"sleep", "idle"}));
  cost_cmd->add_option("--bitrate", cost.bitrate, "Radio bitrate [bit/s]");
  cost_cmd->add_option("--tx-mw", cost.tx_mw, "Radio transmit power [mW]");
  cost_cmd->add_option("--rx-mw", cost.rx_mw, "Radio receive power [mW]");
  cost_cmd->add_option("--periods", cost.periods, "Event periods [s]")->delimiter(',');
  cost_cmd->add_flag("--check", cost.check, "Exit nonzero unless the reference tables and power trends hold");

  DataOptions split_data;
  std::uint64_t split_seed = 0;
  std::string split_out;
  auto* split_cmd = app.add_subcommand("split-dataset", "Show or export the drift splits and the on-device partition");
  add_data_options(split_cmd, split_data);
  split_cmd->add_option("--seed", split_seed, "Partition seed");
  split_cmd->add_option("--out", split_out, "CSV listing the split of every sample");

  std::string fixture_out;
  std::size_t fixture_total = 0;
  std::uint64_t fixture_seed = 1;
  auto* fixture_cmd = app.add_subcommand("make-fixture", "Write a generated HAR-shaped dataset in the public text layout");
  fixture_cmd->add_option("--out", fixture_out, "Output directory")->required();
  fixture_cmd->add_option("--total", fixture_total, "Total rows (0: full size)");
  fixture_cmd->add_option("--seed", fixture_seed, "Generator seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) {
      if (theta_auto) {
        if (simulate->count("--theta") == 0) sim.thetas.clear();
        sim.thetas.push_back("auto");
      }
      return run_and_report(sim, make_config(sim), false);
    }
    if (*sweep_cmd) {
      auto cfg = make_config(sweep);
      std::vector<double> thetas;
      for (const auto& t : sweep.thetas) thetas.push_back(std::stod(t));
      cfg.settings = harness::sweep_settings(
          thetas, {sweep.ladder, sweep.tuner_x,
                   sweep.reset_to_max ? pruning::IncreasePolicy::ResetToMax : pruning::IncreasePolicy::OneStep});
      return run_and_report(sweep, cfg, true);
    }
    if (*cost_cmd) return run_cost_model(cost);
    if (*split_cmd) return run_split(split_data, split_seed, split_out);
    if (*fixture_cmd) {
      dataset::SyntheticHarConfig gen;
      gen.total_samples = fixture_total;
      const auto samples = dataset::make_synthetic_har(gen, fixture_seed);
      dataset::write_har_directory(samples, fixture_out);
      fmt::print("wrote {} rows to {}\n", samples.size(), fixture_out);
      return 0;
    }
  } catch (const std::exception& e) {
    fmt::print(stderr, "odl-sim: {}\n", e.what());
    return 2;
  }
  return 0;
}
