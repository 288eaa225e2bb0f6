#pragma once

#include <cstdint>
#include <string_view>

#include "odl/oselm/model.hpp"

namespace odl::costmodel {

using oselm::ModelShape;

enum class Variant : std::uint8_t { NoOdl, OdlBase, OdlHash };

std::string_view to_string(Variant v);

inline constexpr std::uint64_t kWordBytes = 4;
inline constexpr double kBytesPerKb = 1000.0;

// Words held on chip, 4 bytes each:
//   NoODL   = nN (alpha) + Nm (beta) + n (input buffer)
//   ODLBase = NoODL + 2N² (P and one N x N working buffer)
//   ODLHash = ODLBase - nN (alpha regenerated instead of stored)
std::uint64_t memory_bytes(Variant variant, const ModelShape& shape);
inline double memory_kb(Variant variant, const ModelShape& shape) {
  return static_cast<double>(memory_bytes(variant, shape)) / kBytesPerKb;
}

// Trainable/stored parameters: ODLHash = Nm + 2N², ODLBase adds nN,
// NoODL = nN + Nm.
std::uint64_t parameter_count(Variant variant, const ModelShape& shape);

enum class FillState : std::uint8_t { Sleep, Idle };
enum class PowerMode : std::uint8_t { Training, Predicting };

// Core timing and power at 10 MHz plus radio energy per exchange. Radio
// defaults: 1 Mbps airtime at nominal 14.4 mW transmit / 13.8 mW receive
// (0 dBm, 3.0 V class BLE SoC); override for a specific radio.
struct PowerParams {
  double t_pred_s = 0.03640;
  double t_train_s = 0.17128;
  double p_pred_mw = 3.39;
  double p_train_mw = 3.37;
  double p_idle_mw = 3.06;
  double p_sleep_mw = 1.33;
  double radio_bitrate_bps = 1e6;
  double p_tx_mw = 14.4;
  double p_rx_mw = 13.8;
  std::uint64_t query_bytes = 2252;
  std::uint64_t response_bytes = 10;
  double event_period_s = 1.0;
  FillState fill = FillState::Sleep;

  double query_airtime_s() const { return static_cast<double>(query_bytes) * 8.0 / radio_bitrate_bps; }
  double response_airtime_s() const { return static_cast<double>(response_bytes) * 8.0 / radio_bitrate_bps; }
  double airtime_s() const { return query_airtime_s() + response_airtime_s(); }
  double e_query_uj() const { return query_airtime_s() * p_tx_mw * 1000.0; }
  double e_resp_uj() const { return response_airtime_s() * p_rx_mw * 1000.0; }
  double fill_mw() const { return fill == FillState::Sleep ? p_sleep_mw : p_idle_mw; }

  static PowerParams for_features(std::size_t features);
  void validate() const;
};

struct PowerReport {
  double event_period_s = 0.0;
  double query_fraction = 0.0;
  double avg_power_mw = 0.0;
  // Average power split; sums to avg_power_mw.
  double compute_mw = 0.0;
  double communication_mw = 0.0;
  double baseline_mw = 0.0;
};

class TimingOverflow : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Energy per event averaged over the period:
//   E = p_pred·t_pred + q·(e_query + e_resp + p_train·t_train) + p_fill·(T − busy)
// with busy = t_pred + q·(t_train + airtime). Predicting mode drops the
// query and training terms.
PowerReport average_power(const PowerParams& params, double query_fraction, PowerMode mode);

}  // namespace odl::costmodel
