#include "odl/costmodel/cost.hpp"

#include <fmt/format.h>

#include "odl/protocol/messages.hpp"

namespace odl::costmodel {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::NoOdl: return "NoODL";
    case Variant::OdlBase: return "ODLBase";
    case Variant::OdlHash: return "ODLHash";
  }
  return "unknown";
}

std::uint64_t memory_bytes(Variant variant, const ModelShape& shape) {
  shape.validate();
  const std::uint64_t n = shape.inputs;
  const std::uint64_t hidden = shape.hidden;
  const std::uint64_t m = shape.outputs;
  const std::uint64_t no_odl = n * hidden + hidden * m + n;
  const std::uint64_t base = no_odl + 2 * hidden * hidden;
  switch (variant) {
    case Variant::NoOdl: return kWordBytes * no_odl;
    case Variant::OdlBase: return kWordBytes * base;
    case Variant::OdlHash: return kWordBytes * (base - n * hidden);
  }
  return 0;
}

std::uint64_t parameter_count(Variant variant, const ModelShape& shape) {
  shape.validate();
  const std::uint64_t n = shape.inputs;
  const std::uint64_t hidden = shape.hidden;
  const std::uint64_t m = shape.outputs;
  const std::uint64_t hash = hidden * m + 2 * hidden * hidden;
  switch (variant) {
    case Variant::NoOdl: return n * hidden + hidden * m;
    case Variant::OdlBase: return hash + n * hidden;
    case Variant::OdlHash: return hash;
  }
  return 0;
}

PowerParams PowerParams::for_features(std::size_t features) {
  PowerParams p;
  p.query_bytes = protocol::query_wire_size(features);
  p.response_bytes = protocol::kResponseBytes;
  return p;
}

void PowerParams::validate() const {
  for (double v : {t_pred_s, t_train_s, p_pred_mw, p_train_mw, p_idle_mw, p_sleep_mw, radio_bitrate_bps,
                   event_period_s}) {
    if (!(v > 0.0)) throw std::invalid_argument("power parameters must all be positive");
  }
  if (p_tx_mw < 0.0 || p_rx_mw < 0.0) throw std::invalid_argument("radio power must be non-negative");
}

PowerReport average_power(const PowerParams& params, double q, PowerMode mode) {
  params.validate();
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument(fmt::format("query fraction {} outside [0, 1]", q));
  const double qq = mode == PowerMode::Training ? q : 0.0;
  const double busy = params.t_pred_s + qq * (params.t_train_s + params.airtime_s());
  if (busy > params.event_period_s) {
    throw TimingOverflow(fmt::format("active time {:.6f} s exceeds event period {:.6f} s", busy, params.event_period_s));
  }
  // mW·s = mJ
  const double compute_mj = params.p_pred_mw * params.t_pred_s + qq * params.p_train_mw * params.t_train_s;
  const double comm_mj = qq * (params.e_query_uj() + params.e_resp_uj()) / 1000.0;
  const double base_mj = params.fill_mw() * (params.event_period_s - busy);

  PowerReport r;
  r.event_period_s = params.event_period_s;
  r.query_fraction = qq;
  r.compute_mw = compute_mj / params.event_period_s;
  r.communication_mw = comm_mj / params.event_period_s;
  r.baseline_mw = base_mj / params.event_period_s;
  r.avg_power_mw = r.compute_mw + r.communication_mw + r.baseline_mw;
  return r;
}

}  // namespace odl::costmodel
