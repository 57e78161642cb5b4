#include "xlnav/linkbudget.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "xlnav/constants.hpp"

namespace xlnav {

namespace {
constexpr double kPi = std::numbers::pi;

void require_positive(double v, const char* what) {
  if (!(v > 0.0)) {
    throw std::invalid_argument(std::string("link budget: ") + what + " must be positive");
  }
}
}  // namespace

void PnRangingConfig::validate() const {
  require_positive(f_rc_hz, "f_rc");
  require_positive(loop_bandwidth_hz, "B_L");
  require_positive(f_chip_hz, "f_chip");
  require_positive(integration_time_s, "integration time");
  if (delta_f_chip_hz < 0.0) {
    throw std::invalid_argument("link budget: delta_f_chip must be >= 0");
  }
}

void TimeDerivedConfig::validate() const {
  require_positive(symbol_rate_down_sps, "downlink symbol rate");
  require_positive(symbol_rate_up_sps, "uplink symbol rate");
  require_positive(correlator_time_s, "correlator integration time");
}

void DopplerConfig::validate() const {
  require_positive(carrier_hz, "carrier frequency");
  require_positive(count_time_s, "count time");
  require_positive(loop_snr, "loop SNR");
  require_positive(turnaround_ratio, "turn-around ratio");
  require_positive(loop_bandwidth_hz, "B_L");
  require_positive(transmit_hz, "transmit frequency");
  require_positive(phase_count_time_s, "phase count time");
  require_positive(phase_noise_rad, "phase noise");
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double pn_range_sigma_oneway(const PnRangingConfig& cfg) {
  cfg.validate();
  const double prc_n0 = db_to_linear(cfg.prc_over_n0_dbhz);
  return constants::c_m_s / (8.0 * cfg.f_rc_hz) * std::sqrt(cfg.loop_bandwidth_hz / prc_n0);
}

double pn_range_bias(const PnRangingConfig& cfg) {
  cfg.validate();
  return constants::c_m_s * cfg.delta_f_chip_hz * cfg.integration_time_s / (4.0 * cfg.f_chip_hz);
}

double time_derived_sigma_oneway(const TimeDerivedConfig& cfg, LinkLeg leg) {
  cfg.validate();
  const double rate = (leg == LinkLeg::down) ? cfg.symbol_rate_down_sps : cfg.symbol_rate_up_sps;
  const double t_sd = 1.0 / rate;
  const double es_n0 = db_to_linear(cfg.es_over_n0_db);
  return 4.0 * constants::c_m_s * t_sd * t_sd / (kPi * cfg.correlator_time_s * es_n0);
}

double doppler_sigma(const DopplerConfig& cfg) {
  cfg.validate();
  const double pc_n0 = db_to_linear(cfg.pc_over_n0_dbhz);
  const double g = cfg.turnaround_ratio;
  const double under = 1.0 / cfg.loop_snr + g * g * cfg.loop_bandwidth_hz / pc_n0;
  return constants::c_m_s / (2.0 * std::sqrt(2.0) * kPi * cfg.carrier_hz * cfg.count_time_s) *
         std::sqrt(under);
}

double phase_noise_to_range_rate(const DopplerConfig& cfg) {
  cfg.validate();
  return std::sqrt(2.0) * constants::c_m_s /
         (2.0 * cfg.turnaround_ratio * cfg.transmit_hz * cfg.phase_count_time_s) *
         (cfg.phase_noise_rad / (2.0 * kPi));
}

double combine_two_way(double sigma_up_m, double sigma_down_m, TwoWayCombiner mode) {
  if (sigma_up_m < 0.0 || sigma_down_m < 0.0) {
    throw std::invalid_argument("combine_two_way: sigmas must be >= 0");
  }
  const double ss = sigma_up_m * sigma_up_m + sigma_down_m * sigma_down_m;
  return (mode == TwoWayCombiner::rss) ? std::sqrt(ss) : std::sqrt(0.5 * ss);
}

double LinkBudgetParams::pn_two_way_sigma_m() const {
  const double one_way = pn_range_sigma_oneway(pn);
  return combine_two_way(one_way, one_way, pn_combiner);
}

double LinkBudgetParams::td_two_way_sigma_m() const {
  const double up = time_derived_sigma_oneway(time_derived, LinkLeg::up);
  const double down = time_derived_sigma_oneway(time_derived, LinkLeg::down);
  return combine_two_way(up, down, td_combiner);
}

std::vector<LinkBudgetEntry> evaluate_link_budget(const LinkBudgetParams& params) {
  std::vector<LinkBudgetEntry> out;
  const double pn_one_way = pn_range_sigma_oneway(params.pn);
  out.push_back({"pn_range_sigma_oneway", pn_one_way, "m"});
  out.push_back({"pn_range_sigma_twoway", params.pn_two_way_sigma_m(), "m"});
  out.push_back({"pn_range_bias_chiprate", pn_range_bias(params.pn), "m"});
  out.push_back({"time_derived_sigma_down", time_derived_sigma_oneway(params.time_derived, LinkLeg::down), "m"});
  out.push_back({"time_derived_sigma_up", time_derived_sigma_oneway(params.time_derived, LinkLeg::up), "m"});
  out.push_back({"time_derived_sigma_twoway", params.td_two_way_sigma_m(), "m"});
  out.push_back({"doppler_sigma_thermal", doppler_sigma(params.doppler), "m/s"});
  out.push_back({"phase_noise_range_rate", phase_noise_to_range_rate(params.doppler), "m/s"});
  out.push_back({"range_rate_sigma_scenario", params.range_rate_sigma_mm_s * 1e-3, "m/s"});
  return out;
}

}  // namespace xlnav
