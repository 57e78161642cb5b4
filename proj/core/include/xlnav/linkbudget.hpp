#pragma once

#include <string>
#include <vector>

namespace xlnav {

/// Pseudo-noise ranging link parameters.
struct PnRangingConfig {
  double f_rc_hz = 1e6;           ///< ranging clock frequency
  double loop_bandwidth_hz = 1.0; ///< one-sided loop noise bandwidth B_L
  double prc_over_n0_dbhz = 25.0; ///< ranging-clock power over N0
  double f_chip_hz = 2e6;         ///< chip rate (2 f_rc for a square-wave ranging clock)
  double delta_f_chip_hz = 100.0; ///< received vs local chip-rate difference
  double integration_time_s = 0.5;

  void validate() const;
};

/// Time-derived (telemetry timestamp) ranging parameters.
struct TimeDerivedConfig {
  double symbol_rate_down_sps = 4000.0;
  double symbol_rate_up_sps = 2700.0;
  double correlator_time_s = 0.5;  ///< T_l
  double es_over_n0_db = -1.0;

  void validate() const;
};

/// Two-way Doppler / range-rate noise parameters.
struct DopplerConfig {
  double carrier_hz = 2200e6;      ///< downlink carrier f_c
  double count_time_s = 0.5;       ///< T
  double loop_snr = 1e12;          ///< rho_L (linear); large value approximates a clean loop
  double pc_over_n0_dbhz = 25.0;
  double turnaround_ratio = 1.0;   ///< G
  double loop_bandwidth_hz = 1.0;  ///< B_L
  double transmit_hz = 2100e6;     ///< f_t for the phase-noise conversion
  double phase_count_time_s = 0.5; ///< t_c for the phase-noise conversion
  double phase_noise_rad = 6.283185307179586;  ///< sigma_phi

  void validate() const;
};

enum class TwoWayCombiner { rss, quadratic_mean };

double db_to_linear(double db);

/// One-way pseudo-noise ranging error, meters (1 sigma).
double pn_range_sigma_oneway(const PnRangingConfig& cfg);

/// Range bias from a chip-rate mismatch, meters. Diagnostic only; scenario
/// bias is configured separately.
double pn_range_bias(const PnRangingConfig& cfg);

enum class LinkLeg { up, down };

/// One-way time-derived ranging error, meters (1 sigma).
double time_derived_sigma_oneway(const TimeDerivedConfig& cfg, LinkLeg leg);

/// Two-way Doppler thermal-noise error, m/s (1 sigma).
double doppler_sigma(const DopplerConfig& cfg);

/// Phase noise converted to range-rate noise, m/s (1 sigma).
double phase_noise_to_range_rate(const DopplerConfig& cfg);

/// Combines per-leg ranging errors into a two-way figure, meters.
double combine_two_way(double sigma_up_m, double sigma_down_m, TwoWayCombiner mode);

/// One evaluated link-budget quantity, for reporting.
struct LinkBudgetEntry {
  std::string name;
  double value = 0.0;
  std::string unit;
};

struct LinkBudgetParams {
  PnRangingConfig pn;
  TimeDerivedConfig time_derived;
  DopplerConfig doppler;
  TwoWayCombiner pn_combiner = TwoWayCombiner::rss;
  TwoWayCombiner td_combiner = TwoWayCombiner::quadratic_mean;
  double range_rate_sigma_mm_s = 0.97;  ///< configured scenario value

  double pn_two_way_sigma_m() const;
  double td_two_way_sigma_m() const;
};

/// Evaluates every error-model formula for reporting (the `linkbudget` CLI).
std::vector<LinkBudgetEntry> evaluate_link_budget(const LinkBudgetParams& params);

}  // namespace xlnav
