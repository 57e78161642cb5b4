#pragma once

#include <vector>

#include "xlnav/scenario.hpp"

namespace xlnav {

struct SummaryValue {
  double full_span = 0.0;
  double post_day6 = 0.0;
};

struct MonteCarloSummary {
  SummaryValue rms_error_pos_m;    ///< averaged over both spacecraft
  SummaryValue rms_sigma_pos_m;
  SummaryValue rms_error_vel_mms;
  SummaryValue rms_sigma_vel_mms;
  SummaryValue error_pos_m_sc1, error_pos_m_sc2;
  SummaryValue error_vel_mms_sc1, error_vel_mms_sc2;
  double convergence_day = -1.0;   ///< halo-orbiter position RMSE stays < 1 km
  int runs_requested = 0;
  int runs_completed = 0;
  int excluded_runs = 0;           ///< diverged and dropped from the aggregate
  bool bias_estimated = false;
  double bias_estimate_final_mean_m = 0.0;
};

/// Per-epoch RMS errors (Monte Carlo aggregate) and RMS 1-sigma envelopes.
struct MonteCarloResult {
  std::vector<double> epochs_days;
  std::vector<double> rmse_pos_m_sc1, rmse_pos_m_sc2;
  std::vector<double> rmse_vel_mms_sc1, rmse_vel_mms_sc2;
  std::vector<double> rms_sigma_pos_m_sc1, rms_sigma_pos_m_sc2;
  std::vector<double> rms_sigma_vel_mms_sc1, rms_sigma_vel_mms_sc2;
  MonteCarloSummary summary;
};

/// Per-epoch RMS over run count per the Monte Carlo error definition:
/// sqrt(mean of squared scalar errors).
double rms_over_runs(const std::vector<double>& squared_errors);

/// N independent seeded runs on a worker pool; diverged runs are excluded
/// from the aggregate and counted.
MonteCarloResult run_monte_carlo(const ScenarioData& data, int runs, std::uint64_t seed,
                                 int workers);

/// Convenience overload using the scenario's montecarlo block.
MonteCarloResult run_monte_carlo(const ScenarioData& data);

}  // namespace xlnav
