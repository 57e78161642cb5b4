#pragma once

#include <string>
#include <vector>

#include "xlnav/montecarlo.hpp"
#include "xlnav/observability.hpp"
#include "xlnav/scenario.hpp"

namespace xlnav {

/// Manifest of the files one command produced.
struct RunArtifacts {
  std::vector<std::string> files;

  void add(std::string path) { files.push_back(std::move(path)); }
  /// Throws when a listed file is missing or empty.
  void verify() const;
};

/// truth.csv: epoch_days then both spacecraft rotating states (non-dimensional).
std::string write_truth_csv(const std::string& dir, const ScenarioData& data);

/// measurements.csv: epoch_days, kind, value, sigma, bias_truth (km, km/s).
std::string write_measurements_csv(const std::string& dir,
                                   const std::vector<MeasurementSample>& samples,
                                   const ScenarioData& data);

/// estimates.csv: epoch_days, 12 state errors, 12 sigmas, residual.
/// Positions in meters, velocities in mm/s; residual in measurement units.
std::string write_estimates_csv(const std::string& dir, const ScenarioData& data,
                                const FilterRunResult& run);

/// bias.csv (bias-augmented runs): epoch_days, bias estimate and sigma, meters.
std::string write_bias_csv(const std::string& dir, const ScenarioData& data,
                           const FilterRunResult& run);

/// rmse.csv: Monte Carlo aggregate error and 1-sigma envelope series.
std::string write_rmse_csv(const std::string& dir, const MonteCarloResult& mc);

/// summary.json: Monte Carlo summary block plus scenario metadata.
std::string write_summary_json(const std::string& dir, const ScenarioData& data,
                               const MonteCarloSummary& summary);

/// observability.json: singular values, metrics, ranking.
std::string write_observability_json(const std::string& dir, const ObservabilityReport& report);

/// effectiveness.csv: epoch_days, per-spacecraft cumulative effectiveness.
std::string write_effectiveness_csv(const std::string& dir, const EffectivenessSeries& series,
                                    const ScenarioData& data);

/// linkbudget table (text or csv) to an arbitrary stream-ready string.
std::string format_link_budget(const std::vector<LinkBudgetEntry>& entries, bool csv);

}  // namespace xlnav
