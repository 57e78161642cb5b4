#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xlnav/crtbp.hpp"
#include "xlnav/filter.hpp"
#include "xlnav/frames.hpp"
#include "xlnav/integrator.hpp"
#include "xlnav/linkbudget.hpp"
#include "xlnav/nbody.hpp"

namespace xlnav {

enum class DynamicsModel { crtbp, nbody };
enum class MeasurementType { pn_range, time_derived_range, range_rate };

struct SpacecraftConfig {
  std::string name;
  RotatingState initial_state;  ///< non-dimensional rotating frame at epoch 0
  std::optional<KeplerianElements> initial_elements_mci;  ///< converted when present
  SrpConfig srp;
};

struct NbodyConfig {
  /// Unset values fall back to the CRTBP-consistent GM derived from (mu, l*,
  /// t*), so the rerun's model difference is Sun gravity and SRP alone.
  std::optional<double> gm_earth;
  std::optional<double> gm_moon;
  double gm_sun = constants::gm_sun;
  bool enable_sun = true;
  bool enable_srp = true;
  std::string ephemeris_provider = "analytic";  ///< "analytic" | "csv"
  std::string ephemeris_csv_path;
  double moon_eccentricity = 0.0;
  double sun_initial_longitude_deg = 29.0;
  std::string epoch_utc = "2024-04-18T21:00:00Z";  ///< metadata only
};

struct FilterConfig {
  BiasMode bias_mode = BiasMode::neglect;
  double process_noise_sigma = 2e-9;  ///< non-dimensional acceleration intensity
  ProcessNoiseConfig::Form q_form = ProcessNoiseConfig::Form::published;
  double initial_position_sigma_km = 1.0;
  double initial_velocity_sigma_cm_s = 1.0;
  double initial_position_error_m = 500.0;
  double initial_velocity_error_mm_s = 1.0;
  double bias_prior_m = 0.0;
  double bias_prior_sigma_m = 100.0;  ///< estimate-mode prior; consider-mode sqrt(B0) uses bias_consider_sigma_m
  double bias_consider_sigma_m = 10.0;
  bool drift_augmentation = false;
  double drift_prior_sigma_m_s = 1e-3;
  double divergence_threshold_km = 100.0;
};

struct MonteCarloConfig {
  int runs = 100;
  std::uint64_t seed = 20240418;
  int workers = 0;  ///< 0 = hardware concurrency
};

struct ScenarioConfig {
  DynamicsModel dynamics = DynamicsModel::crtbp;
  double duration_days = 14.0;
  CrtbpParams crtbp = CrtbpParams::earth_moon();
  IntegratorConfig integrator;  ///< tolerances shared; steps given in seconds below
  double max_step_s = 3600.0;
  double fixed_step_s = 10.0;
  NbodyConfig nbody;
  SpacecraftConfig sc1;  ///< halo orbiter (LUMIO role)
  SpacecraftConfig sc2;  ///< lunar orbiter (LPF role)
  MeasurementType measurement = MeasurementType::pn_range;
  double cadence_s = 60.0;
  double bias_truth_m = 0.0;
  LinkBudgetParams link;
  FilterConfig filter;
  MonteCarloConfig montecarlo;

  void validate() const;

  MeasurementKind kind() const {
    return measurement == MeasurementType::range_rate ? MeasurementKind::range_rate
                                                      : MeasurementKind::range;
  }
  /// Two-way measurement sigma in km (range) or km/s (range-rate).
  double measurement_sigma() const;
  /// Integrator config in non-dimensional time units.
  IntegratorConfig integrator_nd() const;
  /// Integrator config in seconds (n-body propagation).
  IntegratorConfig integrator_s() const;
};

/// Table 1-4 defaults: PN range, CRTBP truth, 14 days, 100 runs.
ScenarioConfig default_scenario();

/// Parses and validates a JSON scenario. Missing keys fall back to defaults;
/// unknown keys and schema violations raise std::runtime_error with
/// line/path diagnostics.
ScenarioConfig load_scenario(const std::string& path);

/// Precomputed per-scenario data shared by all Monte Carlo runs.
struct ScenarioData {
  ScenarioConfig cfg;
  std::vector<double> epochs_nd;    ///< k * cadence, starting at 0
  std::vector<double> epochs_days;
  std::vector<Vector12d> truth;     ///< non-dimensional rotating frame
  double meas_sigma_value = 0.0;    ///< km or km/s
  double meas_sigma_nd = 0.0;
  double bias_truth_nd = 0.0;
  double meas_unit_to_nd = 0.0;     ///< 1/l* or 1/vel_unit
};

/// Generates the truth trajectory and derived measurement constants.
ScenarioData prepare_scenario(const ScenarioConfig& cfg);

/// Ephemeris provider configured by the scenario (analytic or CSV file).
std::shared_ptr<const EphemerisProvider> make_ephemeris_provider(const ScenarioConfig& cfg);

/// N-body force models for one spacecraft, with scenario GM resolution.
NbodyModels make_nbody_models(const ScenarioConfig& cfg, const SpacecraftConfig& sc);

/// Truth-derived measurement sequence for one run (non-dimensional values),
/// aligned with epochs[1..].
std::vector<MeasurementSample> synthesize_measurements(const ScenarioData& data,
                                                       std::uint64_t run_seed);

/// Builds the initial filter state for a run: truth plus a fixed-magnitude
/// error along seeded random directions, Table 4 priors, bias handling mode.
JointFilterState make_run_initial_state(const ScenarioData& data, std::uint64_t run_seed);

/// The filter-side dynamics, consistent with the truth model: CRTBP blocks
/// for the three-body scenario, rotating-frame-wrapped n-body propagation
/// (per-spacecraft SRP) for the ephemeris scenario.
JointDynamics make_filter_dynamics(const ScenarioConfig& cfg);

FilterRunConfig make_filter_run_config(const ScenarioData& data);

/// One full filter run against seeded measurements.
FilterRunResult run_single(const ScenarioData& data, std::uint64_t run_seed);

/// Independent substream seed for Monte Carlo run `index`.
std::uint64_t derive_run_seed(std::uint64_t base_seed, std::uint64_t index);

}  // namespace xlnav
