#pragma once

#include <memory>
#include <vector>

#include <Eigen/Core>

#include "xlnav/constants.hpp"
#include "xlnav/ephemeris.hpp"
#include "xlnav/integrator.hpp"

namespace xlnav {

/// Spacecraft state in the Earth-centered inertial frame (km, km/s, epoch s).
struct NbodyState {
  double epoch_s = 0.0;
  Eigen::Vector3d pos_km = Eigen::Vector3d::Zero();
  Eigen::Vector3d vel_km_s = Eigen::Vector3d::Zero();
};

/// Spherical SRP model, no eclipse handling.
struct SrpConfig {
  double area_m2 = 1.0;
  double reflectivity = 1.3;
  double mass_kg = 100.0;
  double solar_flux_1au_w_m2 = constants::solar_flux_1au_w_m2;
  double au_km = constants::au_km;

  void validate() const;
};

struct GmSet {
  double earth = constants::gm_earth;
  double moon = constants::gm_moon;
  double sun = constants::gm_sun;
  bool include_moon = true;
  bool include_sun = true;
};

/// Earth/Moon GM values implied by the CRTBP normalization (mu, l*, t*).
/// Using these keeps the n-body two-body limit identical to the three-body
/// reference, so an ephemeris rerun isolates Sun gravity and SRP.
GmSet crtbp_consistent_gm(const CrtbpParams& p);

/// Central Earth gravity plus differential third-body terms, km/s^2.
Eigen::Vector3d point_mass_accel(const NbodyState& s, const EphemerisProvider& eph,
                                 const GmSet& gm);

/// Spherical SRP acceleration along the Sun->spacecraft direction, km/s^2.
Eigen::Vector3d srp_accel(const NbodyState& s, const EphemerisProvider& eph,
                          const SrpConfig& cfg);

struct NbodyModels {
  std::shared_ptr<const EphemerisProvider> ephemeris;
  GmSet gm;
  bool enable_srp = false;
  SrpConfig srp;
};

struct NbodyStmState {
  NbodyState state;
  Matrix6d stm = Matrix6d::Identity();
};

/// Propagates the n-body state to each epoch (seconds, ascending). Integrator
/// tolerances are interpreted in km / km/s. When with_stm, the variational
/// equations of the gravity and SRP terms ride along.
std::vector<NbodyStmState> propagate_nbody(const NbodyState& s0,
                                           const std::vector<double>& epochs_s,
                                           const IntegratorConfig& cfg,
                                           const NbodyModels& models, bool with_stm = false);

}  // namespace xlnav
