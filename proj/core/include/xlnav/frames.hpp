#pragma once

#include <Eigen/Core>

#include "xlnav/crtbp.hpp"

namespace xlnav {

/// State in the non-dimensional barycentric inertial frame. Rotating and
/// inertial frames coincide at epoch 0.
struct InertialState {
  double epoch = 0.0;
  Eigen::Vector3d pos = Eigen::Vector3d::Zero();
  Eigen::Vector3d vel = Eigen::Vector3d::Zero();
};

/// Dimensional body-centered inertial state (km, km/s).
struct CartesianState {
  Eigen::Vector3d pos_km = Eigen::Vector3d::Zero();
  Eigen::Vector3d vel_km_s = Eigen::Vector3d::Zero();
};

struct KeplerianElements {
  double sma_km = 0.0;
  double ecc = 0.0;
  double inc_deg = 0.0;
  double raan_deg = 0.0;
  double argp_deg = 0.0;
  double true_anomaly_deg = 0.0;
  double central_gm = 0.0;  ///< km^3/s^2

  void validate() const;  // elliptic orbits only
};

/// z-axis rotation by the epoch angle; frames coincide at t = 0.
Eigen::Matrix3d rotation_l(double t);
/// Time derivative of rotation_l. The (3,3) entry is zero.
Eigen::Matrix3d rotation_l_dot(double t);

InertialState rot_to_inertial(const RotatingState& s);
RotatingState inertial_to_rot(const InertialState& s);

enum class FrameCenter { barycenter, moon, earth };
enum class ShiftDirection { to_centered, to_barycentric };

/// Translates the rotating-frame position to/from a primary-centered origin.
/// The Earth sits at (-mu, 0, 0) and the Moon at (1-mu, 0, 0); rotating-frame
/// velocity is unchanged.
RotatingState shift_frame(const RotatingState& s, FrameCenter center, ShiftDirection dir,
                          const CrtbpParams& p);

/// Two-body elements to body-centered inertial cartesian state.
CartesianState kepler_to_cartesian(const KeplerianElements& k);

/// Moon-centered inertial (km, km/s) to the non-dimensional barycentric
/// rotating frame: scale by l* and l*/TU, rotate inertial->rotating at the
/// epoch, then shift the Moon center to the barycenter.
RotatingState mci_to_barycentric(const CartesianState& s, double epoch, const CrtbpParams& p);
CartesianState barycentric_to_mci(const RotatingState& s, const CrtbpParams& p);

/// Earth-centered inertial (km, km/s, epoch in seconds) <-> rotating frame,
/// using the ideal uniform rotation of the CRTBP normalization. Used at the
/// boundary between the n-body truth model and the estimation frame.
RotatingState eci_to_rotating(const CartesianState& s, double epoch_s, const CrtbpParams& p);
CartesianState rotating_to_eci(const RotatingState& s, const CrtbpParams& p);

/// Linear part of rotating_to_eci at the given epoch: d(ECI state)/d(rotating
/// state). Maps non-dimensional perturbations to km / km/s ones; used to
/// conjugate state transition matrices between the frames.
Matrix6d rotating_to_eci_jacobian(double epoch_nd, const CrtbpParams& p);

/// Closed-form inverse of rotating_to_eci_jacobian.
Matrix6d eci_to_rotating_jacobian(double epoch_nd, const CrtbpParams& p);

}  // namespace xlnav
