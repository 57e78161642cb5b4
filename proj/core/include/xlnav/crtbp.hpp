#pragma once

#include <Eigen/Core>

namespace xlnav {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

/// Earth-Moon circular restricted three-body normalization: mass ratio and
/// the time/length units that map non-dimensional states to km and seconds.
struct CrtbpParams {
  double mu = 0.01215;           ///< mass ratio m2/(m1+m2)
  double t_star_days = 4.343;    ///< normalized time unit, days
  double l_star_km = 384747.96;  ///< normalized length unit, km

  /// Seconds per non-dimensional time unit.
  double time_unit_s() const { return t_star_days * 86400.0; }
  /// km/s per non-dimensional velocity unit.
  double vel_unit_km_s() const { return l_star_km / time_unit_s(); }
  /// km/s^2 per non-dimensional acceleration unit.
  double accel_unit_km_s2() const { return l_star_km / (time_unit_s() * time_unit_s()); }

  void validate() const;  // throws std::invalid_argument

  static CrtbpParams earth_moon() { return CrtbpParams{}; }
};

/// Spacecraft state in the non-dimensional Earth-Moon barycentric rotating frame.
struct RotatingState {
  double epoch = 0.0;  ///< non-dimensional time
  Eigen::Vector3d pos = Eigen::Vector3d::Zero();
  Eigen::Vector3d vel = Eigen::Vector3d::Zero();

  Vector6d vec() const {
    Vector6d v;
    v << pos, vel;
    return v;
  }
  static RotatingState from_vec(double epoch, const Vector6d& v) {
    return RotatingState{epoch, v.head<3>(), v.tail<3>()};
  }
};

/// Distance to the larger primary (Earth at (-mu, 0, 0)).
double primary_distance_r1(const Eigen::Vector3d& pos, const CrtbpParams& p);
/// Distance to the smaller primary (Moon at (1-mu, 0, 0)).
double primary_distance_r2(const Eigen::Vector3d& pos, const CrtbpParams& p);

/// Time derivative of the rotating-frame state. Throws std::domain_error when
/// the state is within 1e-9 length units of either primary.
Vector6d crtbp_derivative(const RotatingState& s, const CrtbpParams& p);

/// Jacobian of crtbp_derivative with respect to the 6-state. Upper-right block
/// is the identity; lower-right block holds the Coriolis terms only.
Matrix6d crtbp_jacobian(const RotatingState& s, const CrtbpParams& p);

/// Jacobi constant C = x^2 + y^2 + 2(1-mu)/r1 + 2mu/r2 - v^2.
double jacobi_constant(const RotatingState& s, const CrtbpParams& p);

}  // namespace xlnav
