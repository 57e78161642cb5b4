#include "xlnav/frames.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace xlnav {

namespace {
constexpr double kDegToRad = std::numbers::pi / 180.0;

Eigen::Vector3d center_offset(FrameCenter center, const CrtbpParams& p) {
  switch (center) {
    case FrameCenter::barycenter: return Eigen::Vector3d::Zero();
    case FrameCenter::moon: return {1.0 - p.mu, 0.0, 0.0};
    case FrameCenter::earth: return {-p.mu, 0.0, 0.0};
  }
  throw std::invalid_argument("shift_frame: unknown center");
}
}  // namespace

Eigen::Matrix3d rotation_l(double t) {
  const double c = std::cos(t), s = std::sin(t);
  Eigen::Matrix3d l;
  l << c, -s, 0.0,
       s,  c, 0.0,
       0.0, 0.0, 1.0;
  return l;
}

Eigen::Matrix3d rotation_l_dot(double t) {
  const double c = std::cos(t), s = std::sin(t);
  Eigen::Matrix3d ld;
  ld << -s, -c, 0.0,
         c, -s, 0.0,
       0.0, 0.0, 0.0;
  return ld;
}

InertialState rot_to_inertial(const RotatingState& s) {
  const Eigen::Matrix3d l = rotation_l(s.epoch);
  const Eigen::Matrix3d ld = rotation_l_dot(s.epoch);
  InertialState out;
  out.epoch = s.epoch;
  out.pos = l * s.pos;
  out.vel = ld * s.pos + l * s.vel;
  return out;
}

RotatingState inertial_to_rot(const InertialState& s) {
  const Eigen::Matrix3d l = rotation_l(s.epoch);
  const Eigen::Matrix3d ld = rotation_l_dot(s.epoch);
  RotatingState out;
  out.epoch = s.epoch;
  out.pos = l.transpose() * s.pos;
  out.vel = l.transpose() * (s.vel - ld * out.pos);
  return out;
}

RotatingState shift_frame(const RotatingState& s, FrameCenter center, ShiftDirection dir,
                          const CrtbpParams& p) {
  const Eigen::Vector3d offset = center_offset(center, p);
  RotatingState out = s;
  out.pos += (dir == ShiftDirection::to_centered) ? Eigen::Vector3d(-offset) : offset;
  return out;
}

void KeplerianElements::validate() const {
  if (!(central_gm > 0.0)) {
    throw std::invalid_argument("KeplerianElements: central_gm must be positive");
  }
  if (ecc < 0.0 || ecc >= 1.0) {
    throw std::invalid_argument("KeplerianElements: only elliptic orbits supported (0 <= e < 1)");
  }
  if (!(sma_km * (1.0 - ecc) > 0.0)) {
    throw std::invalid_argument("KeplerianElements: periapsis radius must be positive");
  }
}

CartesianState kepler_to_cartesian(const KeplerianElements& k) {
  k.validate();
  const double nu = k.true_anomaly_deg * kDegToRad;
  const double p_slr = k.sma_km * (1.0 - k.ecc * k.ecc);  // semi-latus rectum
  const double r = p_slr / (1.0 + k.ecc * std::cos(nu));

  const Eigen::Vector3d r_pf{r * std::cos(nu), r * std::sin(nu), 0.0};
  const double vscale = std::sqrt(k.central_gm / p_slr);
  const Eigen::Vector3d v_pf{-vscale * std::sin(nu), vscale * (k.ecc + std::cos(nu)), 0.0};

  const Eigen::Matrix3d rot =
      Eigen::AngleAxisd(k.raan_deg * kDegToRad, Eigen::Vector3d::UnitZ()).toRotationMatrix() *
      Eigen::AngleAxisd(k.inc_deg * kDegToRad, Eigen::Vector3d::UnitX()).toRotationMatrix() *
      Eigen::AngleAxisd(k.argp_deg * kDegToRad, Eigen::Vector3d::UnitZ()).toRotationMatrix();

  return {rot * r_pf, rot * v_pf};
}

RotatingState mci_to_barycentric(const CartesianState& s, double epoch, const CrtbpParams& p) {
  InertialState nd;
  nd.epoch = epoch;
  nd.pos = s.pos_km / p.l_star_km;
  nd.vel = s.vel_km_s / p.vel_unit_km_s();
  // The Moon's orbital velocity cancels the frame-rotation term of the Moon
  // offset, so the rotation can act on the Moon-centered state directly.
  RotatingState rot = inertial_to_rot(nd);
  rot.pos += Eigen::Vector3d{1.0 - p.mu, 0.0, 0.0};
  return rot;
}

CartesianState barycentric_to_mci(const RotatingState& s, const CrtbpParams& p) {
  RotatingState moon_centered = s;
  moon_centered.pos -= Eigen::Vector3d{1.0 - p.mu, 0.0, 0.0};
  const InertialState nd = rot_to_inertial(moon_centered);
  return {nd.pos * p.l_star_km, nd.vel * p.vel_unit_km_s()};
}

RotatingState eci_to_rotating(const CartesianState& s, double epoch_s, const CrtbpParams& p) {
  InertialState nd;
  nd.epoch = epoch_s / p.time_unit_s();
  // Earth sits at barycentric (-mu, 0, 0); same cancellation as the MCI path.
  nd.pos = s.pos_km / p.l_star_km;
  nd.vel = s.vel_km_s / p.vel_unit_km_s();
  RotatingState rot = inertial_to_rot(nd);
  rot.pos += Eigen::Vector3d{-p.mu, 0.0, 0.0};
  return rot;
}

CartesianState rotating_to_eci(const RotatingState& s, const CrtbpParams& p) {
  RotatingState earth_centered = s;
  earth_centered.pos -= Eigen::Vector3d{-p.mu, 0.0, 0.0};
  const InertialState nd = rot_to_inertial(earth_centered);
  return {nd.pos * p.l_star_km, nd.vel * p.vel_unit_km_s()};
}

Matrix6d rotating_to_eci_jacobian(double epoch_nd, const CrtbpParams& p) {
  const Eigen::Matrix3d l = rotation_l(epoch_nd);
  const Eigen::Matrix3d ld = rotation_l_dot(epoch_nd);
  Matrix6d t = Matrix6d::Zero();
  t.block<3, 3>(0, 0) = p.l_star_km * l;
  t.block<3, 3>(3, 0) = p.vel_unit_km_s() * ld;
  t.block<3, 3>(3, 3) = p.vel_unit_km_s() * l;
  return t;
}

Matrix6d eci_to_rotating_jacobian(double epoch_nd, const CrtbpParams& p) {
  const Eigen::Matrix3d lt = rotation_l(epoch_nd).transpose();
  const Eigen::Matrix3d ld = rotation_l_dot(epoch_nd);
  Matrix6d t = Matrix6d::Zero();
  t.block<3, 3>(0, 0) = lt / p.l_star_km;
  t.block<3, 3>(3, 0) = -(lt * ld * lt) / p.l_star_km;
  t.block<3, 3>(3, 3) = lt / p.vel_unit_km_s();
  return t;
}

}  // namespace xlnav
