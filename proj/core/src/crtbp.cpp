#include "xlnav/crtbp.hpp"

#include <cmath>
#include <stdexcept>

namespace xlnav {

namespace {
constexpr double kSingularityRadius = 1e-9;

void check_primaries(double r1, double r2) {
  if (r1 < kSingularityRadius || r2 < kSingularityRadius) {
    throw std::domain_error("crtbp: state coincides with a primary (r < 1e-9)");
  }
}
}  // namespace

void CrtbpParams::validate() const {
  if (!(mu > 0.0 && mu < 0.5)) {
    throw std::invalid_argument("CrtbpParams: mu must be in (0, 0.5)");
  }
  if (!(t_star_days > 0.0) || !(l_star_km > 0.0)) {
    throw std::invalid_argument("CrtbpParams: t_star and l_star must be positive");
  }
}

double primary_distance_r1(const Eigen::Vector3d& pos, const CrtbpParams& p) {
  const double dx = pos.x() + p.mu;
  return std::sqrt(dx * dx + pos.y() * pos.y() + pos.z() * pos.z());
}

double primary_distance_r2(const Eigen::Vector3d& pos, const CrtbpParams& p) {
  const double dx = pos.x() + p.mu - 1.0;
  return std::sqrt(dx * dx + pos.y() * pos.y() + pos.z() * pos.z());
}

Vector6d crtbp_derivative(const RotatingState& s, const CrtbpParams& p) {
  const double mu = p.mu;
  const double x = s.pos.x(), y = s.pos.y(), z = s.pos.z();
  const double r1 = primary_distance_r1(s.pos, p);
  const double r2 = primary_distance_r2(s.pos, p);
  check_primaries(r1, r2);

  const double r1_3 = r1 * r1 * r1;
  const double r2_3 = r2 * r2 * r2;

  Vector6d dsdt;
  dsdt.head<3>() = s.vel;
  dsdt(3) = 2.0 * s.vel.y() + x - (1.0 - mu) * (x + mu) / r1_3 - mu * (x + mu - 1.0) / r2_3;
  dsdt(4) = -2.0 * s.vel.x() + (1.0 - (1.0 - mu) / r1_3 - mu / r2_3) * y;
  dsdt(5) = ((mu - 1.0) / r1_3 - mu / r2_3) * z;
  return dsdt;
}

Matrix6d crtbp_jacobian(const RotatingState& s, const CrtbpParams& p) {
  const double mu = p.mu;
  const double x = s.pos.x(), y = s.pos.y(), z = s.pos.z();
  const double r1 = primary_distance_r1(s.pos, p);
  const double r2 = primary_distance_r2(s.pos, p);
  check_primaries(r1, r2);

  const double r1_3 = r1 * r1 * r1, r1_5 = r1_3 * r1 * r1;
  const double r2_3 = r2 * r2 * r2, r2_5 = r2_3 * r2 * r2;
  const double d1 = x + mu;        // x offset from Earth
  const double d2 = x + mu - 1.0;  // x offset from Moon

  // Second partials of the effective potential (x^2+y^2)/2 + (1-mu)/r1 + mu/r2
  const double uxx = 1.0 - (1.0 - mu) / r1_3 - mu / r2_3 +
                     3.0 * (1.0 - mu) * d1 * d1 / r1_5 + 3.0 * mu * d2 * d2 / r2_5;
  const double uyy = 1.0 - (1.0 - mu) / r1_3 - mu / r2_3 +
                     3.0 * (1.0 - mu) * y * y / r1_5 + 3.0 * mu * y * y / r2_5;
  const double uzz = -(1.0 - mu) / r1_3 - mu / r2_3 +
                     3.0 * (1.0 - mu) * z * z / r1_5 + 3.0 * mu * z * z / r2_5;
  const double uxy = 3.0 * (1.0 - mu) * d1 * y / r1_5 + 3.0 * mu * d2 * y / r2_5;
  const double uxz = 3.0 * (1.0 - mu) * d1 * z / r1_5 + 3.0 * mu * d2 * z / r2_5;
  const double uyz = 3.0 * (1.0 - mu) * y * z / r1_5 + 3.0 * mu * y * z / r2_5;

  Matrix6d a = Matrix6d::Zero();
  a.block<3, 3>(0, 3).setIdentity();
  a(3, 0) = uxx; a(3, 1) = uxy; a(3, 2) = uxz;
  a(4, 0) = uxy; a(4, 1) = uyy; a(4, 2) = uyz;
  a(5, 0) = uxz; a(5, 1) = uyz; a(5, 2) = uzz;
  a(3, 4) = 2.0;
  a(4, 3) = -2.0;
  return a;
}

double jacobi_constant(const RotatingState& s, const CrtbpParams& p) {
  const double r1 = primary_distance_r1(s.pos, p);
  const double r2 = primary_distance_r2(s.pos, p);
  check_primaries(r1, r2);
  const double x = s.pos.x(), y = s.pos.y();
  return x * x + y * y + 2.0 * (1.0 - p.mu) / r1 + 2.0 * p.mu / r2 - s.vel.squaredNorm();
}

}  // namespace xlnav
