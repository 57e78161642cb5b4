#include "xlnav/nbody.hpp"

#include <cmath>
#include <stdexcept>

namespace xlnav {

namespace {
constexpr double kSingularityKm = 1e-6;

Eigen::Matrix3d inverse_cube_gradient(const Eigen::Vector3d& d, double gm) {
  // Gradient of -gm d / |d|^3 with respect to position.
  const double r = d.norm();
  const double r3 = r * r * r;
  const double r5 = r3 * r * r;
  return -gm * (Eigen::Matrix3d::Identity() / r3 - 3.0 * d * d.transpose() / r5);
}
}  // namespace

GmSet crtbp_consistent_gm(const CrtbpParams& p) {
  const double tu = p.time_unit_s();
  const double gm_total = p.l_star_km * p.l_star_km * p.l_star_km / (tu * tu);
  GmSet gm;
  gm.earth = (1.0 - p.mu) * gm_total;
  gm.moon = p.mu * gm_total;
  gm.sun = constants::gm_sun;
  return gm;
}

void SrpConfig::validate() const {
  if (!(area_m2 >= 0.0) || !(mass_kg > 0.0)) {
    throw std::invalid_argument("SrpConfig: area must be >= 0 and mass > 0");
  }
  if (reflectivity < 1.0 || reflectivity > 2.0) {
    throw std::invalid_argument("SrpConfig: reflectivity must lie in [1, 2]");
  }
}

Eigen::Vector3d point_mass_accel(const NbodyState& s, const EphemerisProvider& eph,
                                 const GmSet& gm) {
  Eigen::Vector3d accel = Eigen::Vector3d::Zero();
  const double r = s.pos_km.norm();
  if (gm.earth != 0.0) {
    if (r < kSingularityKm) {
      throw std::domain_error("point_mass_accel: state at Earth's center");
    }
    accel -= gm.earth * s.pos_km / (r * r * r);
  }

  const auto third_body = [&](Body body, double mu) {
    const Eigen::Vector3d rb = eph.position_km(body, s.epoch_s);
    const Eigen::Vector3d d = rb - s.pos_km;
    const double dn = d.norm();
    const double rbn = rb.norm();
    if (dn < kSingularityKm) {
      throw std::domain_error("point_mass_accel: state at a perturbing body's center");
    }
    Eigen::Vector3d term = mu * d / (dn * dn * dn);
    if (rbn > 0.0) term -= mu * rb / (rbn * rbn * rbn);
    accel += term;
  };

  if (gm.include_moon && gm.moon != 0.0) third_body(Body::moon, gm.moon);
  if (gm.include_sun && gm.sun != 0.0) third_body(Body::sun, gm.sun);
  return accel;
}

Eigen::Vector3d srp_accel(const NbodyState& s, const EphemerisProvider& eph,
                          const SrpConfig& cfg) {
  cfg.validate();
  const Eigen::Vector3d sun = eph.position_km(Body::sun, s.epoch_s);
  const Eigen::Vector3d d = s.pos_km - sun;  // Sun -> spacecraft
  const double dn = d.norm();
  if (dn < kSingularityKm) {
    throw std::domain_error("srp_accel: state at the Sun's position");
  }
  const double pressure = cfg.solar_flux_1au_w_m2 / constants::c_m_s;  // N/m^2 at 1 AU
  const double au_ratio = cfg.au_km / dn;
  const double a_m_s2 =
      cfg.reflectivity * pressure * au_ratio * au_ratio * (cfg.area_m2 / cfg.mass_kg);
  return (a_m_s2 * 1e-3) * (d / dn);
}

std::vector<NbodyStmState> propagate_nbody(const NbodyState& s0,
                                           const std::vector<double>& epochs_s,
                                           const IntegratorConfig& cfg,
                                           const NbodyModels& models, bool with_stm) {
  if (!models.ephemeris) {
    throw std::invalid_argument("propagate_nbody: missing ephemeris provider");
  }
  const EphemerisProvider& eph = *models.ephemeris;

  const auto jacobian = [&](const NbodyState& s) {
    Eigen::Matrix3d da_dr = Eigen::Matrix3d::Zero();
    if (models.gm.earth != 0.0) {
      da_dr += inverse_cube_gradient(s.pos_km, models.gm.earth);
    }
    const auto add_third = [&](Body body, double mu) {
      const Eigen::Vector3d rb = eph.position_km(body, s.epoch_s);
      da_dr += inverse_cube_gradient(s.pos_km - rb, mu);
    };
    if (models.gm.include_moon && models.gm.moon != 0.0) add_third(Body::moon, models.gm.moon);
    if (models.gm.include_sun && models.gm.sun != 0.0) add_third(Body::sun, models.gm.sun);
    if (models.enable_srp) {
      const Eigen::Vector3d d = s.pos_km - eph.position_km(Body::sun, s.epoch_s);
      const double k = srp_accel(s, eph, models.srp).norm() * d.norm() * d.norm();
      da_dr -= inverse_cube_gradient(d, k);  // same 1/d^2 law, repulsive sign
    }
    Matrix6d a = Matrix6d::Zero();
    a.block<3, 3>(0, 3).setIdentity();
    a.block<3, 3>(3, 0) = da_dr;
    return a;
  };

  const OdeDerivative rhs = [&](double t, const Eigen::VectorXd& y) {
    NbodyState s;
    s.epoch_s = t;
    s.pos_km = y.head<3>();
    s.vel_km_s = y.segment<3>(3);
    Eigen::VectorXd dy(y.size());
    dy.head<3>() = s.vel_km_s;
    Eigen::Vector3d accel = point_mass_accel(s, eph, models.gm);
    if (models.enable_srp) accel += srp_accel(s, eph, models.srp);
    dy.segment<3>(3) = accel;
    if (with_stm) {
      const Matrix6d a = jacobian(s);
      Eigen::Map<const Eigen::Matrix<double, 6, 6, Eigen::RowMajor>> phi(y.data() + 6);
      Eigen::Map<Eigen::Matrix<double, 6, 6, Eigen::RowMajor>> phidot(dy.data() + 6);
      phidot = a * phi;
    }
    return dy;
  };

  Eigen::VectorXd y(with_stm ? 42 : 6);
  y.head<3>() = s0.pos_km;
  y.segment<3>(3) = s0.vel_km_s;
  if (with_stm) {
    Eigen::Map<Eigen::Matrix<double, 6, 6, Eigen::RowMajor>>(y.data() + 6).setIdentity();
  }

  std::vector<NbodyStmState> out;
  out.reserve(epochs_s.size());
  double t = s0.epoch_s;
  for (double target : epochs_s) {
    if (target != t) {
      y = integrate(rhs, y, t, target, cfg);
      t = target;
    }
    NbodyStmState st;
    st.state.epoch_s = t;
    st.state.pos_km = y.head<3>();
    st.state.vel_km_s = y.segment<3>(3);
    if (with_stm) {
      st.stm = Eigen::Map<const Eigen::Matrix<double, 6, 6, Eigen::RowMajor>>(y.data() + 6);
    }
    out.push_back(st);
  }
  return out;
}

}  // namespace xlnav
