#include "xlnav/measurement.hpp"

#include <cmath>
#include <stdexcept>

#include "xlnav/constants.hpp"

namespace xlnav {

void TimestampQuad::validate() const {
  if (!(t1 < t2 && t2 <= t3 && t3 < t4)) {
    throw std::invalid_argument("TimestampQuad: non-causal timestamps (need t1 < t2 <= t3 < t4)");
  }
}

double geometric_range(const Eigen::Vector3d& r1_km, const Eigen::Vector3d& r2_km) {
  return (r1_km - r2_km).norm();
}

double range_rate_core(const Eigen::Vector3d& r1_km, const Eigen::Vector3d& v1_km_s,
                       const Eigen::Vector3d& r2_km, const Eigen::Vector3d& v2_km_s) {
  const Eigen::Vector3d dr = r1_km - r2_km;
  const double rho = dr.norm();
  if (rho <= 0.0) {
    throw std::domain_error("range_rate: undefined at zero separation");
  }
  return dr.dot(v1_km_s - v2_km_s) / rho;
}

MeasurementSample pseudo_range(double epoch, const Eigen::Vector3d& r1_km,
                               const Eigen::Vector3d& r2_km, double bias_km,
                               double sigma_km, double noise_draw_km) {
  if (!(sigma_km > 0.0)) {
    throw std::invalid_argument("pseudo_range: sigma must be positive");
  }
  MeasurementSample m;
  m.epoch = epoch;
  m.kind = MeasurementKind::range;
  m.value = geometric_range(r1_km, r2_km) + bias_km + noise_draw_km;
  m.sigma = sigma_km;
  m.bias_truth = bias_km;
  return m;
}

MeasurementSample range_rate(double epoch, const Eigen::Vector3d& r1_km,
                             const Eigen::Vector3d& v1_km_s, const Eigen::Vector3d& r2_km,
                             const Eigen::Vector3d& v2_km_s, double bias_km_s,
                             double sigma_km_s, double noise_draw_km_s) {
  if (!(sigma_km_s > 0.0)) {
    throw std::invalid_argument("range_rate: sigma must be positive");
  }
  MeasurementSample m;
  m.epoch = epoch;
  m.kind = MeasurementKind::range_rate;
  m.value = range_rate_core(r1_km, v1_km_s, r2_km, v2_km_s) + bias_km_s + noise_draw_km_s;
  m.sigma = sigma_km_s;
  m.bias_truth = bias_km_s;
  return m;
}

TimeTransferResult time_transfer_range(const TimestampQuad& q) {
  q.validate();
  const double round_trip_s = (q.t4 - q.t1) - (q.t3 - q.t2);
  TimeTransferResult out;
  out.range_km = constants::c_km_s * round_trip_s / 2.0;
  out.clock_offset_s = ((q.t2 - q.t1) - (q.t4 - q.t3)) / 2.0;
  return out;
}

Eigen::RowVectorXd measurement_partials(const Eigen::Matrix<double, 12, 1>& joint_state,
                                        MeasurementKind kind, bool bias_column) {
  const Eigen::Vector3d r1 = joint_state.segment<3>(0);
  const Eigen::Vector3d v1 = joint_state.segment<3>(3);
  const Eigen::Vector3d r2 = joint_state.segment<3>(6);
  const Eigen::Vector3d v2 = joint_state.segment<3>(9);

  const Eigen::Vector3d dr = r1 - r2;
  const double rho = dr.norm();
  if (rho <= 0.0) {
    throw std::domain_error("measurement_partials: singular at zero separation");
  }
  const Eigen::Vector3d u = dr / rho;

  Eigen::RowVectorXd h = Eigen::RowVectorXd::Zero(bias_column ? 13 : 12);
  if (kind == MeasurementKind::range) {
    h.segment<3>(0) = u.transpose();
    h.segment<3>(6) = -u.transpose();
  } else {
    const Eigen::Vector3d dv = v1 - v2;
    const double rr = dr.dot(dv) / rho;
    const Eigen::Vector3d drho_dr = (dv - rr * u) / rho;
    h.segment<3>(0) = drho_dr.transpose();
    h.segment<3>(3) = u.transpose();
    h.segment<3>(6) = -drho_dr.transpose();
    h.segment<3>(9) = -u.transpose();
  }
  if (bias_column) {
    h(12) = 1.0;
  }
  return h;
}

MeasurementSynthesizer::MeasurementSynthesizer(std::uint64_t seed, double sigma,
                                               double bias_truth, MeasurementKind kind)
    : rng_(seed), sigma_(sigma), bias_(bias_truth), kind_(kind) {
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("MeasurementSynthesizer: sigma must be positive");
  }
}

double MeasurementSynthesizer::gaussian_draw() { return normal_(rng_); }

MeasurementSample MeasurementSynthesizer::synthesize(double epoch, const Eigen::Vector3d& r1_km,
                                                     const Eigen::Vector3d& v1_km_s,
                                                     const Eigen::Vector3d& r2_km,
                                                     const Eigen::Vector3d& v2_km_s) {
  const double noise = sigma_ * gaussian_draw();
  if (kind_ == MeasurementKind::range) {
    return pseudo_range(epoch, r1_km, r2_km, bias_, sigma_, noise);
  }
  return range_rate(epoch, r1_km, v1_km_s, r2_km, v2_km_s, bias_, sigma_, noise);
}

}  // namespace xlnav
