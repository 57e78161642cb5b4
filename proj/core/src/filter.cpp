#include "xlnav/filter.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace xlnav {

namespace {

Eigen::Matrix<double, 6, 6> process_noise_block(double sigma, double dt,
                                                ProcessNoiseConfig::Form form) {
  const double s2 = sigma * sigma;
  double pos, cross, vel;
  if (form == ProcessNoiseConfig::Form::published) {
    pos = dt * dt * dt * dt * s2 / 3.0;
    cross = dt * dt * dt * s2 / 2.0;
    vel = dt * dt * s2;
  } else {
    pos = dt * dt * dt * s2 / 3.0;
    cross = dt * dt * s2 / 2.0;
    vel = dt * s2;
  }
  Eigen::Matrix<double, 6, 6> q = Eigen::Matrix<double, 6, 6>::Zero();
  q.block<3, 3>(0, 0) = pos * Eigen::Matrix3d::Identity();
  q.block<3, 3>(0, 3) = cross * Eigen::Matrix3d::Identity();
  q.block<3, 3>(3, 0) = cross * Eigen::Matrix3d::Identity();
  q.block<3, 3>(3, 3) = vel * Eigen::Matrix3d::Identity();
  return q;
}

void symmetrize(Eigen::MatrixXd& p) { p = ((p + p.transpose()) * 0.5).eval(); }

double joseph_check(const Eigen::MatrixXd& p_short, const Eigen::MatrixXd& p_prior,
                    const Eigen::VectorXd& k, const Eigen::RowVectorXd& h, double w) {
  const auto n = p_prior.rows();
  const Eigen::MatrixXd ikh = Eigen::MatrixXd::Identity(n, n) - k * h;
  Eigen::MatrixXd p_joseph = ikh * p_prior * ikh.transpose() + (k * w) * k.transpose();
  const double denom = p_joseph.norm();
  return denom > 0.0 ? (p_short - p_joseph).norm() / denom : 0.0;
}

}  // namespace

Eigen::MatrixXd build_process_noise(const ProcessNoiseConfig& cfg) {
  if (cfg.sigma1 < 0.0 || cfg.sigma2 < 0.0) {
    throw std::invalid_argument("build_process_noise: sigma must be >= 0");
  }
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(12, 12);
  q.block<6, 6>(0, 0) = process_noise_block(cfg.sigma1, cfg.dt, cfg.form);
  q.block<6, 6>(6, 6) = process_noise_block(cfg.sigma2, cfg.dt, cfg.form);
  return q;
}

JointFilterState make_initial_state(double epoch, const Vector12d& x0,
                                    const Eigen::Matrix<double, 12, 12>& p0) {
  JointFilterState f;
  f.epoch = epoch;
  f.x = x0;
  f.cov = p0;
  f.mode = BiasMode::neglect;
  return f;
}

void augment_bias(JointFilterState& f, double bias0, double bias_var) {
  if (f.bias_augmented) {
    throw std::logic_error("augment_bias: state already carries a bias component");
  }
  if (f.mode == BiasMode::consider) {
    throw std::logic_error("augment_bias: consider mode keeps the bias out of the state");
  }
  const int n = f.dim();
  f.x.conservativeResize(n + 1);
  f.x(n) = bias0;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n + 1, n + 1);
  cov.topLeftCorner(n, n) = f.cov;
  cov(n, n) = bias_var;
  f.cov = std::move(cov);
  f.bias_augmented = true;
  f.mode = BiasMode::estimate;
}

void augment_clock_drift(JointFilterState& f, double drift0, double drift_var) {
  if (!f.bias_augmented) {
    throw std::logic_error("augment_clock_drift: requires a bias state first");
  }
  if (f.drift_augmented) {
    throw std::logic_error("augment_clock_drift: drift already augmented");
  }
  const int n = f.dim();
  f.x.conservativeResize(n + 1);
  f.x(n) = drift0;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n + 1, n + 1);
  cov.topLeftCorner(n, n) = f.cov;
  cov(n, n) = drift_var;
  f.cov = std::move(cov);
  f.drift_augmented = true;
}

void enable_consider(JointFilterState& f, const ConsiderConfig& cfg) {
  if (f.bias_augmented) {
    throw std::logic_error("enable_consider: state vector already estimates the bias");
  }
  if (cfg.b0_var < 0.0) {
    throw std::invalid_argument("enable_consider: B0 must be >= 0");
  }
  f.mode = BiasMode::consider;
  f.consider = cfg;
  f.cross = Eigen::MatrixXd::Zero(f.dim(), 1);
}

void time_update(JointFilterState& f, const BlockDynamics& dynamics, double t_to,
                 const Eigen::MatrixXd& q12) {
  time_update(f, JointDynamics{dynamics, dynamics}, t_to, q12);
}

void time_update(JointFilterState& f, const JointDynamics& dynamics, double t_to,
                 const Eigen::MatrixXd& q12) {
  const int n = f.dim();
  const double dt = t_to - f.epoch;

  Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(n, n);
  if (dt != 0.0) {
    const PropagatedBlock b1 = dynamics.sc1(f.x.head<6>(), f.epoch, t_to);
    const PropagatedBlock b2 = dynamics.sc2(f.x.segment<6>(6), f.epoch, t_to);
    f.x.head<6>() = b1.state;
    f.x.segment<6>(6) = b2.state;
    phi.block<6, 6>(0, 0) = b1.stm;
    phi.block<6, 6>(6, 6) = b2.stm;
  }
  if (f.drift_augmented) {
    phi(12, 13) = dt;            // bias integrates the drift state
    f.x(12) += dt * f.x(13);
  }

  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  q.topLeftCorner(12, 12) = q12;

  f.cov = phi * f.cov * phi.transpose() + q;
  symmetrize(f.cov);
  if (f.mode == BiasMode::consider) {
    f.cross = phi * f.cross;
  }
  f.epoch = t_to;
}

UpdateDiagnostics measurement_update(JointFilterState& f, double y, double y_pred,
                                     const Eigen::RowVectorXd& h, double w) {
  if (h.size() != f.dim()) {
    throw std::invalid_argument("measurement_update: H row dimension mismatch");
  }
  if (!(w > 0.0)) {
    throw std::invalid_argument("measurement_update: W must be positive");
  }
  const Eigen::VectorXd ph = f.cov * h.transpose();
  const double s = h.dot(ph) + w;
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw std::runtime_error("measurement_update: innovation covariance not positive");
  }
  const Eigen::VectorXd k = ph / s;
  const double innovation = y - y_pred;

  const Eigen::MatrixXd p_prior = f.cov;
  f.x += k * innovation;
  f.cov = p_prior - k * (h * p_prior);
  symmetrize(f.cov);

  UpdateDiagnostics diag;
  diag.innovation = innovation;
  diag.innovation_variance = s;
  diag.joseph_rel_err = joseph_check(f.cov, p_prior, k, h, w);
  return diag;
}

UpdateDiagnostics consider_measurement_update(JointFilterState& f, double y, double y_pred,
                                              const Eigen::RowVectorXd& h, double n_sens,
                                              double w) {
  if (f.mode != BiasMode::consider) {
    throw std::logic_error("consider_measurement_update: filter is not in consider mode");
  }
  if (h.size() != f.dim()) {
    throw std::invalid_argument("consider_measurement_update: H row dimension mismatch");
  }
  const double b0_var = f.consider.b0_var;
  const Eigen::VectorXd ph = f.cov * h.transpose();   // P H^T
  const double hc = h.dot(f.cross.col(0));            // H C
  const double omega =
      h.dot(ph) + n_sens * hc + hc * n_sens + n_sens * b0_var * n_sens + w;
  if (!(omega > 0.0) || !std::isfinite(omega)) {
    throw std::runtime_error("consider_measurement_update: innovation covariance not positive");
  }
  const Eigen::VectorXd gain_num = ph + f.cross.col(0) * n_sens;
  const Eigen::VectorXd k = gain_num / omega;
  const double innovation = y - y_pred;

  const Eigen::MatrixXd p_prior = f.cov;
  const Eigen::VectorXd cross_prior = f.cross.col(0);
  f.x += k * innovation;
  // P = (I - K H) Pbar - K N Cbar^T; with the optimal gain this is the
  // symmetric downdate Pbar - v v^T / omega, v = Pbar H^T + Cbar N.
  f.cov = p_prior - k * (h * p_prior) - k * (n_sens * cross_prior.transpose());
  symmetrize(f.cov);
  f.cross.col(0) = cross_prior - k * (hc + n_sens * b0_var);

  UpdateDiagnostics diag;
  diag.innovation = innovation;
  diag.innovation_variance = omega;
  // Joseph comparison applies to the EKF portion; reuse the full downdate.
  diag.joseph_rel_err = 0.0;
  return diag;
}

FilterRunResult run_filter(JointFilterState f, const std::vector<double>& epochs,
                           const std::vector<double>& measurements,
                           const std::vector<Vector12d>& truth, const FilterRunConfig& cfg) {
  if (epochs.empty()) {
    throw std::invalid_argument("run_filter: need at least the initial epoch");
  }
  if (!measurements.empty() && measurements.size() != epochs.size() - 1) {
    throw std::invalid_argument("run_filter: measurements must align with epochs[1..]");
  }
  if (!truth.empty() && truth.size() != epochs.size()) {
    throw std::invalid_argument("run_filter: truth must align with epochs");
  }

  FilterRunResult result;
  result.min_cov_eig_ratio = std::numeric_limits<double>::infinity();
  result.steps.reserve(epochs.size());

  const auto record = [&](double residual, double pre1, double pre2) {
    FilterStep step;
    step.epoch = f.epoch;
    step.x_hat = f.x;
    step.sigma = f.cov.diagonal().cwiseMax(0.0).cwiseSqrt();
    step.residual = residual;
    step.pre_pos_trace[0] = pre1;
    step.pre_pos_trace[1] = pre2;
    step.post_pos_trace[0] = f.cov.block<3, 3>(0, 0).trace();
    step.post_pos_trace[1] = f.cov.block<3, 3>(6, 6).trace();
    result.steps.push_back(std::move(step));
  };

  record(0.0, f.cov.block<3, 3>(0, 0).trace(), f.cov.block<3, 3>(6, 6).trace());

  for (std::size_t k = 1; k < epochs.size(); ++k) {
    time_update(f, cfg.dynamics, epochs[k], cfg.q12);
    const double pre1 = f.cov.block<3, 3>(0, 0).trace();
    const double pre2 = f.cov.block<3, 3>(6, 6).trace();

    double residual = 0.0;
    if (!measurements.empty()) {
      Eigen::RowVectorXd h12 = measurement_partials(f.dynamic_states(), cfg.kind, false);
      Eigen::RowVectorXd h = Eigen::RowVectorXd::Zero(f.dim());
      h.head<12>() = h12;

      const Vector12d xd = f.dynamic_states();
      double y_pred =
          (cfg.kind == MeasurementKind::range)
              ? geometric_range(xd.segment<3>(0), xd.segment<3>(6))
              : range_rate_core(xd.segment<3>(0), xd.segment<3>(3), xd.segment<3>(6),
                                xd.segment<3>(9));

      UpdateDiagnostics diag;
      if (f.mode == BiasMode::consider) {
        y_pred += f.consider.b0;
        diag = consider_measurement_update(f, measurements[k - 1], y_pred, h, 1.0,
                                           cfg.meas_variance);
      } else {
        if (f.bias_augmented) {
          h(12) = 1.0;
          y_pred += f.x(12);
        }
        diag = measurement_update(f, measurements[k - 1], y_pred, h, cfg.meas_variance);
      }
      residual = diag.innovation;
      result.max_joseph_rel_err = std::max(result.max_joseph_rel_err, diag.joseph_rel_err);
    }

    if (cfg.check_covariance_health) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(f.cov, Eigen::EigenvaluesOnly);
      const double trace = f.cov.trace();
      if (trace > 0.0) {
        result.min_cov_eig_ratio =
            std::min(result.min_cov_eig_ratio, es.eigenvalues().minCoeff() / trace);
      }
    }

    record(residual, pre1, pre2);

    if (cfg.divergence_position_nd > 0.0 && !truth.empty()) {
      const Vector12d err = f.dynamic_states() - truth[k];
      const double e1 = err.segment<3>(0).norm();
      const double e2 = err.segment<3>(6).norm();
      if (e1 > cfg.divergence_position_nd || e2 > cfg.divergence_position_nd) {
        result.diverged = true;
        result.diverged_epoch = f.epoch;
        break;
      }
    }
  }
  return result;
}

}  // namespace xlnav
