#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "xlnav/crtbp.hpp"
#include "xlnav/measurement.hpp"

namespace xlnav {

using Vector12d = Eigen::Matrix<double, 12, 1>;

enum class BiasMode { neglect, estimate, consider };

/// Q construction per spacecraft. The published pattern uses
/// {dt^4/3, dt^3/2, dt^2} blocks; the conventional state-noise-compensation
/// form {dt^3/3, dt^2/2, dt} sits behind the form switch.
struct ProcessNoiseConfig {
  double sigma1 = 0.0;  ///< acceleration-noise intensity, spacecraft 1
  double sigma2 = 0.0;  ///< spacecraft 2
  double dt = 0.0;      ///< filter step, non-dimensional
  enum class Form { published, conventional };
  Form form = Form::published;
};

/// Joint 12x12 block-diagonal process noise (6x6 per spacecraft).
Eigen::MatrixXd build_process_noise(const ProcessNoiseConfig& cfg);

struct ConsiderConfig {
  double b0 = 0.0;       ///< a-priori bias estimate, non-dimensional length
  double b0_var = 0.0;   ///< B0 (q = 1)
};

/// Joint estimate of both spacecraft, optionally augmented with a measurement
/// bias state and a clock-drift state, plus the consider cross-covariance.
struct JointFilterState {
  double epoch = 0.0;
  Eigen::VectorXd x;      ///< 12 (+bias)(+drift)
  Eigen::MatrixXd cov;
  Eigen::MatrixXd cross;  ///< n x 1, consider mode only
  BiasMode mode = BiasMode::neglect;
  bool bias_augmented = false;
  bool drift_augmented = false;
  ConsiderConfig consider;

  int dim() const { return static_cast<int>(x.size()); }
  Vector12d dynamic_states() const { return x.head<12>(); }
};

JointFilterState make_initial_state(double epoch, const Vector12d& x0,
                                    const Eigen::Matrix<double, 12, 12>& p0);

/// Appends a bias state (estimate mode). Throws if already augmented.
void augment_bias(JointFilterState& f, double bias0, double bias_var);
/// Appends a clock-drift state behind the bias state. Throws without a bias
/// state or when already augmented.
void augment_clock_drift(JointFilterState& f, double drift0, double drift_var);
/// Switches to consider mode with a zeroed cross-covariance. Throws when the
/// state vector is bias-augmented.
void enable_consider(JointFilterState& f, const ConsiderConfig& cfg);

/// Propagates one 6-state block of the joint vector across a filter step and
/// returns the block STM.
struct PropagatedBlock {
  Vector6d state;
  Matrix6d stm;
};
using BlockDynamics = std::function<PropagatedBlock(const Vector6d&, double t0, double t1)>;

/// Per-spacecraft dynamics handles (they differ when SRP is modeled).
struct JointDynamics {
  BlockDynamics sc1;
  BlockDynamics sc2;
};

/// EKF prediction: nonlinear state propagation, covariance mapped through the
/// (augmented) STM and inflated by Q. Consider mode also maps the
/// cross-covariance.
void time_update(JointFilterState& f, const JointDynamics& dynamics, double t_to,
                 const Eigen::MatrixXd& q12);

/// Convenience overload: identical dynamics for both spacecraft.
void time_update(JointFilterState& f, const BlockDynamics& dynamics, double t_to,
                 const Eigen::MatrixXd& q12);

struct UpdateDiagnostics {
  double innovation = 0.0;
  double innovation_variance = 0.0;
  double joseph_rel_err = 0.0;  ///< |P - P_joseph| / |P|
};

/// Scalar EKF correction. `y` is the observed value, `y_pred` the nonlinear
/// prediction h(x) (including any bias/consider terms), `h` the sensitivity
/// row of length f.dim(). Throws when the innovation covariance is not
/// positive.
UpdateDiagnostics measurement_update(JointFilterState& f, double y, double y_pred,
                                     const Eigen::RowVectorXd& h, double w);

/// Scalar Schmidt consider correction; `n_sens` is the measurement bias
/// sensitivity (q = 1).
UpdateDiagnostics consider_measurement_update(JointFilterState& f, double y, double y_pred,
                                              const Eigen::RowVectorXd& h, double n_sens,
                                              double w);

/// One measurement epoch of a run record.
struct FilterStep {
  double epoch = 0.0;
  Eigen::VectorXd x_hat;
  Eigen::VectorXd sigma;      ///< sqrt(diag P)
  double residual = 0.0;      ///< pre-fit innovation
  double pre_pos_trace[2] = {0.0, 0.0};   ///< tr(P_pos) per spacecraft before update
  double post_pos_trace[2] = {0.0, 0.0};  ///< and after
};

struct FilterRunResult {
  std::vector<FilterStep> steps;
  bool diverged = false;
  double diverged_epoch = 0.0;
  double max_joseph_rel_err = 0.0;
  double min_cov_eig_ratio = 0.0;  ///< min over steps of lambda_min / trace
};

struct FilterRunConfig {
  JointDynamics dynamics;
  Eigen::MatrixXd q12;                   ///< 12x12 process noise per step
  MeasurementKind kind = MeasurementKind::range;
  double meas_variance = 0.0;            ///< W, non-dimensional units
  double divergence_position_nd = 0.0;   ///< abort threshold on position error; 0 disables
  bool check_covariance_health = true;
};

/// Runs alternating time/measurement updates over time-ordered measurements.
/// `truth` (12-state per epoch) drives the divergence detector and is not
/// otherwise used. Measurements are scalars aligned with epochs[1..]; an
/// empty measurement vector yields a pure prediction run.
FilterRunResult run_filter(JointFilterState f, const std::vector<double>& epochs,
                           const std::vector<double>& measurements,
                           const std::vector<Vector12d>& truth, const FilterRunConfig& cfg);

}  // namespace xlnav
