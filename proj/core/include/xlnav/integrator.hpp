#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "xlnav/crtbp.hpp"

namespace xlnav {

enum class StepMethod { adaptive_rk45, fixed_rk4 };

struct IntegratorConfig {
  StepMethod method = StepMethod::adaptive_rk45;
  double rel_tol = 1e-12;
  double abs_tol = 1e-12;
  double max_step = 0.05;     ///< non-dimensional time
  double fixed_step = 1e-3;   ///< non-dimensional time, fixed_rk4 only
  double min_step = 1e-14;    ///< below this the run aborts (step-size underflow)

  void validate() const;  // throws std::invalid_argument
};

/// dy/dt = f(t, y)
using OdeDerivative = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;

/// Integrates y' = f(t, y) from t0 to t1 (either direction). Throws
/// std::runtime_error on step-size underflow.
Eigen::VectorXd integrate(const OdeDerivative& f, const Eigen::VectorXd& y0,
                          double t0, double t1, const IntegratorConfig& cfg);

/// State plus state transition matrix accumulated from the segment start.
struct StmState {
  RotatingState state;
  Matrix6d stm = Matrix6d::Identity();
};

/// Propagates a CRTBP state to each epoch in `epochs` (ascending, first may
/// equal s0.epoch). When with_stm, each output carries Phi(t_k, s0.epoch).
std::vector<StmState> propagate(const RotatingState& s0, const std::vector<double>& epochs,
                                const IntegratorConfig& cfg, const CrtbpParams& p,
                                bool with_stm);

/// Single-segment convenience: state and Phi(t1, s0.epoch) at t1.
StmState propagate_to(const RotatingState& s0, double t1, const IntegratorConfig& cfg,
                      const CrtbpParams& p, bool with_stm);

}  // namespace xlnav
