#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include <Eigen/LU>

#include "test_helpers.hpp"
#include "xlnav/integrator.hpp"

using namespace xlnav;

namespace {
const CrtbpParams kParams;

IntegratorConfig tight_adaptive() {
  IntegratorConfig cfg;
  cfg.method = StepMethod::adaptive_rk45;
  cfg.rel_tol = 1e-12;
  cfg.abs_tol = 1e-12;
  cfg.max_step = 0.05;
  return cfg;
}
}  // namespace

TEST_CASE("zero-length span returns the input with identity STM") {
  const RotatingState s0 = xlnav::testing::halo_initial_state();
  const StmState out = propagate_to(s0, 0.0, tight_adaptive(), kParams, true);
  CHECK((out.state.vec() - s0.vec()).norm() == 0.0);
  CHECK((out.stm - Matrix6d::Identity()).norm() == 0.0);
}

TEST_CASE("Jacobi constant drifts less than 1e-9 over the 14-day halo arc") {
  const RotatingState s0 = xlnav::testing::halo_initial_state();
  const double c0 = jacobi_constant(s0, kParams);
  std::vector<double> epochs;
  for (int k = 0; k <= 56; ++k) {
    epochs.push_back(xlnav::testing::fourteen_days_nd() * k / 56.0);
  }
  const auto traj = propagate(s0, epochs, tight_adaptive(), kParams, false);
  double max_drift = 0.0;
  for (const StmState& s : traj) {
    max_drift = std::max(max_drift, std::abs(jacobi_constant(s.state, kParams) - c0));
  }
  CHECK(max_drift / std::abs(c0) < 1e-9);
}

TEST_CASE("halo arc stays bounded near the libration point and nearly closes") {
  const RotatingState s0 = xlnav::testing::halo_initial_state();
  const double x_l2 = 1.1556799131;
  std::vector<double> epochs;
  for (int k = 0; k <= 112; ++k) {
    epochs.push_back(xlnav::testing::fourteen_days_nd() * k / 112.0);
  }
  const auto traj = propagate(s0, epochs, tight_adaptive(), kParams, false);
  for (const StmState& s : traj) {
    CHECK((s.state.pos - Eigen::Vector3d{x_l2, 0.0, 0.0}).norm() < 0.35);
  }
  // Quasi-periodic closure after one 14-day revolution.
  CHECK((traj.back().state.pos - s0.pos).norm() < 0.05);
}

TEST_CASE("planar initial conditions stay exactly planar") {
  RotatingState s0;
  s0.pos = {0.9, 0.2, 0.0};
  s0.vel = {0.05, -0.1, 0.0};
  std::vector<double> epochs{0.25, 0.5, 1.0};
  const auto traj = propagate(s0, epochs, tight_adaptive(), kParams, false);
  for (const StmState& s : traj) {
    CHECK(std::abs(s.state.pos.z()) < 1e-12);
    CHECK(std::abs(s.state.vel.z()) < 1e-12);
  }
}

TEST_CASE("STM is consistent with flow-map differencing on a 1-day arc") {
  const RotatingState s0 = xlnav::testing::halo_initial_state();
  const double t1 = 1.0 / 4.343;

  IntegratorConfig fixed;
  fixed.method = StepMethod::fixed_rk4;
  fixed.fixed_step = 1e-4;

  const StmState nominal = propagate_to(s0, t1, fixed, kParams, true);
  const double delta = 1e-8;
  for (int j = 0; j < 6; ++j) {
    Vector6d v = s0.vec();
    v(j) += delta;
    const StmState pert =
        propagate_to(RotatingState::from_vec(0.0, v), t1, fixed, kParams, false);
    const Vector6d predicted = nominal.state.vec() + nominal.stm.col(j) * delta;
    // 1e-12 linearization budget plus the second-order remainder.
    CHECK((pert.state.vec() - predicted).norm() < 2e-12);
  }
}

TEST_CASE("fixed-step RK4 shows fourth-order convergence on the halo arc") {
  const RotatingState s0 = xlnav::testing::halo_initial_state();
  const double t1 = 0.5;

  IntegratorConfig ref_cfg = tight_adaptive();
  ref_cfg.rel_tol = 1e-13;
  ref_cfg.abs_tol = 1e-13;
  const Vector6d ref = propagate_to(s0, t1, ref_cfg, kParams, false).state.vec();

  std::vector<double> errors;
  // Coarse enough that the finest rung stays above the reference's own error.
  for (double h : {t1 / 16.0, t1 / 32.0, t1 / 64.0, t1 / 128.0}) {
    IntegratorConfig cfg;
    cfg.method = StepMethod::fixed_rk4;
    cfg.fixed_step = h;
    errors.push_back((propagate_to(s0, t1, cfg, kParams, false).state.vec() - ref).norm());
  }
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    const double ratio = errors[i] / errors[i + 1];
    CHECK(ratio > 10.0);
    CHECK(ratio < 22.0);
  }
}

TEST_CASE("STM determinant stays nonzero and starts from identity") {
  const RotatingState s0 = xlnav::testing::halo_initial_state();
  const auto traj = propagate(s0, {0.0, 0.5, 1.0}, tight_adaptive(), kParams, true);
  CHECK((traj.front().stm - Matrix6d::Identity()).norm() == 0.0);
  for (const StmState& s : traj) {
    CHECK(std::abs(s.stm.determinant()) > 1e-6);
  }
}

TEST_CASE("step-size underflow raises a diagnostic error") {
  // dy/dt = y / (1 - t) blows up at t = 1; the controller cannot cross it.
  const OdeDerivative f = [](double t, const Eigen::VectorXd& y) {
    return Eigen::VectorXd(y / (1.0 - t));
  };
  Eigen::VectorXd y0(1);
  y0 << 1.0;
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-10;
  cfg.abs_tol = 1e-10;
  cfg.max_step = 0.5;
  CHECK_THROWS_AS(integrate(f, y0, 0.0, 2.0, cfg), std::runtime_error);
}

TEST_CASE("integrator config validation") {
  IntegratorConfig cfg;
  cfg.rel_tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = IntegratorConfig{};
  cfg.method = StepMethod::fixed_rk4;
  cfg.fixed_step = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
