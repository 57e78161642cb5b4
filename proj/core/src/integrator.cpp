#include "xlnav/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace xlnav {

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
    throw std::invalid_argument("IntegratorConfig: tolerances must be positive");
  }
  if (method == StepMethod::fixed_rk4 && !(fixed_step > 0.0)) {
    throw std::invalid_argument("IntegratorConfig: fixed_step must be positive");
  }
  if (!(max_step > 0.0)) {
    throw std::invalid_argument("IntegratorConfig: max_step must be positive");
  }
}

namespace {

// Dormand-Prince 5(4) coefficients
constexpr double kC[7] = {0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5.0},
    {3.0 / 40.0, 9.0 / 40.0},
    {44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0},
    {19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0},
    {9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0},
    {35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0},
};
// 5th-order solution weights equal kA[6]; 4th-order weights:
constexpr double kB4[7] = {5179.0 / 57600.0, 0.0,           7571.0 / 16695.0, 393.0 / 640.0,
                           -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0};

struct Rk45Step {
  Eigen::VectorXd y5;
  double err;  // scaled error norm
};

Rk45Step rk45_step(const OdeDerivative& f, double t, const Eigen::VectorXd& y, double h,
                   const Eigen::VectorXd& k1, double rel_tol, double abs_tol) {
  const auto n = y.size();
  Eigen::VectorXd k[7];
  k[0] = k1;
  for (int i = 1; i < 7; ++i) {
    Eigen::VectorXd yi = y;
    for (int j = 0; j < i; ++j) {
      if (kA[i][j] != 0.0) yi += (h * kA[i][j]) * k[j];
    }
    k[i] = f(t + kC[i] * h, yi);
  }
  // k[6] was evaluated at the 5th-order solution point (FSAL layout)
  Eigen::VectorXd y5 = y;
  for (int j = 0; j < 6; ++j) {
    if (kA[6][j] != 0.0) y5 += (h * kA[6][j]) * k[j];
  }
  Eigen::VectorXd y4 = y;
  for (int j = 0; j < 7; ++j) {
    if (kB4[j] != 0.0) y4 += (h * kB4[j]) * k[j];
  }

  double err2 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double scale = abs_tol + rel_tol * std::max(std::abs(y(i)), std::abs(y5(i)));
    const double e = (y5(i) - y4(i)) / scale;
    err2 += e * e;
  }
  return {std::move(y5), std::sqrt(err2 / static_cast<double>(n))};
}

Eigen::VectorXd integrate_adaptive(const OdeDerivative& f, Eigen::VectorXd y, double t0,
                                   double t1, const IntegratorConfig& cfg) {
  const double dir = (t1 >= t0) ? 1.0 : -1.0;
  double t = t0;
  double span = std::abs(t1 - t0);
  double h = std::min(cfg.max_step, span);
  if (h == 0.0) return y;

  while (dir * (t1 - t) > 0.0) {
    h = std::min(h, std::abs(t1 - t));
    if (h < cfg.min_step) {
      throw std::runtime_error("integrate: step-size underflow (near-singular dynamics or tolerance not met)");
    }
    const Eigen::VectorXd k1 = f(t, y);
    const Rk45Step step = rk45_step(f, t, y, dir * h, k1, cfg.rel_tol, cfg.abs_tol);
    if (step.err <= 1.0) {
      t += dir * h;
      y = step.y5;
      const double grow = (step.err == 0.0) ? 5.0 : 0.9 * std::pow(step.err, -0.2);
      h = std::min(cfg.max_step, h * std::clamp(grow, 0.2, 5.0));
    } else {
      h *= std::clamp(0.9 * std::pow(step.err, -0.2), 0.1, 0.9);
    }
  }
  return y;
}

Eigen::VectorXd integrate_fixed_rk4(const OdeDerivative& f, Eigen::VectorXd y, double t0,
                                    double t1, const IntegratorConfig& cfg) {
  const double dir = (t1 >= t0) ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);
  if (span == 0.0) return y;
  const auto nsteps = static_cast<long>(std::ceil(span / cfg.fixed_step - 1e-12));
  const double h = dir * span / static_cast<double>(nsteps);
  double t = t0;
  for (long i = 0; i < nsteps; ++i) {
    const Eigen::VectorXd k1 = f(t, y);
    const Eigen::VectorXd k2 = f(t + 0.5 * h, y + (0.5 * h) * k1);
    const Eigen::VectorXd k3 = f(t + 0.5 * h, y + (0.5 * h) * k2);
    const Eigen::VectorXd k4 = f(t + h, y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t += h;
  }
  return y;
}

// 6-state or 42-state (state + row-major STM) CRTBP right-hand side.
Eigen::VectorXd crtbp_rhs(double /*t*/, const Eigen::VectorXd& y, const CrtbpParams& p,
                          bool with_stm) {
  RotatingState s;
  s.pos = y.head<3>();
  s.vel = y.segment<3>(3);
  Eigen::VectorXd dy(y.size());
  dy.head<6>() = crtbp_derivative(s, p);
  if (with_stm) {
    const Matrix6d a = crtbp_jacobian(s, p);
    // STM stored row-major in the flat vector
    Eigen::Map<const Eigen::Matrix<double, 6, 6, Eigen::RowMajor>> phi(y.data() + 6);
    Eigen::Map<Eigen::Matrix<double, 6, 6, Eigen::RowMajor>> phidot(dy.data() + 6);
    phidot = a * phi;
  }
  return dy;
}

Eigen::VectorXd pack(const RotatingState& s, bool with_stm, const Matrix6d& stm) {
  Eigen::VectorXd y(with_stm ? 42 : 6);
  y.head<6>() = s.vec();
  if (with_stm) {
    for (int i = 0; i < 36; ++i) y(6 + i) = stm(i / 6, i % 6);
  }
  return y;
}

StmState unpack(double epoch, const Eigen::VectorXd& y, bool with_stm) {
  StmState out;
  out.state = RotatingState::from_vec(epoch, y.head<6>());
  if (with_stm) {
    for (int i = 0; i < 36; ++i) out.stm(i / 6, i % 6) = y(6 + i);
  } else {
    out.stm.setIdentity();
  }
  return out;
}

}  // namespace

Eigen::VectorXd integrate(const OdeDerivative& f, const Eigen::VectorXd& y0, double t0,
                          double t1, const IntegratorConfig& cfg) {
  cfg.validate();
  if (cfg.method == StepMethod::fixed_rk4) {
    return integrate_fixed_rk4(f, y0, t0, t1, cfg);
  }
  return integrate_adaptive(f, y0, t0, t1, cfg);
}

std::vector<StmState> propagate(const RotatingState& s0, const std::vector<double>& epochs,
                                const IntegratorConfig& cfg, const CrtbpParams& p,
                                bool with_stm) {
  cfg.validate();
  p.validate();
  const OdeDerivative rhs = [&p, with_stm](double t, const Eigen::VectorXd& y) {
    return crtbp_rhs(t, y, p, with_stm);
  };

  std::vector<StmState> out;
  out.reserve(epochs.size());
  Eigen::VectorXd y = pack(s0, with_stm, Matrix6d::Identity());
  double t = s0.epoch;
  for (double target : epochs) {
    if (target != t) {
      y = integrate(rhs, y, t, target, cfg);
      t = target;
    }
    out.push_back(unpack(t, y, with_stm));
  }
  return out;
}

StmState propagate_to(const RotatingState& s0, double t1, const IntegratorConfig& cfg,
                      const CrtbpParams& p, bool with_stm) {
  return propagate(s0, {t1}, cfg, p, with_stm).front();
}

}  // namespace xlnav
