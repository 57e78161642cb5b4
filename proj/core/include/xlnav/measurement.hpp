#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace xlnav {

enum class MeasurementKind { range, range_rate };

/// One epoch-tagged two-way observable. Range in km, range-rate in km/s;
/// sigma and bias carry the same units as value.
struct MeasurementSample {
  double epoch = 0.0;  ///< non-dimensional scenario time
  MeasurementKind kind = MeasurementKind::range;
  double value = 0.0;
  double sigma = 0.0;
  double bias_truth = 0.0;
};

/// Transmit/receive events of one two-way timestamp exchange (seconds), with
/// the onboard clock states at those events. Transponder delays are lumped
/// into the bias term upstream.
struct TimestampQuad {
  double t1 = 0.0, t2 = 0.0, t3 = 0.0, t4 = 0.0;
  double psi1 = 0.0, psi2 = 0.0, psi3 = 0.0, psi4 = 0.0;

  void validate() const;  // t1 < t2 <= t3 < t4
};

struct TimeTransferResult {
  double range_km = 0.0;
  double clock_offset_s = 0.0;
};

double geometric_range(const Eigen::Vector3d& r1_km, const Eigen::Vector3d& r2_km);

/// Bias-free line-of-sight range rate, km/s. Undefined at zero separation.
double range_rate_core(const Eigen::Vector3d& r1_km, const Eigen::Vector3d& v1_km_s,
                       const Eigen::Vector3d& r2_km, const Eigen::Vector3d& v2_km_s);

/// rho = |r1 - r2| + bias + noise. The noise draw is passed in so synthesis
/// stays deterministic under a seeded stream.
MeasurementSample pseudo_range(double epoch, const Eigen::Vector3d& r1_km,
                               const Eigen::Vector3d& r2_km, double bias_km,
                               double sigma_km, double noise_draw_km);

MeasurementSample range_rate(double epoch, const Eigen::Vector3d& r1_km,
                             const Eigen::Vector3d& v1_km_s, const Eigen::Vector3d& r2_km,
                             const Eigen::Vector3d& v2_km_s, double bias_km_s,
                             double sigma_km_s, double noise_draw_km_s);

/// Round-trip range and clock offset from a four-timestamp exchange.
TimeTransferResult time_transfer_range(const TimestampQuad& q);

/// Row of d(observable)/d(joint 12-state) in consistent (non-dimensional or
/// km) units; positions of spacecraft 1 first. When bias_column, a trailing
/// 1 is appended. Range partials with respect to velocities are exactly zero.
Eigen::RowVectorXd measurement_partials(const Eigen::Matrix<double, 12, 1>& joint_state,
                                        MeasurementKind kind, bool bias_column = false);

/// Owns the per-run noise stream. One instance per Monte Carlo run.
class MeasurementSynthesizer {
 public:
  MeasurementSynthesizer(std::uint64_t seed, double sigma, double bias_truth,
                         MeasurementKind kind);

  /// Synthesizes the observable for a truth state pair (km, km/s inputs).
  MeasurementSample synthesize(double epoch, const Eigen::Vector3d& r1_km,
                               const Eigen::Vector3d& v1_km_s, const Eigen::Vector3d& r2_km,
                               const Eigen::Vector3d& v2_km_s);

  double gaussian_draw();

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  double sigma_;
  double bias_;
  MeasurementKind kind_;
};

}  // namespace xlnav
