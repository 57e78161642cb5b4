#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "xlnav/filter.hpp"

namespace xlnav {

/// Observability Gramian over the joint 12-state with SVD-derived metrics.
struct ObservabilityReport {
  Eigen::Matrix<double, 12, 12> gramian = Eigen::Matrix<double, 12, 12>::Zero();
  std::vector<double> singular_values;          ///< descending
  double condition_number = 0.0;                ///< s_max / s_min; +inf flag when s_min = 0
  bool condition_number_infinite = false;
  double unobservability_index = 0.0;           ///< 1 / s_min
  std::vector<std::string> state_ranking;       ///< most -> least observable
  std::vector<double> state_scores;             ///< aligned with state_ranking
};

/// Labels of the joint state, spacecraft 1 (halo orbiter) first.
const std::array<std::string, 12>& joint_state_labels();

struct SvdMetrics {
  std::vector<double> singular_values;
  double condition_number = 0.0;
  bool condition_number_infinite = false;
  double unobservability_index = 0.0;
};

SvdMetrics svd_metrics(const Eigen::MatrixXd& gramian);

/// Accumulates N = sum Phi^T H^T H Phi over epochs. `stms` are Phi(t_k, t0)
/// for the joint state (block-diagonal per spacecraft); `h_rows` the matching
/// 1x12 sensitivity rows.
ObservabilityReport accumulate_gramian(const std::vector<Eigen::Matrix<double, 12, 12>>& stms,
                                       const std::vector<Eigen::RowVectorXd>& h_rows);

/// Cumulative relative reduction of the positional covariance trace per
/// spacecraft; non-decreasing by construction.
struct EffectivenessSeries {
  std::vector<double> epochs;
  std::vector<double> sc1;
  std::vector<double> sc2;
};

EffectivenessSeries observation_effectiveness(const FilterRunResult& run);

}  // namespace xlnav
