#include "xlnav/observability.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <Eigen/SVD>

namespace xlnav {

const std::array<std::string, 12>& joint_state_labels() {
  static const std::array<std::string, 12> labels = {
      "x1", "y1", "z1", "xd1", "yd1", "zd1", "x2", "y2", "z2", "xd2", "yd2", "zd2"};
  return labels;
}

SvdMetrics svd_metrics(const Eigen::MatrixXd& gramian) {
  if (gramian.rows() != gramian.cols()) {
    throw std::invalid_argument("svd_metrics: gramian must be square");
  }
  if ((gramian - gramian.transpose()).norm() > 1e-9 * std::max(1.0, gramian.norm())) {
    throw std::invalid_argument("svd_metrics: gramian must be symmetric");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(gramian);
  SvdMetrics m;
  m.singular_values.assign(svd.singularValues().data(),
                           svd.singularValues().data() + svd.singularValues().size());
  const double s_max = m.singular_values.front();
  const double s_min = m.singular_values.back();
  if (s_min <= 0.0) {
    m.condition_number_infinite = true;
    m.condition_number = std::numeric_limits<double>::infinity();
    m.unobservability_index = std::numeric_limits<double>::infinity();
  } else {
    m.condition_number = s_max / s_min;
    m.unobservability_index = 1.0 / s_min;
  }
  return m;
}

ObservabilityReport accumulate_gramian(const std::vector<Eigen::Matrix<double, 12, 12>>& stms,
                                       const std::vector<Eigen::RowVectorXd>& h_rows) {
  if (stms.size() != h_rows.size()) {
    throw std::invalid_argument("accumulate_gramian: stms and h_rows must align");
  }
  ObservabilityReport report;
  for (std::size_t k = 0; k < stms.size(); ++k) {
    if (h_rows[k].size() != 12) {
      throw std::invalid_argument("accumulate_gramian: H rows must have 12 columns");
    }
    const Eigen::RowVectorXd hphi = h_rows[k] * stms[k];
    report.gramian += hphi.transpose() * hphi;
  }
  report.gramian = 0.5 * (report.gramian + report.gramian.transpose());

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(report.gramian, Eigen::ComputeFullU);
  const Eigen::VectorXd s = svd.singularValues();
  report.singular_values.assign(s.data(), s.data() + s.size());
  const double s_min = report.singular_values.back();
  if (s_min <= 0.0) {
    report.condition_number_infinite = true;
    report.condition_number = std::numeric_limits<double>::infinity();
    report.unobservability_index = std::numeric_limits<double>::infinity();
  } else {
    report.condition_number = report.singular_values.front() / s_min;
    report.unobservability_index = 1.0 / s_min;
  }

  // Energy-weighted left singular vectors: score_j = sum_k s_k U(j,k)^2.
  const Eigen::MatrixXd u = svd.matrixU();
  std::array<double, 12> score{};
  for (int j = 0; j < 12; ++j) {
    for (int k = 0; k < 12; ++k) {
      score[j] += s(k) * u(j, k) * u(j, k);
    }
  }
  std::array<int, 12> order{};
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return score[a] > score[b]; });
  for (int idx : order) {
    report.state_ranking.push_back(joint_state_labels()[idx]);
    report.state_scores.push_back(score[idx]);
  }
  return report;
}

EffectivenessSeries observation_effectiveness(const FilterRunResult& run) {
  EffectivenessSeries series;
  double acc1 = 0.0, acc2 = 0.0;
  for (const FilterStep& step : run.steps) {
    if (step.pre_pos_trace[0] > 0.0) {
      acc1 += std::max(0.0, step.pre_pos_trace[0] - step.post_pos_trace[0]) /
              step.pre_pos_trace[0];
    }
    if (step.pre_pos_trace[1] > 0.0) {
      acc2 += std::max(0.0, step.pre_pos_trace[1] - step.post_pos_trace[1]) /
              step.pre_pos_trace[1];
    }
    series.epochs.push_back(step.epoch);
    series.sc1.push_back(acc1);
    series.sc2.push_back(acc2);
  }
  return series;
}

}  // namespace xlnav
