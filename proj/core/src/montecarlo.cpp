#include "xlnav/montecarlo.hpp"

#include <atomic>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <thread>

namespace xlnav {

namespace {

/// Reduced per-run series: squared errors and covariance traces per epoch.
struct RunReduction {
  bool diverged = false;
  std::vector<double> pos2_sc1, pos2_sc2;  ///< squared position error, nd
  std::vector<double> vel2_sc1, vel2_sc2;
  std::vector<double> sig_pos2_sc1, sig_pos2_sc2;  ///< position covariance trace
  std::vector<double> sig_vel2_sc1, sig_vel2_sc2;
  double bias_final_nd = 0.0;
  bool has_bias = false;
};

RunReduction reduce_run(const ScenarioData& data, const FilterRunResult& run) {
  RunReduction red;
  red.diverged = run.diverged;
  if (run.diverged) return red;
  const std::size_t n = run.steps.size();
  red.pos2_sc1.resize(n);
  red.pos2_sc2.resize(n);
  red.vel2_sc1.resize(n);
  red.vel2_sc2.resize(n);
  red.sig_pos2_sc1.resize(n);
  red.sig_pos2_sc2.resize(n);
  red.sig_vel2_sc1.resize(n);
  red.sig_vel2_sc2.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const FilterStep& step = run.steps[k];
    const Vector12d err = step.x_hat.head<12>() - data.truth[k];
    red.pos2_sc1[k] = err.segment<3>(0).squaredNorm();
    red.vel2_sc1[k] = err.segment<3>(3).squaredNorm();
    red.pos2_sc2[k] = err.segment<3>(6).squaredNorm();
    red.vel2_sc2[k] = err.segment<3>(9).squaredNorm();
    red.sig_pos2_sc1[k] = step.sigma.segment<3>(0).squaredNorm();
    red.sig_vel2_sc1[k] = step.sigma.segment<3>(3).squaredNorm();
    red.sig_pos2_sc2[k] = step.sigma.segment<3>(6).squaredNorm();
    red.sig_vel2_sc2[k] = step.sigma.segment<3>(9).squaredNorm();
  }
  if (run.steps.back().x_hat.size() > 12) {
    red.has_bias = true;
    red.bias_final_nd = run.steps.back().x_hat(12);
  }
  return red;
}

SummaryValue time_average(const std::vector<double>& series, const std::vector<double>& days) {
  SummaryValue v;
  double sum_full = 0.0, sum_post = 0.0;
  std::size_t n_full = 0, n_post = 0;
  for (std::size_t k = 1; k < series.size(); ++k) {
    sum_full += series[k];
    ++n_full;
    if (days[k] > 6.0) {
      sum_post += series[k];
      ++n_post;
    }
  }
  v.full_span = n_full ? sum_full / static_cast<double>(n_full) : 0.0;
  v.post_day6 = n_post ? sum_post / static_cast<double>(n_post) : 0.0;
  return v;
}

}  // namespace

double rms_over_runs(const std::vector<double>& squared_errors) {
  if (squared_errors.empty()) return 0.0;
  double sum = 0.0;
  for (double e : squared_errors) sum += e;
  return std::sqrt(sum / static_cast<double>(squared_errors.size()));
}

MonteCarloResult run_monte_carlo(const ScenarioData& data, int runs, std::uint64_t seed,
                                 int workers) {
  if (runs < 1) throw std::invalid_argument("run_monte_carlo: runs must be >= 1");
  if (workers <= 0) {
    workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  }

  std::vector<std::optional<RunReduction>> reductions(static_cast<std::size_t>(runs));
  std::atomic<int> next{0};
  const auto worker = [&]() {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= runs) break;
      const FilterRunResult run =
          run_single(data, derive_run_seed(seed, static_cast<std::uint64_t>(i)));
      reductions[static_cast<std::size_t>(i)] = reduce_run(data, run);
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < std::min(workers, runs); ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  const std::size_t n_epochs = data.epochs_nd.size();
  MonteCarloResult result;
  result.epochs_days = data.epochs_days;

  std::vector<double> acc_pos1(n_epochs, 0.0), acc_pos2(n_epochs, 0.0);
  std::vector<double> acc_vel1(n_epochs, 0.0), acc_vel2(n_epochs, 0.0);
  std::vector<double> acc_sp1(n_epochs, 0.0), acc_sp2(n_epochs, 0.0);
  std::vector<double> acc_sv1(n_epochs, 0.0), acc_sv2(n_epochs, 0.0);

  int completed = 0, excluded = 0;
  double bias_sum_nd = 0.0;
  int bias_count = 0;
  // Aggregation runs in run-index order so worker scheduling cannot change
  // the floating-point result.
  for (const auto& maybe : reductions) {
    const RunReduction& red = *maybe;
    if (red.diverged) {
      ++excluded;
      continue;
    }
    ++completed;
    for (std::size_t k = 0; k < n_epochs; ++k) {
      acc_pos1[k] += red.pos2_sc1[k];
      acc_pos2[k] += red.pos2_sc2[k];
      acc_vel1[k] += red.vel2_sc1[k];
      acc_vel2[k] += red.vel2_sc2[k];
      acc_sp1[k] += red.sig_pos2_sc1[k];
      acc_sp2[k] += red.sig_pos2_sc2[k];
      acc_sv1[k] += red.sig_vel2_sc1[k];
      acc_sv2[k] += red.sig_vel2_sc2[k];
    }
    if (red.has_bias) {
      bias_sum_nd += red.bias_final_nd;
      ++bias_count;
    }
  }
  if (completed == 0) {
    throw std::runtime_error("run_monte_carlo: every run diverged");
  }

  const double l_m = data.cfg.crtbp.l_star_km * 1000.0;
  const double v_mms = data.cfg.crtbp.vel_unit_km_s() * 1e6;
  const double inv_n = 1.0 / static_cast<double>(completed);
  const auto finish = [&](std::vector<double>& dst, const std::vector<double>& acc,
                          double unit) {
    dst.resize(n_epochs);
    for (std::size_t k = 0; k < n_epochs; ++k) dst[k] = std::sqrt(acc[k] * inv_n) * unit;
  };
  finish(result.rmse_pos_m_sc1, acc_pos1, l_m);
  finish(result.rmse_pos_m_sc2, acc_pos2, l_m);
  finish(result.rmse_vel_mms_sc1, acc_vel1, v_mms);
  finish(result.rmse_vel_mms_sc2, acc_vel2, v_mms);
  finish(result.rms_sigma_pos_m_sc1, acc_sp1, l_m);
  finish(result.rms_sigma_pos_m_sc2, acc_sp2, l_m);
  finish(result.rms_sigma_vel_mms_sc1, acc_sv1, v_mms);
  finish(result.rms_sigma_vel_mms_sc2, acc_sv2, v_mms);

  MonteCarloSummary& s = result.summary;
  s.runs_requested = runs;
  s.runs_completed = completed;
  s.excluded_runs = excluded;

  s.error_pos_m_sc1 = time_average(result.rmse_pos_m_sc1, result.epochs_days);
  s.error_pos_m_sc2 = time_average(result.rmse_pos_m_sc2, result.epochs_days);
  s.error_vel_mms_sc1 = time_average(result.rmse_vel_mms_sc1, result.epochs_days);
  s.error_vel_mms_sc2 = time_average(result.rmse_vel_mms_sc2, result.epochs_days);

  const auto mean2 = [](const SummaryValue& a, const SummaryValue& b) {
    return SummaryValue{(a.full_span + b.full_span) / 2.0, (a.post_day6 + b.post_day6) / 2.0};
  };
  s.rms_error_pos_m = mean2(s.error_pos_m_sc1, s.error_pos_m_sc2);
  s.rms_error_vel_mms = mean2(s.error_vel_mms_sc1, s.error_vel_mms_sc2);
  s.rms_sigma_pos_m = mean2(time_average(result.rms_sigma_pos_m_sc1, result.epochs_days),
                            time_average(result.rms_sigma_pos_m_sc2, result.epochs_days));
  s.rms_sigma_vel_mms = mean2(time_average(result.rms_sigma_vel_mms_sc1, result.epochs_days),
                              time_average(result.rms_sigma_vel_mms_sc2, result.epochs_days));

  // Convergence: first epoch after which the halo orbiter's position RMSE
  // stays below 1 km for the remainder.
  s.convergence_day = -1.0;
  std::size_t last_above = 0;
  bool any_above = false;
  for (std::size_t k = 1; k < n_epochs; ++k) {
    if (result.rmse_pos_m_sc1[k] >= 1000.0) {
      last_above = k;
      any_above = true;
    }
  }
  const std::size_t c = any_above ? last_above + 1 : 1;
  if (c < n_epochs) s.convergence_day = result.epochs_days[c];

  if (bias_count > 0) {
    s.bias_estimated = true;
    s.bias_estimate_final_mean_m = bias_sum_nd / static_cast<double>(bias_count) * l_m;
  }
  return result;
}

MonteCarloResult run_monte_carlo(const ScenarioData& data) {
  return run_monte_carlo(data, data.cfg.montecarlo.runs, data.cfg.montecarlo.seed,
                         data.cfg.montecarlo.workers);
}

}  // namespace xlnav
