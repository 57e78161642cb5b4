#include "xlnav/outputs.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace xlnav {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12e", v);
  return buf;
}

std::ofstream open_out(const std::string& dir, const std::string& name, std::string& path) {
  std::filesystem::create_directories(dir);
  path = (std::filesystem::path(dir) / name).string();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

}  // namespace

void RunArtifacts::verify() const {
  for (const std::string& f : files) {
    std::error_code ec;
    if (!std::filesystem::exists(f, ec) || std::filesystem::file_size(f, ec) == 0) {
      throw std::runtime_error("artifact missing or empty: " + f);
    }
  }
}

std::string write_truth_csv(const std::string& dir, const ScenarioData& data) {
  std::string path;
  std::ofstream out = open_out(dir, "truth.csv", path);
  out << "epoch_days,x1,y1,z1,xd1,yd1,zd1,x2,y2,z2,xd2,yd2,zd2\n";
  for (std::size_t k = 0; k < data.truth.size(); ++k) {
    out << num(data.epochs_days[k]);
    for (int i = 0; i < 12; ++i) out << ',' << num(data.truth[k](i));
    out << '\n';
  }
  return path;
}

std::string write_measurements_csv(const std::string& dir,
                                   const std::vector<MeasurementSample>& samples,
                                   const ScenarioData& data) {
  std::string path;
  std::ofstream out = open_out(dir, "measurements.csv", path);
  out << "epoch_days,kind,value,sigma,bias_truth\n";
  const double to_days = data.cfg.crtbp.t_star_days;
  for (const MeasurementSample& m : samples) {
    out << num(m.epoch * to_days) << ','
        << (m.kind == MeasurementKind::range ? "range" : "range_rate") << ',' << num(m.value)
        << ',' << num(m.sigma) << ',' << num(m.bias_truth) << '\n';
  }
  return path;
}

std::string write_estimates_csv(const std::string& dir, const ScenarioData& data,
                                const FilterRunResult& run) {
  std::string path;
  std::ofstream out = open_out(dir, "estimates.csv", path);
  out << "epoch_days";
  const char* comp[6] = {"x", "y", "z", "xd", "yd", "zd"};
  for (int sc = 1; sc <= 2; ++sc) {
    for (int i = 0; i < 6; ++i) out << ",err_" << comp[i] << sc;
  }
  for (int sc = 1; sc <= 2; ++sc) {
    for (int i = 0; i < 6; ++i) out << ",sig_" << comp[i] << sc;
  }
  out << ",residual\n";

  const double l_m = data.cfg.crtbp.l_star_km * 1000.0;
  const double v_mms = data.cfg.crtbp.vel_unit_km_s() * 1e6;
  const double res_unit = 1.0 / data.meas_unit_to_nd;  // back to km or km/s
  for (std::size_t k = 0; k < run.steps.size(); ++k) {
    const FilterStep& step = run.steps[k];
    const Vector12d err = step.x_hat.head<12>() - data.truth[k];
    out << num(data.epochs_days[k]);
    for (int sc = 0; sc < 2; ++sc) {
      for (int i = 0; i < 3; ++i) out << ',' << num(err(6 * sc + i) * l_m);
      for (int i = 3; i < 6; ++i) out << ',' << num(err(6 * sc + i) * v_mms);
    }
    for (int sc = 0; sc < 2; ++sc) {
      for (int i = 0; i < 3; ++i) out << ',' << num(step.sigma(6 * sc + i) * l_m);
      for (int i = 3; i < 6; ++i) out << ',' << num(step.sigma(6 * sc + i) * v_mms);
    }
    out << ',' << num(step.residual * res_unit) << '\n';
  }
  return path;
}

std::string write_bias_csv(const std::string& dir, const ScenarioData& data,
                           const FilterRunResult& run) {
  std::string path;
  std::ofstream out = open_out(dir, "bias.csv", path);
  out << "epoch_days,bias_est_m,bias_sigma_m\n";
  const double l_m = data.cfg.crtbp.l_star_km * 1000.0;
  for (std::size_t k = 0; k < run.steps.size(); ++k) {
    const FilterStep& step = run.steps[k];
    if (step.x_hat.size() <= 12) continue;
    out << num(data.epochs_days[k]) << ',' << num(step.x_hat(12) * l_m) << ','
        << num(step.sigma(12) * l_m) << '\n';
  }
  return path;
}

std::string write_rmse_csv(const std::string& dir, const MonteCarloResult& mc) {
  std::string path;
  std::ofstream out = open_out(dir, "rmse.csv", path);
  out << "epoch_days,rmse_pos_m_sc1,rmse_pos_m_sc2,rmse_vel_mms_sc1,rmse_vel_mms_sc2,"
         "rms_sigma_pos_m_sc1,rms_sigma_pos_m_sc2,rms_sigma_vel_mms_sc1,rms_sigma_vel_mms_sc2\n";
  for (std::size_t k = 0; k < mc.epochs_days.size(); ++k) {
    out << num(mc.epochs_days[k]) << ',' << num(mc.rmse_pos_m_sc1[k]) << ','
        << num(mc.rmse_pos_m_sc2[k]) << ',' << num(mc.rmse_vel_mms_sc1[k]) << ','
        << num(mc.rmse_vel_mms_sc2[k]) << ',' << num(mc.rms_sigma_pos_m_sc1[k]) << ','
        << num(mc.rms_sigma_pos_m_sc2[k]) << ',' << num(mc.rms_sigma_vel_mms_sc1[k]) << ','
        << num(mc.rms_sigma_vel_mms_sc2[k]) << '\n';
  }
  return path;
}

std::string write_summary_json(const std::string& dir, const ScenarioData& data,
                               const MonteCarloSummary& summary) {
  nlohmann::ordered_json j;
  j["scenario"]["dynamics"] = data.cfg.dynamics == DynamicsModel::crtbp ? "crtbp" : "nbody";
  j["scenario"]["duration_days"] = data.cfg.duration_days;
  j["scenario"]["cadence_s"] = data.cfg.cadence_s;
  switch (data.cfg.measurement) {
    case MeasurementType::pn_range: j["scenario"]["measurement"] = "pn_range"; break;
    case MeasurementType::time_derived_range:
      j["scenario"]["measurement"] = "time_derived_range";
      break;
    case MeasurementType::range_rate: j["scenario"]["measurement"] = "range_rate"; break;
  }
  j["scenario"]["measurement_sigma"] = data.meas_sigma_value;
  j["scenario"]["bias_truth_m"] = data.cfg.bias_truth_m;
  j["scenario"]["epoch_utc"] = data.cfg.nbody.epoch_utc;

  const auto block = [](const SummaryValue& v) {
    return nlohmann::ordered_json{{"full_span", v.full_span}, {"post_day6", v.post_day6}};
  };
  j["rms_error_pos_m"] = block(summary.rms_error_pos_m);
  j["rms_sigma_pos_m"] = block(summary.rms_sigma_pos_m);
  j["rms_error_vel_mms"] = block(summary.rms_error_vel_mms);
  j["rms_sigma_vel_mms"] = block(summary.rms_sigma_vel_mms);
  j["per_spacecraft"]["error_pos_m_sc1"] = block(summary.error_pos_m_sc1);
  j["per_spacecraft"]["error_pos_m_sc2"] = block(summary.error_pos_m_sc2);
  j["per_spacecraft"]["error_vel_mms_sc1"] = block(summary.error_vel_mms_sc1);
  j["per_spacecraft"]["error_vel_mms_sc2"] = block(summary.error_vel_mms_sc2);
  j["convergence_day"] = summary.convergence_day;
  j["runs_requested"] = summary.runs_requested;
  j["runs_completed"] = summary.runs_completed;
  j["excluded_runs"] = summary.excluded_runs;
  if (summary.bias_estimated) {
    j["bias_estimate_final_mean_m"] = summary.bias_estimate_final_mean_m;
  }

  std::string path;
  std::ofstream out = open_out(dir, "summary.json", path);
  out << j.dump(2) << '\n';
  return path;
}

std::string write_observability_json(const std::string& dir,
                                     const ObservabilityReport& report) {
  nlohmann::ordered_json j;
  j["singular_values"] = report.singular_values;
  if (report.condition_number_infinite) {
    j["condition_number"] = "infinite";
  } else {
    j["condition_number"] = report.condition_number;
  }
  j["unobservability_index"] = report.unobservability_index;
  j["state_ranking"] = report.state_ranking;
  j["state_scores"] = report.state_scores;

  std::string path;
  std::ofstream out = open_out(dir, "observability.json", path);
  out << j.dump(2) << '\n';
  return path;
}

std::string write_effectiveness_csv(const std::string& dir, const EffectivenessSeries& series,
                                    const ScenarioData& data) {
  std::string path;
  std::ofstream out = open_out(dir, "effectiveness.csv", path);
  out << "epoch_days,effectiveness_sc1,effectiveness_sc2\n";
  const double to_days = data.cfg.crtbp.t_star_days;
  for (std::size_t k = 0; k < series.epochs.size(); ++k) {
    out << num(series.epochs[k] * to_days) << ',' << num(series.sc1[k]) << ','
        << num(series.sc2[k]) << '\n';
  }
  return path;
}

std::string format_link_budget(const std::vector<LinkBudgetEntry>& entries, bool csv) {
  std::string s;
  if (csv) {
    s += "name,value,unit\n";
    for (const auto& e : entries) {
      s += e.name + "," + num(e.value) + "," + e.unit + "\n";
    }
    return s;
  }
  std::size_t width = 0;
  for (const auto& e : entries) width = std::max(width, e.name.size());
  for (const auto& e : entries) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%-*s  %14.6g %s\n", static_cast<int>(width),
                  e.name.c_str(), e.value, e.unit.c_str());
    s += buf;
  }
  return s;
}

}  // namespace xlnav
