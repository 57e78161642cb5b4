#include "xlnav/ephemeris.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace xlnav {

namespace {

Body parse_body(const std::string& s) {
  if (s == "earth") return Body::earth;
  if (s == "moon") return Body::moon;
  if (s == "sun") return Body::sun;
  throw std::invalid_argument("ephemeris CSV: unknown body '" + s + "'");
}

// Kepler's equation, Newton iteration.
double eccentric_anomaly(double mean_anomaly, double ecc) {
  double e_anom = mean_anomaly;
  for (int i = 0; i < 30; ++i) {
    const double f = e_anom - ecc * std::sin(e_anom) - mean_anomaly;
    const double fp = 1.0 - ecc * std::cos(e_anom);
    const double step = f / fp;
    e_anom -= step;
    if (std::abs(step) < 1e-14) break;
  }
  return e_anom;
}

}  // namespace

AnalyticEphemeris::Config AnalyticEphemeris::Config::from_crtbp(const CrtbpParams& p) {
  Config cfg;
  cfg.moon_sma_km = p.l_star_km;
  cfg.moon_rate_rad_s = 1.0 / p.time_unit_s();
  return cfg;
}

AnalyticEphemeris::AnalyticEphemeris() : AnalyticEphemeris(Config{}) {}

AnalyticEphemeris::AnalyticEphemeris(const Config& cfg) : cfg_(cfg) {
  if (!(cfg.moon_sma_km > 0.0) || !(cfg.moon_rate_rad_s > 0.0) ||
      !(cfg.sun_distance_km > 0.0)) {
    throw std::invalid_argument("AnalyticEphemeris: geometry parameters must be positive");
  }
  if (cfg.moon_eccentricity < 0.0 || cfg.moon_eccentricity >= 1.0) {
    throw std::invalid_argument("AnalyticEphemeris: moon eccentricity must be in [0, 1)");
  }
}

Eigen::Vector3d AnalyticEphemeris::position_km(Body body, double epoch_s) const {
  switch (body) {
    case Body::earth:
      return Eigen::Vector3d::Zero();
    case Body::moon: {
      if (cfg_.moon_eccentricity == 0.0) {
        const double th = cfg_.moon_rate_rad_s * epoch_s;
        return cfg_.moon_sma_km * Eigen::Vector3d{std::cos(th), std::sin(th), 0.0};
      }
      const double e = cfg_.moon_eccentricity;
      const double e_anom = eccentric_anomaly(cfg_.moon_rate_rad_s * epoch_s, e);
      const double x = cfg_.moon_sma_km * (std::cos(e_anom) - e);
      const double y = cfg_.moon_sma_km * std::sqrt(1.0 - e * e) * std::sin(e_anom);
      return {x, y, 0.0};
    }
    case Body::sun: {
      const double lon = cfg_.sun_initial_longitude_rad + cfg_.sun_rate_rad_s * epoch_s;
      return cfg_.sun_distance_km * Eigen::Vector3d{std::cos(lon), std::sin(lon), 0.0};
    }
  }
  throw std::invalid_argument("AnalyticEphemeris: unknown body");
}

CsvEphemeris::CsvEphemeris(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("ephemeris CSV: cannot open " + path);
  }
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (lineno == 1 && line.find("epoch_s") != std::string::npos) continue;  // header
    std::istringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 5) {
      throw std::runtime_error("ephemeris CSV: line " + std::to_string(lineno) +
                               ": expected 5 columns (epoch_s, body, x_km, y_km, z_km)");
    }
    try {
      const double epoch = std::stod(fields[0]);
      const Body body = parse_body(fields[1]);
      const Eigen::Vector3d pos{std::stod(fields[2]), std::stod(fields[3]), std::stod(fields[4])};
      auto& s = series_[body];
      if (!s.epochs.empty() && epoch <= s.epochs.back()) {
        throw std::runtime_error("rows must be strictly time-sorted per body");
      }
      s.epochs.push_back(epoch);
      s.positions.push_back(pos);
    } catch (const std::invalid_argument&) {
      throw std::runtime_error("ephemeris CSV: line " + std::to_string(lineno) +
                               ": malformed numeric field");
    }
  }
  for (Body b : {Body::moon, Body::sun}) {
    auto it = series_.find(b);
    if (it == series_.end() || it->second.epochs.size() < 2) {
      throw std::runtime_error("ephemeris CSV: need at least 2 samples for moon and sun");
    }
  }
}

Eigen::Vector3d CsvEphemeris::position_km(Body body, double epoch_s) const {
  if (body == Body::earth && series_.find(Body::earth) == series_.end()) {
    return Eigen::Vector3d::Zero();  // frame center unless overridden by the file
  }
  const auto it = series_.find(body);
  if (it == series_.end()) {
    throw std::runtime_error("ephemeris CSV: no samples for requested body");
  }
  const auto& s = it->second;
  if (epoch_s < s.epochs.front() || epoch_s > s.epochs.back()) {
    throw std::runtime_error("ephemeris CSV: epoch outside covered span");
  }
  const auto upper = std::upper_bound(s.epochs.begin(), s.epochs.end(), epoch_s);
  const std::size_t hi = std::min<std::size_t>(
      static_cast<std::size_t>(upper - s.epochs.begin()), s.epochs.size() - 1);
  const std::size_t lo = hi == 0 ? 0 : hi - 1;
  if (hi == lo) return s.positions[lo];
  const double w = (epoch_s - s.epochs[lo]) / (s.epochs[hi] - s.epochs[lo]);
  return (1.0 - w) * s.positions[lo] + w * s.positions[hi];
}

std::shared_ptr<const EphemerisProvider> make_analytic_ephemeris(const CrtbpParams& p) {
  return std::make_shared<AnalyticEphemeris>(AnalyticEphemeris::Config::from_crtbp(p));
}

}  // namespace xlnav
