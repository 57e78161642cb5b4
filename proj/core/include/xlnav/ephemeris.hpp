#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "xlnav/constants.hpp"
#include "xlnav/crtbp.hpp"

namespace xlnav {

enum class Body { earth, moon, sun };

/// Positions of Earth/Moon/Sun in the Earth-centered inertial frame, km,
/// as a function of seconds past scenario start. Immutable after construction.
class EphemerisProvider {
 public:
  virtual ~EphemerisProvider() = default;
  virtual Eigen::Vector3d position_km(Body body, double epoch_s) const = 0;
};

/// Closed-form provider: Keplerian lunar orbit (default circular at the CRTBP
/// normalization radius and rate, so the rotating-frame conversion is exact)
/// and a circular heliocentric Earth orbit. The rotating and inertial frames
/// coincide at epoch 0.
class AnalyticEphemeris final : public EphemerisProvider {
 public:
  struct Config {
    double moon_sma_km = 384747.96;
    double moon_rate_rad_s = 1.0 / (4.343 * 86400.0);  ///< mean motion
    double moon_eccentricity = 0.0;
    double sun_distance_km = constants::au_km;
    double sun_rate_rad_s = 2.0 * 3.14159265358979323846 / (365.25 * 86400.0);
    double sun_initial_longitude_rad = 0.5061454830783556;  ///< ~29 deg, mid-April epoch

    static Config from_crtbp(const CrtbpParams& p);
  };

  AnalyticEphemeris();  ///< default CRTBP-consistent geometry
  explicit AnalyticEphemeris(const Config& cfg);

  Eigen::Vector3d position_km(Body body, double epoch_s) const override;

 private:
  Config cfg_;
};

/// File-based provider. CSV columns: epoch_s, body, x_km, y_km, z_km with
/// body in {earth, moon, sun}; rows per body must be time-sorted. Positions
/// are linearly interpolated inside the covered span.
class CsvEphemeris final : public EphemerisProvider {
 public:
  explicit CsvEphemeris(const std::string& path);

  Eigen::Vector3d position_km(Body body, double epoch_s) const override;

 private:
  struct Series {
    std::vector<double> epochs;
    std::vector<Eigen::Vector3d> positions;
  };
  std::map<Body, Series> series_;
};

std::shared_ptr<const EphemerisProvider> make_analytic_ephemeris(const CrtbpParams& p);

}  // namespace xlnav
