#pragma once

namespace xlnav::constants {

// Speed of light
inline constexpr double c_m_s = 299792458.0;
inline constexpr double c_km_s = c_m_s / 1000.0;

// Gravitational parameters, km^3/s^2
inline constexpr double gm_earth = 398600.4418;
inline constexpr double gm_moon = 4902.800066;
inline constexpr double gm_sun = 1.32712440018e11;

// Solar radiation
inline constexpr double solar_flux_1au_w_m2 = 1361.0;
inline constexpr double au_km = 149597870.7;

inline constexpr double seconds_per_day = 86400.0;

// Mean radii, used only for sanity bands (no gravity harmonics anywhere)
inline constexpr double earth_radius_km = 6378.137;
inline constexpr double moon_radius_km = 1737.4;

}  // namespace xlnav::constants
