// SPDX-License-Identifier: Apache-2.0
//
// Unit conventions shared by every module.
//
// Envelope amplitudes are RMS voltages across a reference resistance
// (1 ohm by default), so P[W] = rho^2 / R and P[dBm] = 10 log10(P[W]) + 30.
// Angles in files and public APIs are degrees; radians only appear inside
// the complex-envelope maps.

#ifndef SUBTHZ_UNITS_HPP
#define SUBTHZ_UNITS_HPP

#include <cmath>
#include <numbers>

namespace subthz {

inline constexpr double kSpeedOfLight = 2.99792458e8;  // m/s
inline constexpr double kBoltzmann = 1.380649e-23;     // J/K
inline constexpr double kReferenceOhms = 1.0;

inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

inline double db_to_linear_power(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_power_to_db(double ratio) { return 10.0 * std::log10(ratio); }

inline double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

/// RMS envelope voltage for a power level, under the reference resistance.
inline double dbm_to_volts(double dbm, double ohms = kReferenceOhms) {
  return std::sqrt(dbm_to_watts(dbm) * ohms);
}

inline double volts_to_dbm(double volts, double ohms = kReferenceOhms) {
  return watts_to_dbm(volts * volts / ohms);
}

/// Mean power (W) of an envelope with mean squared amplitude `mean_square`.
inline double envelope_power_watts(double mean_square, double ohms = kReferenceOhms) {
  return mean_square / ohms;
}

}  // namespace subthz

#endif  // SUBTHZ_UNITS_HPP
