#pragma once

// Physical constants and the unit conversions shared by every module.
// Internally frequencies are angular (rad/s) wherever they enter a lineshape;
// anything crossing the public surface is in Hz, metres, or watts.

#include <numbers>

namespace fuse {

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline constexpr double kNano = 1e-9;
inline constexpr double kPico = 1e-12;
inline constexpr double kGiga = 1e9;

constexpr double hz_to_rad_s(double hz) { return kTwoPi * hz; }
constexpr double rad_s_to_hz(double w) { return w / kTwoPi; }

double dbm_to_watts(double dbm);
/// -inf for zero power.
double watts_to_dbm(double watts);
double db_to_ratio(double db);
double ratio_to_db(double ratio);

/// Vacuum wavelength (m) to optical frequency (Hz) and back.
double wavelength_to_frequency(double wavelength_m);
double frequency_to_wavelength(double frequency_hz);

/// Small-offset conversion about a reference wavelength: dnu = c * dlambda / lambda0^2.
/// Magnitudes map to magnitudes; sign handling is the caller's business.
double wavelength_offset_to_frequency(double dlambda_m, double lambda0_m);
double frequency_offset_to_wavelength(double dnu_hz, double lambda0_m);

}  // namespace fuse
