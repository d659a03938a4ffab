#include "fuse/units.hpp"

#include <cmath>
#include <limits>

#include "fuse/errors.hpp"

namespace fuse {

double dbm_to_watts(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }

double watts_to_dbm(double watts) {
  if (watts <= 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(watts / 1e-3);
}

double db_to_ratio(double db) { return std::pow(10.0, db / 10.0); }

double ratio_to_db(double ratio) {
  if (ratio <= 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(ratio);
}

double wavelength_to_frequency(double wavelength_m) {
  if (!(wavelength_m > 0.0)) throw DomainError("wavelength must be positive");
  return kSpeedOfLight / wavelength_m;
}

double frequency_to_wavelength(double frequency_hz) {
  if (!(frequency_hz > 0.0)) throw DomainError("frequency must be positive");
  return kSpeedOfLight / frequency_hz;
}

double wavelength_offset_to_frequency(double dlambda_m, double lambda0_m) {
  if (!(lambda0_m > 0.0)) throw DomainError("reference wavelength must be positive");
  return kSpeedOfLight * dlambda_m / (lambda0_m * lambda0_m);
}

double frequency_offset_to_wavelength(double dnu_hz, double lambda0_m) {
  if (!(lambda0_m > 0.0)) throw DomainError("reference wavelength must be positive");
  return dnu_hz * lambda0_m * lambda0_m / kSpeedOfLight;
}

}  // namespace fuse
