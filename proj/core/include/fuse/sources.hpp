#pragma once

// Light sources seen by the ring and the spectrally averaged transmission of a
// finite-linewidth source through a (shifted) resonance comb.

#include <optional>
#include <string_view>

#include "fuse/resonator.hpp"

namespace fuse::source {

enum class Shape { delta, gaussian, lorentzian };

/// Power spectral density normalised to unit integral.
struct SourceSpectrum {
  double center_hz = 0.0;
  double fwhm_hz = 0.0;  // 0 only for Shape::delta
  Shape shape = Shape::delta;
  double mean_power_w = 0.0;

  /// Throws ValidationError unless fwhm >= 0 and (shape == delta) == (fwhm == 0).
  static SourceSpectrum make(double center_hz, double fwhm_hz, Shape shape, double mean_power_w);

  /// Density (1/Hz) at `offset_hz` from the center. Zero everywhere for delta.
  double density(double offset_hz) const;
};

struct PulseTrain {
  double rep_rate_hz = 625e6;
  double pulse_width_s = 100e-12;

  static PulseTrain make(double rep_rate_hz, double pulse_width_s);
  double duty_factor() const { return rep_rate_hz * pulse_width_s; }
  double energy_per_pulse(double mean_power_w) const { return mean_power_w / rep_rate_hz; }
};

enum class Port { drop, through };

/// Integral of S(nu) T_port(nu; shift) over the source spectrum, by adaptive
/// Gauss-Kronrod over +/- max(20 FWHM, 20 kappa) about the line center. A
/// delta line returns the pointwise transmission. Throws NumericalError when
/// the relative tolerance cannot be met.
double effective_transmission(const SourceSpectrum& source, const ring::Resonator& resonator,
                              double pr_shift, Port port = Port::drop,
                              double relative_tolerance = 1e-8);

/// Drop-port loss (dB) caused by `pr_shift` relative to the cold cavity.
double attenuation_db(const SourceSpectrum& source, const ring::Resonator& resonator,
                      double pr_shift);

inline constexpr double kPlanck = 6.62607015e-34;

SourceSpectrum cw_signal_1550_68();
/// Gain-switched 10 GHz-FWHM Gaussian at the same carrier, carrying mu = 0.6
/// photons per pulse at 625 MHz.
SourceSpectrum pulsed_signal_10ghz();
SourceSpectrum tunable_attack(double wavelength_m, double power_w = 0.0);

/// Named preset lookup: cw_signal_1550_68, pulsed_signal_10GHz, tunable_attack
/// (the last one needs `wavelength_m`). Throws ValidationError otherwise.
SourceSpectrum preset(std::string_view name, std::optional<double> wavelength_m = std::nullopt);

}  // namespace fuse::source
